#pragma once

#include <complex>
#include <string>

namespace YAML {
class Node;
}

namespace possio {

using cplx = std::complex<double>;

/// Physical and Laplace-strip constants of the flow. Immutable once built.
///
/// The half-chord is fixed at 1; a chord of half-length b is handled by the
/// caller rescaling lengths by b (and times by b/a) before building params.
struct FlowParams {
    double a = 0.0;      ///< speed of sound
    double M = 0.0;      ///< Mach number, 0 <= M < 1
    double U = 0.0;      ///< free-stream speed, M*a
    double c = 0.0;      ///< convection constant M / (a (1 - M^2))
    double sigma1 = 0.05;
    double sigma2 = 2.0;
    double sigma_prime = 1.025;  ///< Bromwich abscissa
    static constexpr double half_chord = 1.0;

    double beta2() const noexcept { return 1.0 - M * M; }
    bool in_strip(double sigma) const noexcept { return sigma >= sigma1 && sigma <= sigma2; }
};

/// s together with the derived decay exponent lambda(s) = -s (1 + cU) / U.
struct LaplaceParameter {
    cplx s;
    cplx lambda;
};

/// Builds params from sound speed and Mach number. Throws ConfigError for
/// a <= 0, M < 0 or M >= 1, and for an empty strip.
FlowParams derive_params(double a, double M);
FlowParams derive_params(double a, double M, double sigma1, double sigma2);
FlowParams derive_params(double a, double M, double sigma1, double sigma2, double sigma_prime);

/// lambda(s). Throws DomainError when U == 0 (no convection).
cplx lambda_of(cplx s, const FlowParams& params);

LaplaceParameter make_laplace_parameter(cplx s, const FlowParams& params);

/// Reads the `flow` section (a, M, sigma1, sigma2, sigma_prime). Unknown keys
/// and malformed values raise ConfigError carrying the line number.
FlowParams flow_params_from_yaml(const YAML::Node& flow);

}  // namespace possio
