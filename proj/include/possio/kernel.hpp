#pragma once

// Doublet functions and the kernel of the generalized Possio equation
//
//   w(x,s) e^{-scx} = int_{-1}^{1} p(xi,s) k(x - xi, s) dxi,
//   k(d) = (1-M^2)/U dH0(z)/dx + lambda (1-M^2)/U H0(z)
//        + e^{lambda d}/U (lambda^2 (1-M^2) - s^2/(a^2 (1-M^2))) F(d),
//   F(d) = int_{-inf}^{d} e^{-lambda w} H0(kappa |w|) dw,   z = kappa |d|,
//
// with kappa = i s / (a (1-M^2)). The kernel depends on x and xi only through
// d = x - xi and splits as k(d) = C / d + K(d) with K = A log|d| + B.

#include "possio/flowconfig.hpp"
#include "possio/quadrature.hpp"

#include <span>
#include <vector>

namespace possio::kernel {

struct KernelEval {
    double x = 0.0;
    double xi = 0.0;
    cplx s;
    cplx full;            ///< complete kernel value
    cplx singular_coeff;  ///< C in full = C/(x - xi) + regular
    cplx regular;         ///< K(x, xi, s)
    cplx z;               ///< Hankel argument kappa |x - xi|
};

/// Coefficient of 1/(x - xi) obtained from the kernel itself: 2i(1-M^2)/(pi U).
cplx cauchy_coefficient(const FlowParams& params);

/// The closed form -2i(1-M^2)^{3/2}/(pi U), which differs from the measured
/// coefficient by -sqrt(1-M^2); kept for comparison only.
cplx stated_cauchy_coefficient(const FlowParams& params);

/// Smallest |x - xi| accepted by the pointwise kernel functions.
inline constexpr double kMinSeparation = 1e-7;

struct TailOptions {
    double rel_tol = 1e-13;  ///< envelope cutoff of the semi-infinite integrals
    std::size_t max_panels = 2000000;
};

/// Everything about the kernel that depends on s alone. Building one costs a
/// semi-infinite quadrature; evaluations afterwards are cheap.
class KernelContext {
public:
    KernelContext(cplx s, const FlowParams& params, const TailOptions& opt = {});

    const FlowParams& params() const noexcept { return params_; }
    cplx s() const noexcept { return s_; }
    cplx lambda() const noexcept { return lambda_; }
    cplx kappa() const noexcept { return kappa_; }
    cplx singular_coeff() const noexcept { return coeff_; }
    /// F(0) = int_0^inf e^{lambda v} H0(kappa v) dv.
    cplx tail_at_zero() const noexcept { return tail0_; }
    /// Point where the semi-infinite integral was truncated.
    double tail_truncation() const noexcept { return truncation_; }

    /// F(d) by graded quadrature from 0.
    cplx tail(double d) const;

    cplx full(double d) const;
    cplx regular(double d) const;

    /// Regular part at many separations (any order, all nonzero), with F
    /// accumulated outward from d = 0 so each value costs one short panel.
    std::vector<cplx> regular_sweep(std::span<const double> d) const;

    /// The three terms of the bracket with the first term's pole removed.
    struct Terms {
        cplx first_regular, second, third;
    };
    Terms terms(double d, cplx tail_value) const;

private:
    FlowParams params_;
    cplx s_, lambda_, kappa_, coeff_, tail_coef_, tail0_;
    double truncation_ = 0.0;
};

/// Psi_{xi,0}(x, y) = dH0(z)/d eta at eta = 0:
/// H1(z) (i s y) / (a sqrt(1-M^2) rho), rho = sqrt((x-xi)^2/(1-M^2) + y^2).
cplx doublet_psi(double x, double y, double xi, cplx s, const FlowParams& params);

/// Panel length and cutoff for integrals of e^{-lambda v} times a doublet
/// quantity over v -> -inf, scaled to the slowest decay and fastest
/// oscillation of the integrand.
quad::RayOptions upstream_ray_options(cplx s, const FlowParams& params, const TailOptions& opt = {});

/// Phi_{xi,0}(x, y) = (e^{lambda x}/U) int_{-inf}^{x} e^{-lambda u} Psi_{xi,0}(u, y) du.
cplx doublet_potential(double x, double y, double xi, cplx s, const FlowParams& params,
                       const TailOptions& opt = {});

cplx possio_kernel_full(double x, double xi, cplx s, const FlowParams& params);

KernelEval kernel_split(double x, double xi, cplx s, const FlowParams& params);

/// Least-squares fit regular ~ A log|x - xi| + B over log-spaced xi < x with
/// |x - xi| in [d_min, d_max]; residual is max |misfit| / (|A| + |B|).
struct LogFit {
    cplx A, B;
    double residual = 0.0;
};

LogFit fit_log(double x, cplx s, const FlowParams& params, double d_min = 1e-4, double d_max = 1e-2,
               std::size_t samples = 25);

/// Five-point finite-difference residual of the reduced wave equation
/// a^2(1-M^2) P_xx + a^2 P_yy - s^2/(1-M^2) P for P = H0(z(x, y)) centered at (xi, 0).
cplx reduced_wave_residual(double x, double y, double xi, cplx s, const FlowParams& params, double h);

/// Finite-difference residual of a^2(1-M^2) q_xx + a^2 q_yy - q_tt - 2Ma q_xt for the
/// doublet q = Psi_{xi,0}(x, y) e^{s(t + cx)}, with step h in x, y and h / a in t.
cplx doublet_equation_residual(double x, double y, double t, double xi, cplx s, const FlowParams& params,
                               double h);

/// Throws ConvergenceError unless Re s > 0, DomainError for coordinates
/// outside the chord or separations below kMinSeparation.
void check_kernel_arguments(double x, double xi, cplx s);

}  // namespace possio::kernel
