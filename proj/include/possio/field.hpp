#pragma once

// Velocity and acceleration potentials of a doublet solution
//   phi(x,y,t) = (1/2 pi i) int ds e^{s(t+cx)} int p(xi,s) Phi_{xi,0}(x,y) dxi
//   psi(x,y,t) = (1/2 pi i) int ds e^{s(t+cx)} int p(xi,s) Psi_{xi,0}(x,y) dxi
// and the boundary-condition probes built on them. A harmonic family holds a
// single s and reads phi = e^{st} phi_hat; a contour family is inverted with
// the gated Bromwich sum.

#include "possio/fredholm.hpp"
#include "possio/laplace.hpp"

#include <span>
#include <vector>

namespace possio::field {

using cheb::cplx;

enum class FamilyKind { harmonic, contour };

struct SolutionFamily {
    FamilyKind kind = FamilyKind::harmonic;
    FlowParams params;
    cheb::GridPtr grid;
    laplace::Contour contour;             ///< contour kind only
    std::vector<cplx> s;                  ///< one point, or Contour::points order
    std::vector<std::vector<cplx>> p_coeffs;  ///< T-coefficients of the density cofactor per s
    std::vector<fredholm::PressureDensity> solutions;  ///< empty for synthetic families
    bool mirrored = false;                ///< nu < 0 half filled by conjugation
    double gate_tol = laplace::kGateTolerance;
    bool enforce_gate = true;
};

inline constexpr double kDefaultSigmaShift = 0.1;

/// Single solve at s = sigma_shift + ik with w_hat = w0, the fixed-s reduction
/// of the harmonic problem; phi(t) = e^{st} phi_hat.
SolutionFamily harmonic_family(const laplace::DownwashSpec& spec, const FlowParams& params,
                               const cheb::GridPtr& grid, double sigma_shift = kDefaultSigmaShift,
                               const fredholm::SolveOptions& opt = {});

/// Solves at every contour point in parallel. Real time data are solved on
/// nu >= 0 only and mirrored by conjugation.
SolutionFamily contour_family(const laplace::DownwashSpec& spec, const FlowParams& params,
                              const cheb::GridPtr& grid, const laplace::Contour& contour,
                              const fredholm::SolveOptions& opt = {});

/// Family from given density cofactors (one T-coefficient vector per s).
SolutionFamily synthetic_family(FamilyKind kind, const FlowParams& params, const cheb::GridPtr& grid,
                                std::vector<cplx> s, std::vector<std::vector<cplx>> p_coeffs,
                                const laplace::Contour& contour = {});

/// Pointwise sum of two families on the same s points.
SolutionFamily add(const SolutionFamily& a, const SolutionFamily& b);

struct Probe {
    double x = 0.0;
    double y = 0.0;
};

/// Laplace-domain values at one s: phi_hat, d phi_hat / dy, psi_hat
/// (including the e^{scx} factor).
struct TransformedValues {
    cplx phi, phi_y, psi;
};

enum Need : unsigned { need_phi = 1, need_phi_y = 2, need_psi = 4, need_all = 7 };

/// All probes at family point j. Probes sharing y share one cumulative sweep
/// of the doublet potential. psi accepts y = 0 off the chord; phi and phi_y
/// need y != 0.
std::vector<TransformedValues> transformed(const SolutionFamily& fam, std::size_t j,
                                           std::span<const Probe> probes, unsigned need = need_all);

struct FieldSample {
    double x = 0.0, y = 0.0, t = 0.0;
    cplx phi, phi_y, psi;
    std::vector<cplx> contributions;  ///< phi_hat per s (diagnostic)
    double gate_change = 0.0;         ///< largest Bromwich gate change among phi, phi_y, psi
};

/// Every probe at every time.
std::vector<FieldSample> evaluate(const SolutionFamily& fam, std::span<const Probe> probes,
                                  std::span<const double> times, unsigned need = need_all);

FieldSample evaluate_phi(double x, double y, double t, const SolutionFamily& fam);
FieldSample evaluate_psi(double x, double y, double t, const SolutionFamily& fam);

/// One-sided limit y -> 0+ of psi on the chord: -2i sqrt(1-M^2) e^{scx} p(x).
cplx psi_on_chord(const SolutionFamily& fam, double x, double t);

struct TangencyProbe {
    double x = 0.0, t = 0.0;
    std::vector<cplx> dphi_dy;  ///< at each y level
    cplx extrapolated;
    cplx target;
    double error = 0.0;
    bool flagged = false;
};

struct TangencyReport {
    std::vector<double> y_levels;
    std::vector<TangencyProbe> probes;
    double relative_residual = 0.0;  ///< max |extrapolated - w| / max |w|
    double tolerance = 1e-2;
};

/// d phi / dy at y_levels (halving sequence), Richardson-extrapolated to
/// y = 0 and compared with w(x, t).
TangencyReport flow_tangency_residual(const SolutionFamily& fam, const laplace::DownwashSpec& downwash,
                                      std::span<const double> xs, std::span<const double> times,
                                      std::vector<double> y_levels = {0.05, 0.025, 0.0125},
                                      double tolerance = 1e-2);

struct PdeResidual {
    double x = 0.0, y = 0.0, t = 0.0;
    std::vector<double> h;
    std::vector<double> residual;  ///< |a^2(1-M^2) phi_xx + a^2 phi_yy - phi_tt - 2Ma phi_xt| / (a^2 |phi|)
    double decay_ratio = 0.0;      ///< residual[0] / residual[last]
};

/// Finite-difference residual of the convected wave equation for phi with
/// step h in x, y and h / a in t, for each h.
PdeResidual pde_residual(const SolutionFamily& fam, double x, double y, double t, std::vector<double> h);

/// The same residual for one doublet phi = Phi_{xi,0}(x, y) e^{s(t + cx)}.
PdeResidual doublet_pde_residual(double xi, cplx s, const FlowParams& params, double x, double y, double t,
                                 std::vector<double> h);

struct Loads {
    double t = 0.0;
    cplx lift, moment;
    double gate_change = 0.0;
};

/// lift = int p dxi, moment = int xi p dxi by Gauss-Chebyshev, then taken to
/// the time domain like phi.
std::vector<Loads> compute_loads(const SolutionFamily& fam, std::span<const double> times);

/// Transformed loads at family point j.
std::pair<cplx, cplx> transformed_loads(const SolutionFamily& fam, std::size_t j);

struct KuttaReport {
    double max_off_chord = 0.0;  ///< max |psi(x, 0, t)| over |x| in [1.05, 3]
    double chord_scale = 0.0;    ///< max |psi| on the chord (one-sided limit)
    double ratio = 0.0;
};

KuttaReport kutta_check(const SolutionFamily& fam, std::span<const double> times, std::size_t n_x = 24);

}  // namespace possio::field
