#pragma once

// Fredholm reduction of the Possio equation. With C the kernel's Cauchy
// coefficient and beta = 1/(pi C), the equation reads
//   T[p] - beta K[p] = -beta w(x,s) e^{-scx},
// and p = T^{-1}[r] turns it into (I + N_s) r = rhs with N_s = -beta K T^{-1}.
// The Nystrom matrix acts on nodal values of r.

#include "possio/cheb.hpp"
#include "possio/flowconfig.hpp"
#include "possio/kernel.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace possio::fredholm {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct BuildOptions {
    bool zero_kernel = false;    ///< test hook: K forced to 0
    int graded_levels = 14;      ///< geometric panels toward the log singularity
    double graded_ratio = 0.15;
    std::size_t panel_order = 12;
    double panel_width_factor = 2.0;  ///< outer panels no wider than factor * pi / n in theta
    bool check_strip = true;
};

struct DiscretizedOperator {
    cplx s;
    cheb::GridPtr grid;
    Matrix matrix;     ///< N-hat, acting on nodal values
    double hs_norm = 0.0;
    cplx beta;         ///< 1/(pi C)
};

/// beta = 1/(pi C) for the measured Cauchy coefficient C.
cplx beta_factor(const FlowParams& params);

/// Integrals v_k(x) = int_0^pi K(x, cos t) cos((k+1) t) dt, k < n, at one
/// collocation point: row x of K applied to T^{-1} in coefficient space.
std::vector<cplx> kernel_moments(const kernel::KernelContext& ctx, double x, std::size_t n,
                                 const BuildOptions& opt = {});

/// Throws DomainError if Re s is outside the strip, ConfigError for n < 16.
DiscretizedOperator build_N(cplx s, const cheb::GridPtr& grid, const FlowParams& params,
                            const BuildOptions& opt = {});

/// N-hat from an explicit matrix (synthetic operators in tests and scans).
DiscretizedOperator from_matrix(cplx s, const cheb::GridPtr& grid, Matrix m);

/// sqrt(sum_ij w_i |N_ij|^2 / w_j), the quadrature image of the kernel's L^2 norm.
double hilbert_schmidt_norm(const Matrix& m, const std::vector<double>& weights);

/// W^{1/2} N W^{-1/2}: the operator in coordinates where the Frobenius norm is hs_norm.
Matrix symmetrized(const Matrix& m, const std::vector<double>& weights);

struct Determinant {
    cplx value;                 ///< det(I + N) exp(-tr N)
    double log_abs = 0.0;       ///< log |value|
    std::vector<cplx> delta;    ///< delta_0 .. delta_mmax of the series in mu
    cplx series_value;          ///< 1 + sum_{m>=2} delta_m
    double hs_norm = 0.0;
    /// Bound checks: |delta_m| <= (e/m)^{m/2} hs^m and |D| <= e^{hs^2/2}
    bool delta_bounds_hold = true;
    bool modulus_bound_holds = true;
};

/// Modified (trace-removed) determinant with its power-series coefficients
/// from the Plemelj-Smithies recursion. Throws ConvergenceError on overflow.
Determinant determinant(const DiscretizedOperator& op, std::size_t m_max = 8);

/// Coefficients delta_m, m <= m_max, of det2(I + mu A) = sum delta_m mu^m.
std::vector<cplx> det2_series(const Matrix& a, std::size_t m_max);

struct ResolventResult {
    Matrix H;                   ///< (I + N)^{-1} N
    cplx determinant;
    double identity_residual = 0.0;   ///< max of |H + NH - N|, |H + HN - N| relative to |N|
    double inverse_residual = 0.0;    ///< |(I - H)(I + N) - I|
    double minor_bound_ratio = 0.0;   ///< max entry ratio of the first-minor bound (<= 1 passes)
    double norm = 0.0;                ///< ||H|| in symmetrized Frobenius norm (diagnostic)
};

/// Throws CharacteristicValueError when |D| < threshold * scale.
ResolventResult resolvent(const DiscretizedOperator& op, double threshold = 1e-12, double scale = 1.0);

struct SolveOptions {
    BuildOptions build;
    double char_threshold = 1e-12;
    double hook_tolerance = 1e-6;
    std::size_t hook_points = 9;
    double lp_exponent = 1.3;
    bool compute_resolvent_route = true;
};

struct PressureDensity {
    cplx s;
    cheb::ChordFunction r;          ///< bounded solution of (I + N) r = rhs
    cheb::ChordFunction p;          ///< T^{-1}[r], singular class (stored cofactor)
    std::vector<cplx> p_coeffs;     ///< T-coefficients of the cofactor, length n + 1
    cheb::ChordFunction rhs;
    cplx determinant;
    double hs_norm = 0.0;
    double lp_norm = 0.0;           ///< int |p|^q for q = lp_exponent
    double hook_residual = 0.0;     ///< off-grid |T[p] - beta K[p] - rhs| / |rhs|
    double route_agreement = 0.0;   ///< |r_direct - (I - H) rhs| / |r|
    double hilbert_residual = 0.0;  ///< |T[p] - r| / |r| at the nodes
    cplx endpoint_left, endpoint_right;  ///< p sqrt(1 - x^2) at x = -1, +1
};

/// Solves the Possio equation for p at one s. Throws CharacteristicValueError
/// near a zero of D and ConvergenceError when the verification hook fails.
PressureDensity solve_p(cplx s, const cheb::ChordFunction& w_hat, const FlowParams& params,
                        const SolveOptions& opt = {});

/// Same with an operator already built at s.
PressureDensity solve_with(const DiscretizedOperator& op, const cheb::ChordFunction& w_hat,
                           const FlowParams& params, const SolveOptions& opt = {});

struct ScanSpec {
    double sigma_lo = 0.05, sigma_hi = 2.0, nu_max = 10.0;
    std::size_t n_sigma = 5, n_nu = 41;
    double zero_tolerance = 1e-8;   ///< accepted |D(z)| relative to max sampled |D|
    std::size_t secant_iterations = 40;
};

struct ScanSample {
    double sigma, nu;
    cplx value;
    bool zero_flag = false;   ///< cell corner adjacent to a located or suspected zero
};

struct ScanZero {
    cplx s;
    cplx value;
    double residual = 0.0;    ///< |D(s)| / max sampled |D|
    bool suspect = false;     ///< refinement did not converge
};

struct DeterminantScan {
    ScanSpec spec;
    std::vector<ScanSample> samples;   ///< row-major: sigma outer, nu inner
    std::vector<ScanZero> zeros;
    double max_modulus = 0.0;
};

/// Samples D on the grid, flags phase-winding cells and local minima, and
/// refines candidates by complex secant iteration.
DeterminantScan scan_function(const std::function<cplx(cplx)>& D, const ScanSpec& spec);

/// scan_function applied to the Nystrom determinant.
DeterminantScan scan_determinant(const ScanSpec& spec, const FlowParams& params, const cheb::GridPtr& grid,
                                 const BuildOptions& opt = {});

}  // namespace possio::fredholm
