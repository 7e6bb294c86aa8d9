#pragma once

// Chebyshev collocation on [-1, 1] and the finite Hilbert transform
//   T[f](x) = (1/pi) PV int_{-1}^{1} f(xi) / (xi - x) dxi
// with its Tricomi right-inverse, both applied in coefficient space through
// the exact pairs
//   T[T_k / sqrt(1-x^2)] = U_{k-1},   T[sqrt(1-x^2) U_{k-1}] = -T_k.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace possio::cheb {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

enum class WeightKind { first_kind, second_kind };

/// Collocation grid. First kind: x_j = cos((j + 1/2) pi / n), the zeros of T_n,
/// with Fejer's first rule. Second kind: x_j = cos(j pi / (n + 1)), j = 1..n,
/// the zeros of U_n, with Fejer's second rule. Nodes are strictly decreasing.
class ChebGrid {
public:
    explicit ChebGrid(std::size_t n, WeightKind kind = WeightKind::first_kind);

    std::size_t n() const noexcept { return n_; }
    WeightKind weight_kind() const noexcept { return kind_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& theta() const noexcept { return theta_; }
    const std::vector<double>& sin_theta() const noexcept { return sin_theta_; }
    /// Weights for int_{-1}^{1} f(x) dx with smooth f.
    const std::vector<double>& quad_weights() const noexcept { return weights_; }

    bool same_as(const ChebGrid& other) const noexcept { return n_ == other.n_ && kind_ == other.kind_; }

private:
    std::size_t n_;
    WeightKind kind_;
    std::vector<double> nodes_, theta_, sin_theta_, weights_;
};

using GridPtr = std::shared_ptr<const ChebGrid>;

GridPtr make_grid(std::size_t n, WeightKind kind = WeightKind::first_kind);

enum class EndpointClass { bounded, inverse_sqrt_singular };

/// Nodal values of a function on the chord. For inverse_sqrt_singular the
/// stored values are the bounded cofactor g of f(x) = g(x) / sqrt(1 - x^2).
struct ChordFunction {
    GridPtr grid;
    CVec values;
    EndpointClass endpoint_class = EndpointClass::bounded;
};

ChordFunction zero_function(GridPtr grid, EndpointClass cls = EndpointClass::bounded);

/// a_k with v_j = sum_k a_k cos(k theta_j) (Chebyshev T-coefficients), k < n.
CVec cos_coeffs(const ChebGrid& grid, std::span<const cplx> values);
CVec cos_values(const ChebGrid& grid, std::span<const cplx> coeffs);

/// b_k with v_j = sum_k b_k sin((k + 1) theta_j), k < n.
CVec sin_coeffs(const ChebGrid& grid, std::span<const cplx> values);
CVec sin_values(const ChebGrid& grid, std::span<const cplx> coeffs);

/// sum_k c_k T_k(x) by Clenshaw's recurrence.
cplx clenshaw(std::span<const cplx> coeffs, double x);

/// Finite Hilbert transform at the grid nodes. Bounded input is read as
/// sqrt(1-x^2) times a polynomial; both classes map to bounded output.
/// Throws ConfigError for n < 4 or second-kind grids.
ChordFunction finite_hilbert(const ChordFunction& f);

/// Tricomi inverse p = T^{-1}[g] of bounded g, returned as an
/// inverse_sqrt_singular function. Throws ConfigError for singular input.
ChordFunction inverse_finite_hilbert(const ChordFunction& g);

/// T-coefficients (length n + 1) of the cofactor of T^{-1}[g]. The top
/// coefficient multiplies T_n, which vanishes at the first-kind nodes.
CVec inverse_finite_hilbert_coeffs(const ChordFunction& g);

/// int_{-1}^{1} f dx for either class (Gauss-Chebyshev for the singular class).
cplx integrate(const ChordFunction& f);

/// int_{-1}^{1} x f dx.
cplx first_moment(const ChordFunction& f);

/// int_{-1}^{1} |g(x)|^q (1 - x^2)^{-q/2} dx for a singular-class cofactor
/// with T-coefficients `coeffs`. Finite for q < 2.
double lp_integral(std::span<const cplx> coeffs, double q);

/// Throws ConfigError unless both functions live on the same grid.
void require_same_grid(const ChordFunction& a, const ChordFunction& b);

}  // namespace possio::cheb
