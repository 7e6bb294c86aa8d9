#include "possio/cheb.hpp"

#include "possio/errors.hpp"
#include "possio/quadrature.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

namespace possio::cheb {

namespace {

using std::numbers::pi;

/// FFTW r2r plans transforming real and imaginary parts of an interleaved
/// complex array at once. Created with FFTW_ESTIMATE so results are
/// reproducible run to run; executed through the thread-safe new-array API.
class PlanCache {
public:
    fftw_plan get(std::size_t n, fftw_r2r_kind kind) {
        std::lock_guard lock(mu_);
        auto key = std::make_tuple(n, static_cast<int>(kind));
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<double> in(2 * n), out(2 * n);
        const int len = static_cast<int>(n);
        fftw_plan p = fftw_plan_many_r2r(1, &len, 2, in.data(), nullptr, 2, 1, out.data(), nullptr, 2, 1,
                                         &kind, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw ConfigError("FFTW could not create a transform of size " + std::to_string(n));
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }

private:
    std::mutex mu_;
    std::map<std::tuple<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plans() {
    static PlanCache cache;
    return cache;
}

CVec run(std::size_t n, fftw_r2r_kind kind, CVec in) {
    CVec out(n);
    fftw_execute_r2r(plans().get(n, kind), reinterpret_cast<double*>(in.data()),
                     reinterpret_cast<double*>(out.data()));
    return out;
}

void require_first_kind(const ChebGrid& grid) {
    if (grid.weight_kind() != WeightKind::first_kind) {
        throw ConfigError("coefficient-space transforms require a first-kind Chebyshev grid");
    }
}

void require_length(const ChebGrid& grid, std::size_t len) {
    if (len != grid.n()) {
        throw ConfigError("vector of length " + std::to_string(len) + " does not match grid size " +
                          std::to_string(grid.n()));
    }
}

void require_transform_grid(const ChordFunction& f) {
    if (!f.grid) throw ConfigError("chord function has no grid");
    require_first_kind(*f.grid);
    if (f.grid->n() < 4) throw ConfigError("finite Hilbert transform needs n >= 4");
    require_length(*f.grid, f.values.size());
}

}  // namespace

ChebGrid::ChebGrid(std::size_t n, WeightKind kind) : n_(n), kind_(kind) {
    if (n < 1) throw ConfigError("Chebyshev grid needs at least one node");
    nodes_.resize(n);
    theta_.resize(n);
    sin_theta_.resize(n);
    weights_.resize(n);
    const double nn = static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double jj = static_cast<double>(j);
        const double th = kind == WeightKind::first_kind ? (jj + 0.5) * pi / nn : (jj + 1.0) * pi / (nn + 1.0);
        theta_[j] = th;
        nodes_[j] = std::cos(th);
        sin_theta_[j] = std::sin(th);
        double w = 0.0;
        if (kind == WeightKind::first_kind) {
            double sum = 0.0;
            for (std::size_t k = 1; k <= n / 2; ++k) {
                const double kk = static_cast<double>(k);
                sum += std::cos(2.0 * kk * th) / (4.0 * kk * kk - 1.0);
            }
            w = 2.0 / nn * (1.0 - 2.0 * sum);
        } else {
            double sum = 0.0;
            for (std::size_t k = 1; k <= (n + 1) / 2; ++k) {
                const double m = 2.0 * static_cast<double>(k) - 1.0;
                sum += std::sin(m * th) / m;
            }
            w = 4.0 * std::sin(th) / (nn + 1.0) * sum;
        }
        weights_[j] = w;
    }
    // exact symmetry of the node set
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double x = 0.5 * (nodes_[j] - nodes_[n - 1 - j]);
        nodes_[j] = x;
        nodes_[n - 1 - j] = -x;
    }
    if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

GridPtr make_grid(std::size_t n, WeightKind kind) { return std::make_shared<const ChebGrid>(n, kind); }

ChordFunction zero_function(GridPtr grid, EndpointClass cls) {
    const std::size_t n = grid->n();
    return {std::move(grid), CVec(n, 0.0), cls};
}

CVec cos_coeffs(const ChebGrid& grid, std::span<const cplx> values) {
    require_first_kind(grid);
    require_length(grid, values.size());
    const std::size_t n = grid.n();
    CVec a = run(n, FFTW_REDFT10, CVec(values.begin(), values.end()));
    const double nn = static_cast<double>(n);
    a[0] /= 2.0 * nn;
    for (std::size_t k = 1; k < n; ++k) a[k] /= nn;
    return a;
}

CVec cos_values(const ChebGrid& grid, std::span<const cplx> coeffs) {
    require_first_kind(grid);
    require_length(grid, coeffs.size());
    const std::size_t n = grid.n();
    CVec x(coeffs.begin(), coeffs.end());
    for (std::size_t k = 1; k < n; ++k) x[k] *= 0.5;
    return run(n, FFTW_REDFT01, std::move(x));
}

CVec sin_coeffs(const ChebGrid& grid, std::span<const cplx> values) {
    require_first_kind(grid);
    require_length(grid, values.size());
    const std::size_t n = grid.n();
    CVec b = run(n, FFTW_RODFT10, CVec(values.begin(), values.end()));
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k + 1 < n; ++k) b[k] /= nn;
    b[n - 1] /= 2.0 * nn;
    return b;
}

CVec sin_values(const ChebGrid& grid, std::span<const cplx> coeffs) {
    require_first_kind(grid);
    require_length(grid, coeffs.size());
    const std::size_t n = grid.n();
    CVec x(coeffs.begin(), coeffs.end());
    for (std::size_t k = 0; k + 1 < n; ++k) x[k] *= 0.5;
    return run(n, FFTW_RODFT01, std::move(x));
}

cplx clenshaw(std::span<const cplx> coeffs, double x) {
    cplx b1 = 0.0, b2 = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) {
        const cplx b0 = 2.0 * x * b1 - b2 + coeffs[k];
        b2 = b1;
        b1 = b0;
    }
    return coeffs.empty() ? cplx(0.0) : x * b1 - b2 + coeffs[0];
}

ChordFunction finite_hilbert(const ChordFunction& f) {
    require_transform_grid(f);
    const ChebGrid& g = *f.grid;
    const std::size_t n = g.n();
    ChordFunction out{f.grid, {}, EndpointClass::bounded};
    if (f.endpoint_class == EndpointClass::inverse_sqrt_singular) {
        // cofactor sum c_k T_k  ->  sum_{k>=1} c_k U_{k-1} = sum c_k sin(k theta) / sin(theta)
        const CVec c = cos_coeffs(g, f.values);
        CVec b(n, 0.0);
        for (std::size_t k = 1; k < n; ++k) b[k - 1] = c[k];
        out.values = sin_values(g, b);
        for (std::size_t j = 0; j < n; ++j) out.values[j] /= g.sin_theta()[j];
    } else {
        // f = sin(theta) sum b_k U_k  ->  -sum b_k T_{k+1}; T_n vanishes at the nodes
        const CVec b = sin_coeffs(g, f.values);
        CVec a(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) a[k + 1] = -b[k];
        out.values = cos_values(g, a);
    }
    return out;
}

CVec inverse_finite_hilbert_coeffs(const ChordFunction& gfun) {
    require_transform_grid(gfun);
    if (gfun.endpoint_class != EndpointClass::bounded) {
        throw ConfigError("inverse finite Hilbert transform requires bounded-class input");
    }
    const ChebGrid& g = *gfun.grid;
    const std::size_t n = g.n();
    // g = sum b_k U_k, so g sin(theta) = sum b_k sin((k+1) theta); T^{-1}[U_k] = T_{k+1} / sqrt(1-x^2)
    CVec scaled(n);
    for (std::size_t j = 0; j < n; ++j) scaled[j] = gfun.values[j] * g.sin_theta()[j];
    const CVec b = sin_coeffs(g, scaled);
    CVec c(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) c[k + 1] = b[k];
    return c;
}

ChordFunction inverse_finite_hilbert(const ChordFunction& g) {
    CVec c = inverse_finite_hilbert_coeffs(g);
    c.pop_back();
    return {g.grid, cos_values(*g.grid, c), EndpointClass::inverse_sqrt_singular};
}

cplx integrate(const ChordFunction& f) {
    const ChebGrid& g = *f.grid;
    require_length(g, f.values.size());
    cplx sum = 0.0;
    if (f.endpoint_class == EndpointClass::inverse_sqrt_singular) {
        require_first_kind(g);
        for (const cplx& v : f.values) sum += v;
        return sum * (pi / static_cast<double>(g.n()));
    }
    for (std::size_t j = 0; j < g.n(); ++j) sum += g.quad_weights()[j] * f.values[j];
    return sum;
}

cplx first_moment(const ChordFunction& f) {
    ChordFunction xf = f;
    for (std::size_t j = 0; j < xf.values.size(); ++j) xf.values[j] *= f.grid->nodes()[j];
    return integrate(xf);
}

double lp_integral(std::span<const cplx> coeffs, double q) {
    // x = cos(theta): int_0^pi |g(cos theta)|^q sin(theta)^{1-q} d theta
    auto integrand = [&](double th) {
        return cplx(std::pow(std::abs(clenshaw(coeffs, std::cos(th))), q) * std::pow(std::sin(th), 1.0 - q));
    };
    const std::size_t panels = std::max<std::size_t>(8, coeffs.size());
    const double h = pi / static_cast<double>(panels);
    const quad::Rule& rule = quad::gauss_legendre(12);
    double sum = quad::graded(0.0, h, integrand, 40, 0.3, 12).real();
    sum += quad::graded(pi, -h, integrand, 40, 0.3, 12).real();
    for (std::size_t i = 1; i + 1 < panels; ++i) {
        sum += quad::fixed(rule, h * static_cast<double>(i), h * static_cast<double>(i + 1), integrand).real();
    }
    return sum;
}

void require_same_grid(const ChordFunction& a, const ChordFunction& b) {
    if (!a.grid || !b.grid || !a.grid->same_as(*b.grid)) {
        throw ConfigError("chord functions live on different grids");
    }
}

}  // namespace possio::cheb
