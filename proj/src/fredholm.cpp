#include "possio/fredholm.hpp"

#include "possio/errors.hpp"
#include "possio/parallel.hpp"
#include "possio/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace possio::fredholm {

namespace {

using std::numbers::pi;

/// Theta nodes on [0, pi] clustered geometrically at theta_x from both sides,
/// with uniform panels of width <= cap elsewhere.
void theta_rule(double theta_x, std::size_t n, const BuildOptions& opt, std::vector<double>& nodes,
                std::vector<double>& weights) {
    const quad::Rule& rule = quad::gauss_legendre(opt.panel_order);
    const double cap = opt.panel_width_factor * pi / static_cast<double>(n);
    auto side = [&](double length, double dir) {
        if (length <= 0.0) return;
        const double h0 = std::min(cap, length);
        // keep the innermost panel well above the floating-point spacing of theta
        int levels = opt.graded_levels;
        while (levels > 0 && h0 * std::pow(opt.graded_ratio, levels) < 1e-13) --levels;
        quad::append_graded(rule, theta_x, dir * h0, levels, opt.graded_ratio, nodes, weights);
        const double rest = length - h0;
        if (rest <= 0.0) return;
        const std::size_t panels = static_cast<std::size_t>(std::ceil(rest / cap));
        const double w = rest / static_cast<double>(panels);
        for (std::size_t k = 0; k < panels; ++k) {
            const double a = theta_x + dir * (h0 + w * static_cast<double>(k));
            quad::append_panel(rule, a, a + dir * w, nodes, weights);
        }
    };
    side(theta_x, -1.0);
    side(pi - theta_x, 1.0);
}

/// Sine-coefficient matrix S with b = S (nodal values) for b = sin_coeffs(v sin theta).
Matrix sine_matrix(const cheb::ChebGrid& g) {
    const std::size_t n = g.n();
    Matrix S(n, n);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double scale = (k + 1 == n ? 1.0 : 2.0) / nn;
        for (std::size_t j = 0; j < n; ++j) {
            S(k, j) = scale * g.sin_theta()[j] * std::sin(static_cast<double>(k + 1) * g.theta()[j]);
        }
    }
    return S;
}

cplx log_det_identity_plus(const Matrix& N) {
    const Eigen::Index n = N.rows();
    Matrix A = Matrix::Identity(n, n) + N;
    Eigen::PartialPivLU<Matrix> lu(A);
    const Matrix& LU = lu.matrixLU();
    cplx sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx d = LU(i, i);
        if (d == cplx(0.0)) return cplx(-std::numeric_limits<double>::infinity(), 0.0);
        sum += std::log(d);
    }
    if (lu.permutationP().determinant() < 0) sum += cplx(0.0, pi);
    return sum;
}

void require_operator(const DiscretizedOperator& op) {
    if (!op.grid) throw ConfigError("operator has no grid");
    const auto n = static_cast<Eigen::Index>(op.grid->n());
    if (op.matrix.rows() != n || op.matrix.cols() != n) throw ConfigError("operator matrix does not match its grid");
    if (!op.matrix.allFinite()) throw ConvergenceError("operator matrix contains non-finite entries");
}

double max_abs(const cheb::CVec& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

cplx beta_factor(const FlowParams& params) { return 1.0 / (pi * kernel::cauchy_coefficient(params)); }

std::vector<cplx> kernel_moments(const kernel::KernelContext& ctx, double x, std::size_t n,
                                 const BuildOptions& opt) {
    std::vector<cplx> v(n, 0.0);
    if (opt.zero_kernel) return v;
    const double theta_x = std::acos(std::clamp(x, -1.0, 1.0));
    std::vector<double> th, w;
    theta_rule(theta_x, n, opt, th, w);
    std::vector<double> d(th.size());
    // x - cos t without cancellation near t = theta_x
    for (std::size_t m = 0; m < th.size(); ++m) {
        d[m] = 2.0 * std::sin(0.5 * (th[m] + theta_x)) * std::sin(0.5 * (th[m] - theta_x));
    }
    const std::vector<cplx> K = ctx.regular_sweep(d);
    for (std::size_t m = 0; m < th.size(); ++m) {
        const double c = std::cos(th[m]);
        const cplx wk = w[m] * K[m];
        // cos((k+1) t) by the three-term recurrence
        double prev = 1.0, cur = c;
        for (std::size_t k = 0; k < n; ++k) {
            v[k] += wk * cur;
            const double next = 2.0 * c * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    return v;
}

double hilbert_schmidt_norm(const Matrix& m, const std::vector<double>& weights) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            sum += weights[static_cast<std::size_t>(i)] * std::norm(m(i, j)) / weights[static_cast<std::size_t>(j)];
        }
    }
    return std::sqrt(sum);
}

Matrix symmetrized(const Matrix& m, const std::vector<double>& weights) {
    Matrix out = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(i, j) *= std::sqrt(weights[static_cast<std::size_t>(i)] / weights[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

DiscretizedOperator from_matrix(cplx s, const cheb::GridPtr& grid, Matrix m) {
    DiscretizedOperator op;
    op.s = s;
    op.grid = grid;
    op.matrix = std::move(m);
    op.hs_norm = hilbert_schmidt_norm(op.matrix, grid->quad_weights());
    op.beta = 0.0;
    require_operator(op);
    return op;
}

DiscretizedOperator build_N(cplx s, const cheb::GridPtr& grid, const FlowParams& params, const BuildOptions& opt) {
    if (!grid || grid->n() < 16) throw ConfigError("Nystrom operator needs a grid with n >= 16");
    if (grid->weight_kind() != cheb::WeightKind::first_kind) throw ConfigError("Nystrom operator needs a first-kind grid");
    if (opt.check_strip && !params.in_strip(s.real())) {
        std::ostringstream os;
        os << "Re s = " << s.real() << " outside the strip [" << params.sigma1 << ", " << params.sigma2 << "]";
        throw DomainError(os.str());
    }
    const std::size_t n = grid->n();
    const cplx beta = beta_factor(params);
    Matrix V = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (!opt.zero_kernel) {
        const kernel::KernelContext ctx(s, params);
        parallel_for(n, [&](std::size_t i) {
            const std::vector<cplx> row = kernel_moments(ctx, grid->nodes()[i], n, opt);
            for (std::size_t k = 0; k < n; ++k) V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        });
    }
    DiscretizedOperator op;
    op.s = s;
    op.grid = grid;
    op.beta = beta;
    op.matrix = -beta * (V * sine_matrix(*grid));
    op.hs_norm = hilbert_schmidt_norm(op.matrix, grid->quad_weights());
    require_operator(op);
    return op;
}

std::vector<cplx> det2_series(const Matrix& a, std::size_t m_max) {
    std::vector<cplx> t(m_max + 1, 0.0);
    Matrix power = a;
    for (std::size_t k = 2; k <= m_max; ++k) {
        power = power * a;
        t[k] = power.trace();
    }
    std::vector<cplx> delta(m_max + 1, 0.0);
    delta[0] = 1.0;
    for (std::size_t m = 1; m <= m_max; ++m) {
        cplx sum = 0.0;
        for (std::size_t k = 2; k <= m; ++k) sum += (k % 2 == 1 ? 1.0 : -1.0) * t[k] * delta[m - k];
        delta[m] = sum / static_cast<double>(m);
    }
    return delta;
}

Determinant determinant(const DiscretizedOperator& op, std::size_t m_max) {
    require_operator(op);
    Determinant d;
    const cplx log_det = log_det_identity_plus(op.matrix) - op.matrix.trace();
    if (log_det.real() > 700.0) throw ConvergenceError("modified determinant overflows");
    d.value = std::isinf(log_det.real()) ? cplx(0.0) : std::exp(log_det);
    d.log_abs = log_det.real();
    d.delta = det2_series(op.matrix, m_max);
    d.series_value = 0.0;
    for (const auto& x : d.delta) d.series_value += x;
    d.hs_norm = op.hs_norm;
    const double slack = 1.0 + 1e-10;
    for (std::size_t m = 1; m < d.delta.size(); ++m) {
        const double mm = static_cast<double>(m);
        const double bound = std::pow(std::exp(1.0) / mm, mm / 2.0) * std::pow(op.hs_norm, mm);
        if (std::abs(d.delta[m]) > bound * slack + 1e-300) d.delta_bounds_hold = false;
    }
    d.modulus_bound_holds = std::abs(d.value) <= std::exp(0.5 * op.hs_norm * op.hs_norm) * slack;
    return d;
}

ResolventResult resolvent(const DiscretizedOperator& op, double threshold, double scale) {
    require_operator(op);
    ResolventResult r;
    r.determinant = determinant(op, 2).value;
    if (std::abs(r.determinant) < threshold * scale) {
        std::ostringstream os;
        os << "s = " << op.s << " is a characteristic value: |D| = " << std::abs(r.determinant);
        throw CharacteristicValueError(os.str(), op.s);
    }
    const Matrix& N = op.matrix;
    const Eigen::Index n = N.rows();
    const Matrix I = Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(I + N);
    r.H = lu.solve(N);
    const double nn = std::max(N.norm(), 1e-300);
    r.identity_residual = std::max((r.H + N * r.H - N).norm(), (r.H + r.H * N - N).norm()) / nn;
    r.inverse_residual = ((I - r.H) * (I + N) - I).norm();

    const std::vector<double>& w = op.grid->quad_weights();
    const Matrix A = symmetrized(N, w);
    const Matrix Hs = symmetrized(r.H, w);
    r.norm = Hs.norm();
    const double hs = A.norm();
    const double growth = std::exp(0.5 * hs * hs);
    Eigen::VectorXd alpha = A.rowwise().norm();
    Eigen::VectorXd beta = A.colwise().norm().transpose();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double minor = std::abs(r.determinant * Hs(i, j));
            const double bound = growth * (std::abs(A(i, j)) + std::sqrt(std::exp(1.0)) * alpha(i) * beta(j));
            if (bound > 0.0) worst = std::max(worst, minor / bound);
            else if (minor > 0.0) worst = std::numeric_limits<double>::infinity();
        }
    }
    r.minor_bound_ratio = worst;
    return r;
}

PressureDensity solve_with(const DiscretizedOperator& op, const cheb::ChordFunction& w_hat, const FlowParams& params,
                           const SolveOptions& opt) {
    require_operator(op);
    if (w_hat.endpoint_class != cheb::EndpointClass::bounded) throw ConfigError("downwash must be bounded-class");
    cheb::require_same_grid(w_hat, cheb::zero_function(op.grid));
    if (w_hat.values.size() != op.grid->n()) throw ConfigError("downwash length does not match the grid");
    const cheb::ChebGrid& g = *op.grid;
    const std::size_t n = g.n();
    const cplx s = op.s;
    const cplx beta = beta_factor(params);

    PressureDensity out;
    out.s = s;
    out.hs_norm = op.hs_norm;
    out.rhs = {op.grid, cheb::CVec(n), cheb::EndpointClass::bounded};
    Vector rhs(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        out.rhs.values[j] = -beta * w_hat.values[j] * std::exp(-s * params.c * g.nodes()[j]);
        rhs(static_cast<Eigen::Index>(j)) = out.rhs.values[j];
    }

    const Determinant det = determinant(op, 2);
    out.determinant = det.value;
    if (std::abs(det.value) < opt.char_threshold) {
        std::ostringstream os;
        os << "s = " << s << " is a characteristic value: |D| = " << std::abs(det.value);
        throw CharacteristicValueError(os.str(), s);
    }
    const Matrix I = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::PartialPivLU<Matrix> lu(I + op.matrix);
    const Vector r = lu.solve(rhs);
    out.r = {op.grid, cheb::CVec(r.data(), r.data() + n), cheb::EndpointClass::bounded};
    const double rnorm = std::max(r.cwiseAbs().maxCoeff(), 1e-300);

    if (opt.compute_resolvent_route) {
        const Matrix H = lu.solve(op.matrix);
        const Vector r2 = (I - H) * rhs;
        out.route_agreement = (r - r2).cwiseAbs().maxCoeff() / rnorm;
    }

    out.p_coeffs = cheb::inverse_finite_hilbert_coeffs(out.r);
    out.p = cheb::inverse_finite_hilbert(out.r);
    out.lp_norm = cheb::lp_integral(out.p_coeffs, opt.lp_exponent);
    out.endpoint_right = cheb::clenshaw(out.p_coeffs, 1.0);
    out.endpoint_left = cheb::clenshaw(out.p_coeffs, -1.0);

    const cheb::ChordFunction back = cheb::finite_hilbert(out.p);
    double hr = 0.0;
    for (std::size_t j = 0; j < n; ++j) hr = std::max(hr, std::abs(back.values[j] - out.r.values[j]));
    out.hilbert_residual = hr / rnorm;

    // Off-grid verification of T[p] - beta K[p] = rhs with a finer kernel rule.
    const double rhs_scale = max_abs(out.rhs.values);
    if (rhs_scale == 0.0) {
        out.hook_residual = 0.0;
        return out;
    }
    const cheb::CVec w_coeffs = cheb::cos_coeffs(g, w_hat.values);
    BuildOptions fine = opt.build;
    fine.graded_levels += 4;
    fine.panel_width_factor *= 0.5;
    std::optional<kernel::KernelContext> ctx;
    if (!fine.zero_kernel) ctx.emplace(s, params);
    std::vector<double> worst(opt.hook_points, 0.0);
    parallel_for(opt.hook_points, [&](std::size_t k) {
        const double th = (static_cast<double>(k) + 0.37) * pi / static_cast<double>(opt.hook_points);
        const double x = std::cos(th);
        cplx tp = 0.0;
        for (std::size_t m = 0; m < n; ++m) tp += out.p_coeffs[m + 1] * std::sin(static_cast<double>(m + 1) * th);
        tp /= std::sin(th);
        cplx kp = 0.0;
        if (ctx) {
            const std::vector<cplx> v = kernel_moments(*ctx, x, n, fine);
            for (std::size_t m = 0; m < n; ++m) kp += out.p_coeffs[m + 1] * v[m];
        }
        const cplx target = -beta * cheb::clenshaw(w_coeffs, x) * std::exp(-s * params.c * x);
        worst[k] = std::abs(tp - beta * kp - target);
    });
    out.hook_residual = *std::max_element(worst.begin(), worst.end()) / rhs_scale;
    if (!(out.hook_residual <= opt.hook_tolerance)) {
        std::ostringstream os;
        os << "verification residual " << out.hook_residual << " at s = " << s << " exceeds " << opt.hook_tolerance;
        throw ConvergenceError(os.str());
    }
    return out;
}

PressureDensity solve_p(cplx s, const cheb::ChordFunction& w_hat, const FlowParams& params, const SolveOptions& opt) {
    if (!w_hat.grid) throw ConfigError("downwash has no grid");
    return solve_with(build_N(s, w_hat.grid, params, opt.build), w_hat, params, opt);
}

}  // namespace possio::fredholm
