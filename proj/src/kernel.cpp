#include "possio/kernel.hpp"

#include "possio/errors.hpp"
#include "possio/quadrature.hpp"
#include "possio/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace possio::kernel {

namespace {

using std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

void require_positive_real_part(cplx s) {
    if (!(s.real() > 0.0)) {
        throw ConvergenceError("semi-infinite doublet integrals need Re s > 0 (got Re s = " +
                               std::to_string(s.real()) + ")");
    }
}

/// Decay rate and oscillation frequency of e^{lambda v} H0(kappa v) along v > 0.
std::pair<double, double> ray_scales(cplx lambda, cplx kappa) {
    const cplx rate = lambda + kI * kappa;  // H0(kappa v) ~ e^{i kappa v}
    return {-rate.real(), std::abs(rate.imag())};
}

quad::RayOptions ray_options(double decay, double omega, const TailOptions& opt) {
    quad::RayOptions r;
    const double length = 1.0 / decay;
    r.panel_length = omega > 0.0 ? std::min(length, 8.0 / omega) : length;
    r.rel_tol = opt.rel_tol;
    r.max_panels = opt.max_panels;
    return r;
}

/// Integral over [0, d] of an integrand with a logarithmic singularity at 0,
/// signed so that d < 0 integrates from 0 down to d.
template <class F>
cplx from_origin(double d, F&& f) {
    const cplx v = quad::graded(0.0, d, f, 18, 0.15, 10);
    return d < 0.0 ? -v : v;
}

}  // namespace

cplx cauchy_coefficient(const FlowParams& params) {
    return 2.0 * kI * params.beta2() / (pi * params.U);
}

cplx stated_cauchy_coefficient(const FlowParams& params) {
    return -2.0 * kI * std::pow(params.beta2(), 1.5) / (pi * params.U);
}

void check_kernel_arguments(double x, double xi, cplx s) {
    require_positive_real_part(s);
    if (!(std::abs(x) <= 1.0) || !(std::abs(xi) <= 1.0)) {
        throw DomainError("kernel coordinates must lie on the chord [-1, 1]");
    }
    if (x == xi) throw DomainError("kernel is not defined on the diagonal x = xi");
    if (std::abs(x - xi) < kMinSeparation) {
        throw DomainError("|x - xi| below the minimum separation " + std::to_string(kMinSeparation));
    }
}

KernelContext::KernelContext(cplx s, const FlowParams& params, const TailOptions& opt)
    : params_(params), s_(s) {
    require_positive_real_part(s);
    lambda_ = lambda_of(s, params);
    const double b2 = params.beta2();
    kappa_ = kI * s / (params.a * b2);
    coeff_ = cauchy_coefficient(params);
    tail_coef_ = (lambda_ * lambda_ * b2 - s * s / (params.a * params.a * b2)) / params.U;

    const auto [decay, omega] = ray_scales(lambda_, kappa_);
    const quad::RayOptions ro = ray_options(decay, omega, opt);
    const double len = 1.0 / decay;
    const double breaks[] = {1e-6 * len, 1e-3 * len, 0.1 * len};
    const cplx lam = lambda_, kap = kappa_;
    const auto res = quad::integrate_ray(
        [lam, kap](double v) { return std::exp(lam * v) * specfun::hankel1_0(kap * v); }, breaks, ro);
    tail0_ = res.value;
    truncation_ = res.truncation;
}

cplx KernelContext::tail(double d) const {
    const cplx lam = lambda_, kap = kappa_;
    return tail0_ + from_origin(d, [lam, kap](double w) {
               return std::exp(-lam * w) * specfun::hankel1_0(kap * std::abs(w));
           });
}

KernelContext::Terms KernelContext::terms(double d, cplx tail_value) const {
    const double b2 = params_.beta2();
    const double sgn = d > 0.0 ? 1.0 : -1.0;
    const auto h = specfun::hankel01(kappa_ * std::abs(d));
    Terms t;
    t.first_regular = -b2 / params_.U * kappa_ * sgn * h.h1_regular;
    t.second = lambda_ * b2 / params_.U * h.h0;
    t.third = tail_coef_ * std::exp(lambda_ * d) * tail_value;
    return t;
}

cplx KernelContext::regular(double d) const {
    if (d == 0.0) throw DomainError("regular kernel part evaluated at d = 0");
    const Terms t = terms(d, tail(d));
    return t.first_regular + t.second + t.third;
}

cplx KernelContext::full(double d) const {
    if (d == 0.0) throw DomainError("kernel is not defined on the diagonal x = xi");
    return coeff_ / d + regular(d);
}

std::vector<cplx> KernelContext::regular_sweep(std::span<const double> d) const {
    const std::size_t m = d.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(d[a]) < std::abs(d[b]);
    });
    const cplx lam = lambda_, kap = kappa_;
    auto integrand = [lam, kap](double w) { return std::exp(-lam * w) * specfun::hankel1_0(kap * std::abs(w)); };
    const double hmax = std::min(0.05, 0.5 / (std::abs(lambda_) + std::abs(kappa_) + 1e-300));
    const quad::Rule& rule = quad::gauss_legendre(8);

    std::vector<cplx> out(m);
    // running integral from 0 on each side
    double last[2] = {0.0, 0.0};
    cplx acc[2] = {0.0, 0.0};
    for (std::size_t idx : order) {
        const double di = d[idx];
        if (di == 0.0) throw DomainError("regular kernel part evaluated at d = 0");
        const int side = di > 0.0 ? 1 : 0;
        if (last[side] == 0.0 || std::abs(last[side]) < 0.25 * std::abs(di)) {
            // the logarithm at w = 0 still dominates: restart from the origin
            acc[side] = from_origin(di, integrand);
        } else if (di != last[side]) {
            const double a = last[side];
            const std::size_t pieces =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(di - a) / hmax)));
            const double step = (di - a) / static_cast<double>(pieces);
            for (std::size_t p = 0; p < pieces; ++p) {
                const double lo = a + step * static_cast<double>(p);
                acc[side] += quad::fixed(rule, lo, p + 1 == pieces ? di : lo + step, integrand);
            }
        }
        last[side] = di;
        const Terms t = terms(di, tail0_ + acc[side]);
        out[idx] = t.first_regular + t.second + t.third;
    }
    return out;
}

cplx doublet_psi(double x, double y, double xi, cplx s, const FlowParams& params) {
    if (x == xi && y == 0.0) throw DomainError("doublet evaluated at its own center");
    if (y == 0.0) return 0.0;
    const double b2 = params.beta2();
    const double w = x - xi;
    const double rho = std::sqrt(w * w / b2 + y * y);
    const cplx kp = kI * s / (params.a * std::sqrt(b2));
    return specfun::hankel1_1(kp * rho) * kp * y / rho;
}

quad::RayOptions upstream_ray_options(cplx s, const FlowParams& params, const TailOptions& opt) {
    require_positive_real_part(s);
    const double b2 = params.beta2();
    const cplx kp = kI * s / (params.a * std::sqrt(b2));
    const auto [decay, omega] = ray_scales(lambda_of(s, params), kp / std::sqrt(b2));
    return ray_options(decay, omega, opt);
}

cplx doublet_potential(double x, double y, double xi, cplx s, const FlowParams& params,
                       const TailOptions& opt) {
    require_positive_real_part(s);
    const double d = x - xi;
    if (y == 0.0) {
        if (d < 0.0) return 0.0;  // the integrand vanishes identically on the ray
        throw DomainError("doublet potential on y = 0 downstream of the doublet is a one-sided limit");
    }
    const cplx lam = lambda_of(s, params);
    auto psi = [&](double w) { return doublet_psi(xi + w, y, xi, s, params); };

    const double b2 = params.beta2();
    const double width = std::abs(y) * std::sqrt(b2);
    const cplx kp = kI * s / (params.a * std::sqrt(b2));
    const auto [decay, omega] = ray_scales(lam, kp / std::sqrt(b2));
    const quad::RayOptions ro = ray_options(decay, omega, opt);
    std::vector<double> breaks;
    for (double f = 0.25; f * width < 1.0 / decay && breaks.size() < 40; f *= 4.0) breaks.push_back(f * width);
    breaks.push_back(0.1 / decay);
    const cplx upstream =
        quad::integrate_ray([&](double v) { return std::exp(lam * v) * psi(-v); }, breaks, ro).value;

    cplx local = 0.0;
    if (d != 0.0) {
        // [0, d] split at multiples of the doublet width
        std::vector<double> cuts{0.0};
        for (double f = 0.25; f * width < std::abs(d); f *= 4.0) cuts.push_back(f * width);
        cuts.push_back(std::abs(d));
        const double sgn = d > 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            local += sgn * quad::adaptive([&](double w) { return std::exp(-lam * sgn * w) * psi(sgn * w); },
                                          cuts[i], cuts[i + 1], 1e-300, 0.1 * opt.rel_tol)
                               .value;
        }
    }
    return std::exp(lam * d) / params.U * (upstream + local);
}

cplx possio_kernel_full(double x, double xi, cplx s, const FlowParams& params) {
    check_kernel_arguments(x, xi, s);
    return KernelContext(s, params).full(x - xi);
}

KernelEval kernel_split(double x, double xi, cplx s, const FlowParams& params) {
    check_kernel_arguments(x, xi, s);
    const KernelContext ctx(s, params);
    KernelEval e;
    e.x = x;
    e.xi = xi;
    e.s = s;
    e.singular_coeff = ctx.singular_coeff();
    e.regular = ctx.regular(x - xi);
    e.full = e.singular_coeff / (x - xi) + e.regular;
    e.z = ctx.kappa() * std::abs(x - xi);
    return e;
}

LogFit fit_log(double x, cplx s, const FlowParams& params, double d_min, double d_max, std::size_t samples) {
    if (samples < 3 || !(d_min > 0.0) || !(d_max > d_min)) throw ConfigError("invalid log-fit window");
    const KernelContext ctx(s, params);
    std::vector<double> d(samples), l(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        d[i] = d_min * std::pow(d_max / d_min, t);
        l[i] = std::log(d[i]);
        check_kernel_arguments(x, x - d[i], s);
    }
    const std::vector<cplx> reg = ctx.regular_sweep(d);
    // normal equations for the real basis {log d, 1}
    double sll = 0.0, sl = 0.0;
    cplx syl = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        sll += l[i] * l[i];
        sl += l[i];
        syl += reg[i] * l[i];
        sy += reg[i];
    }
    const double n = static_cast<double>(samples);
    const double det = sll * n - sl * sl;
    LogFit fit;
    fit.A = (syl * n - sy * sl) / det;
    fit.B = (sll * sy - sl * syl) / det;
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) worst = std::max(worst, std::abs(reg[i] - fit.A * l[i] - fit.B));
    fit.residual = worst / (std::abs(fit.A) + std::abs(fit.B));
    return fit;
}

cplx reduced_wave_residual(double x, double y, double xi, cplx s, const FlowParams& params, double h) {
    const double b2 = params.beta2();
    const cplx kp = kI * s / (params.a * std::sqrt(b2));
    auto P = [&](double u, double v) {
        return specfun::hankel1_0(kp * std::sqrt((u - xi) * (u - xi) / b2 + v * v));
    };
    const cplx c = P(x, y);
    const cplx pxx = (P(x + h, y) - 2.0 * c + P(x - h, y)) / (h * h);
    const cplx pyy = (P(x, y + h) - 2.0 * c + P(x, y - h)) / (h * h);
    const double a2 = params.a * params.a;
    return a2 * b2 * pxx + a2 * pyy - s * s / b2 * c;
}

cplx doublet_equation_residual(double x, double y, double t, double xi, cplx s, const FlowParams& params,
                               double h) {
    auto q = [&](double u, double v, double tau) {
        return doublet_psi(u, v, xi, s, params) * std::exp(s * (tau + params.c * u));
    };
    const double k = h / params.a;
    const cplx c = q(x, y, t);
    const cplx qxx = (q(x + h, y, t) - 2.0 * c + q(x - h, y, t)) / (h * h);
    const cplx qyy = (q(x, y + h, t) - 2.0 * c + q(x, y - h, t)) / (h * h);
    const cplx qtt = (q(x, y, t + k) - 2.0 * c + q(x, y, t - k)) / (k * k);
    const cplx qxt = (q(x + h, y, t + k) - q(x + h, y, t - k) - q(x - h, y, t + k) + q(x - h, y, t - k)) /
                     (4.0 * h * k);
    const double a = params.a, M = params.M;
    return a * a * params.beta2() * qxx + a * a * qyy - qtt - 2.0 * M * a * qxt;
}

}  // namespace possio::kernel
