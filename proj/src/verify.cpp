#include "possio/verify.hpp"

#include "possio/cheb.hpp"
#include "possio/errors.hpp"
#include "possio/field.hpp"
#include "possio/fredholm.hpp"
#include "possio/kernel.hpp"
#include "possio/laplace.hpp"
#include "possio/specfun.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace possio::verify {

namespace {

using std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

class Recorder {
public:
    explicit Recorder(std::string suite) { result_.suite = std::move(suite); }

    void check(std::string name, double value, double tol, Compare cmp = Compare::less, bool advisory = false,
               std::string detail = {}) {
        CheckResult c;
        c.suite = result_.suite;
        c.name = std::move(name);
        c.value = value;
        c.tolerance = tol;
        c.compare = cmp;
        c.advisory = advisory;
        c.detail = std::move(detail);
        switch (cmp) {
            case Compare::less: c.passed = value < tol; break;
            case Compare::greater_equal: c.passed = value >= tol; break;
            case Compare::equal: c.passed = value == tol; break;
        }
        result_.checks.push_back(std::move(c));
    }

    SuiteResult take() { return std::move(result_); }

private:
    SuiteResult result_;
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

void specfun_suite(Recorder& r) {
    const std::vector<cplx> zs{0.1, 1.0, 2.5, 4.0, 10.0, 50.0, cplx(1, 1), cplx(0.5, 3), cplx(-2, 1), cplx(5, 5),
                               cplx(-8, 0.5), cplx(0.2, 12)};
    double wr = 0.0, ode = 0.0;
    for (cplx z : zs) {
        const auto e = specfun::bessel_eval(z);
        const double scale = std::abs(e.j1 * e.y0) + std::abs(e.j0 * e.y1);
        wr = std::max(wr, std::abs(e.j1 * e.y0 - e.j0 * e.y1 - 2.0 / (pi * z)) / scale);
        // fourth-order differences of H0 against z^2 f'' + z f' + z^2 f
        const double h = std::min(1e-3 * std::abs(z), 1e-2);
        auto f = [&](double k) { return specfun::hankel1_0(z + k * h); };
        const cplx d1 = (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h);
        const cplx d2 = (-f(-2) + 16.0 * f(-1) - 30.0 * f(0) + 16.0 * f(1) - f(2)) / (12.0 * h * h);
        const cplx res = z * z * d2 + z * d1 + z * z * f(0);
        ode = std::max(ode, std::abs(res) / (std::abs(z * z * f(0)) + std::abs(z * d1)));
    }
    r.check("wronskian_relative_error", wr, 1e-9);
    r.check("bessel_ode_residual", ode, 1e-8);
    double branch = 0.0;
    for (double m : {3.0, 4.5, 6.0})
        for (double a : {0.1, 0.8, 1.6, 2.5}) {
            const cplx z = std::polar(m, a);
            const auto s = specfun::hankel01(z, specfun::Branch::series);
            const auto l = specfun::hankel01(z, specfun::Branch::large_argument);
            branch = std::max({branch, rel(l.h0, s.h0), rel(l.h1, s.h1)});
        }
    r.check("branch_agreement", branch, 1e-10);
    r.check("h1_pole_removed", std::abs(specfun::hankel1_1_regular(cplx(1e-8, 0))), 1e-7);
}

void hilbert_suite(Recorder& r) {
    const auto g = cheb::make_grid(128);
    std::mt19937 rng(20240611);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        cheb::CVec c(65);
        for (auto& v : c) v = cplx(nd(rng), nd(rng));
        cheb::ChordFunction f{g, cheb::CVec(128), cheb::EndpointClass::bounded};
        for (std::size_t j = 0; j < 128; ++j) f.values[j] = cheb::clenshaw(c, g->nodes()[j]);
        const auto back = cheb::finite_hilbert(cheb::inverse_finite_hilbert(f));
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < 128; ++j) {
            num = std::max(num, std::abs(back.values[j] - f.values[j]));
            den = std::max(den, std::abs(f.values[j]));
        }
        worst = std::max(worst, num / den);
    }
    r.check("T_of_Tinv_random_degree64", worst, 1e-8);

    const auto g64 = cheb::make_grid(64);
    double pair1 = 0.0, pair2 = 0.0;
    for (std::size_t k = 1; k <= 20; ++k) {
        cheb::ChordFunction a{g64, cheb::CVec(64), cheb::EndpointClass::inverse_sqrt_singular};
        cheb::ChordFunction b{g64, cheb::CVec(64), cheb::EndpointClass::bounded};
        for (std::size_t j = 0; j < 64; ++j) {
            const double th = g64->theta()[j];
            a.values[j] = std::cos(k * th);
            b.values[j] = std::sin(k * th);  // sqrt(1-x^2) U_{k-1}
        }
        const auto ta = cheb::finite_hilbert(a), tb = cheb::finite_hilbert(b);
        for (std::size_t j = 0; j < 64; ++j) {
            const double th = g64->theta()[j];
            pair1 = std::max(pair1, std::abs(ta.values[j] - std::sin(k * th) / std::sin(th)));
            pair2 = std::max(pair2, std::abs(tb.values[j] + std::cos(k * th)));
        }
    }
    r.check("pair_T_k_over_sqrt", pair1, 1e-10);
    r.check("pair_sqrt_U_km1", pair2, 1e-10);
    cheb::ChordFunction null{g64, cheb::CVec(64, 1.0), cheb::EndpointClass::inverse_sqrt_singular};
    double nul = 0.0;
    for (const cplx& v : cheb::finite_hilbert(null).values) nul = std::max(nul, std::abs(v));
    r.check("null_direction", nul, 1e-12);
}

void kernel_suite(Recorder& r, const FlowParams& base) {
    double worst = 0.0, stated = 0.0;
    for (double M : {0.1, 0.5, 0.8}) {
        const FlowParams p = derive_params(base.a, M);
        for (cplx s : {cplx(1, 1), cplx(2, 4)}) {
            auto g = [&](double h) { return h * kernel::possio_kernel_full(0.1, 0.1 - h, s, p); };
            const cplx rr = (8.0 * g(2.5e-3) - 6.0 * g(5e-3) + g(1e-2)) / 3.0;
            worst = std::max(worst, rel(rr, kernel::cauchy_coefficient(p)));
            stated = std::max(stated, rel(rr, kernel::stated_cauchy_coefficient(p)));
        }
    }
    r.check("cauchy_coefficient_measured", worst, 1e-3, Compare::less, false,
            "against 2i(1-M^2)/(pi U)");
    r.check("cauchy_coefficient_stated_form", stated, 1e-3, Compare::less, true,
            "against -2i(1-M^2)^{3/2}/(pi U); differs by the factor -1/sqrt(1-M^2)");
    const auto fit = kernel::fit_log(0.0, cplx(1, 1), base);
    r.check("log_fit_residual", fit.residual, 1e-3);
    const cplx s(1.0, 1.0);
    const double r1 = std::abs(kernel::reduced_wave_residual(0.3, 0.7, 0.0, s, base, 0.02));
    const double r2 = std::abs(kernel::reduced_wave_residual(0.3, 0.7, 0.0, s, base, 0.01));
    r.check("reduced_wave_decay", r1 / r2, 3.0, Compare::greater_equal);
    const double d1 = std::abs(kernel::doublet_equation_residual(0.3, 0.7, 0.5, 0.0, s, base, 0.02));
    const double d2 = std::abs(kernel::doublet_equation_residual(0.3, 0.7, 0.5, 0.0, s, base, 0.01));
    r.check("doublet_equation_decay", d1 / d2, 3.0, Compare::greater_equal);
    const cplx k1 = kernel::possio_kernel_full(0.3, -0.4, s, base);
    const cplx k2 = kernel::possio_kernel_full(0.3, -0.4, std::conj(s), base);
    r.check("kernel_schwarz_symmetry", std::abs(k2 + std::conj(k1)) / std::abs(k1), 1e-12);
}

void fredholm_suite(Recorder& r, const FlowParams& p, std::size_t n) {
    const auto g = cheb::make_grid(n);
    fredholm::BuildOptions zero;
    zero.zero_kernel = true;
    const auto dz = fredholm::determinant(fredholm::build_N(cplx(1, 1), g, p, zero));
    r.check("zero_operator_determinant_error", std::abs(dz.value - 1.0), 0.0, Compare::equal);
    r.check("zero_operator_delta1", std::abs(dz.delta[1]), 0.0, Compare::equal);

    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    const auto g32 = cheb::make_grid(32);
    fredholm::Matrix m(32, 32);
    for (Eigen::Index i = 0; i < 32; ++i)
        for (Eigen::Index j = 0; j < 32; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    m *= 0.45 / fredholm::hilbert_schmidt_norm(m, g32->quad_weights());
    const auto dr = fredholm::determinant(fredholm::from_matrix(0.0, g32, m), 8);
    r.check("series_vs_matrix", std::abs(dr.series_value - dr.value) / std::abs(dr.value), 1e-6);
    r.check("random_delta1", std::abs(dr.delta[1]), 0.0, Compare::equal);

    double bounds_fail = 0.0, ident = 0.0, inverse = 0.0, minor = 0.0;
    std::vector<double> lx, ly;
    for (double mod : {1.0, 2.0, 4.0, 8.0}) {
        const cplx s(0.5, std::sqrt(mod * mod - 0.25));
        const auto op = fredholm::build_N(s, g, p);
        const auto d = fredholm::determinant(op);
        if (!d.delta_bounds_hold || !d.modulus_bound_holds) bounds_fail += 1.0;
        const auto res = fredholm::resolvent(op);
        ident = std::max(ident, res.identity_residual);
        inverse = std::max(inverse, res.inverse_residual);
        minor = std::max(minor, res.minor_bound_ratio);
        lx.push_back(std::log(mod));
        ly.push_back(std::log(op.hs_norm));
    }
    r.check("determinant_bound_violations", bounds_fail, 0.0, Compare::equal);
    r.check("resolvent_identity_residual", ident, 1e-8);
    r.check("resolvent_inverse_residual", inverse, 1e-8);
    r.check("resolvent_minor_bound_ratio", minor, 1.0 + 1e-12, Compare::less, true);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) sx += lx[i], sy += ly[i], sxx += lx[i] * lx[i], sxy += lx[i] * ly[i];
    r.check("hs_growth_exponent", (k * sxy - sx * sy) / (k * sxx - sx * sx), 2.3, Compare::less);

    cheb::ChordFunction one{g, cheb::CVec(n, 1.0), cheb::EndpointClass::bounded};
    const auto sol = fredholm::solve_p(cplx(p.sigma_prime, 2.0), one, p);
    r.check("solve_hook_residual", sol.hook_residual, 1e-6);
    r.check("solve_route_agreement", sol.route_agreement, 1e-8);
    r.check("solve_lp_norm_finite", std::isfinite(sol.lp_norm) ? 0.0 : 1.0, 0.0, Compare::equal);
    const cplx s(0.7, 1.3);
    const cplx a = fredholm::determinant(fredholm::build_N(s, g, p)).value;
    const cplx b = fredholm::determinant(fredholm::build_N(std::conj(s), g, p)).value;
    r.check("determinant_conjugate_symmetry", std::abs(b - std::conj(a)) / std::abs(a), 1e-10);
}

void laplace_suite(Recorder& r) {
    auto F = [](cplx s) { return 1.0 / (s + 1.0); };
    const double exact = std::exp(-1.0);
    const auto b1 = laplace::bromwich_invert(F, {1.0, 1e5, 0.05}, 1.0, laplace::kGateTolerance, false);
    const auto b15 = laplace::bromwich_invert(F, {1.5, 1e5, 0.05}, 1.0, laplace::kGateTolerance, false);
    r.check("bromwich_pair_sigma_1", std::abs(b1.value - exact) / exact, 1e-4);
    r.check("bromwich_pair_sigma_1.5", std::abs(b15.value - exact) / exact, 1e-4);
    r.check("bromwich_sigma_independence", std::abs(b1.value - b15.value) / exact, 1e-4);
    r.check("bromwich_gate", b1.rel_change, laplace::kGateTolerance);
    r.check("bromwich_real_part_only", std::abs(b1.value.imag()) / std::abs(b1.value), 1e-8);

    laplace::TimeSamples ts;
    ts.x = {0.0};
    for (int i = 0; i <= 3000; ++i) ts.t.push_back(0.01 * i);
    for (double t : ts.t) ts.w.push_back(std::exp(-t));
    const auto spec = laplace::samples_downwash(ts);
    const auto g = cheb::make_grid(8);
    double worst = 0.0, conj_err = 0.0;
    for (cplx s : {cplx(1.0, 0.0), cplx(0.5, 3.0), cplx(1.5, -20.0)}) {
        const cplx v = laplace::laplace_transform(spec, s, g).values[0];
        worst = std::max(worst, rel(v, 1.0 / (s + 1.0)));
        conj_err = std::max(conj_err, std::abs(laplace::laplace_transform(spec, std::conj(s), g).values[0] - std::conj(v)));
    }
    r.check("time_sample_transform", worst, 1e-6);
    r.check("time_sample_conjugate_symmetry", conj_err, 1e-14);
}

void field_suite(Recorder& r, const FlowParams& p, std::size_t n) {
    const auto g = cheb::make_grid(n);
    const auto spec = laplace::harmonic_downwash({g, cheb::CVec(n, 1.0), cheb::EndpointClass::bounded}, 0.5);
    const auto fam = field::harmonic_family(spec, p, g);
    const double xs[7] = {-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9};
    const double ts[2] = {0.0, 1.0};
    const auto tan = field::flow_tangency_residual(fam, spec, xs, ts);
    r.check("flow_tangency_relative_residual", tan.relative_residual, 1e-2);
    const auto k = field::kutta_check(fam, ts);
    r.check("kutta_ratio", k.ratio, 1e-10);
    const auto pde = field::pde_residual(fam, 0.5, 0.8, 1.0, {0.02, 0.01});
    r.check("pde_residual_decay", pde.decay_ratio, 3.0, Compare::greater_equal);
    const auto dpde = field::doublet_pde_residual(0.1, cplx(0.1, 0.5), p, 0.3, 0.7, 0.5, {0.02, 0.01});
    r.check("doublet_pde_residual_decay", dpde.decay_ratio, 3.0, Compare::greater_equal);
    const double x = 0.3, y = 0.4, t = 1.0, h = 1e-3;
    auto phi = [&](double xx, double tt) { return field::evaluate_phi(xx, y, tt, fam).phi; };
    const cplx fd = (phi(x, t + h) - phi(x, t - h)) / (2 * h) + p.U * (phi(x + h, t) - phi(x - h, t)) / (2 * h);
    const cplx psi = field::evaluate_psi(x, y, t, fam).psi;
    r.check("psi_definition_consistency", std::abs(psi - fd) / std::abs(psi), 1e-3);
    const double far = std::abs(field::evaluate_phi(0.0, 10.0, 1.0, fam).phi) /
                       std::abs(field::evaluate_phi(0.0, 0.5, 1.0, fam).phi);
    r.check("far_field_ratio", far, 0.1);
}

}  // namespace

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s{"specfun", "hilbert", "kernel", "fredholm", "laplace", "field"};
    return s;
}

std::vector<std::string> resolve_suites(const std::vector<std::string>& names) {
    std::vector<std::string> out;
    auto push = [&](const std::string& s) {
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const auto& n : names) {
        if (n == "all") {
            for (const auto& s : known_suites()) push(s);
        } else if (std::find(known_suites().begin(), known_suites().end(), n) != known_suites().end()) {
            push(n);
        } else {
            throw ConfigError("unknown verify suite '" + n +
                              "' (known: specfun, hilbert, kernel, fredholm, laplace, field, all)");
        }
    }
    if (out.empty()) throw ConfigError("no verify suites selected");
    return out;
}

SuiteResult run_suite(const std::string& name, const VerifyOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    Recorder r(name);
    if (name == "specfun") specfun_suite(r);
    else if (name == "hilbert") hilbert_suite(r);
    else if (name == "kernel") kernel_suite(r, opt.params);
    else if (name == "fredholm") fredholm_suite(r, opt.params, opt.n);
    else if (name == "laplace") laplace_suite(r);
    else if (name == "field") field_suite(r, opt.params, opt.n);
    else throw ConfigError("unknown verify suite '" + name + "'");
    SuiteResult res = r.take();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, const VerifyOptions& opt) {
    std::vector<SuiteResult> out;
    for (const auto& s : resolve_suites(names)) out.push_back(run_suite(s, opt));
    return out;
}

bool all_passed(const std::vector<SuiteResult>& results) {
    for (const auto& s : results)
        for (const auto& c : s.checks)
            if (!c.advisory && !c.passed) return false;
    return true;
}

}  // namespace possio::verify
