#include "doctest.h"

#include "possio/errors.hpp"
#include "possio/field.hpp"
#include "possio/kernel.hpp"

#include <cmath>
#include <map>
#include <numbers>

using namespace possio;
using namespace possio::field;
using std::numbers::pi;

namespace {

constexpr cplx kI{0.0, 1.0};

const FlowParams& benchmark_params() {
    static const FlowParams p = derive_params(340.0, 0.5);
    return p;
}

laplace::DownwashSpec unit_harmonic(const cheb::GridPtr& g, double k) {
    return laplace::harmonic_downwash({g, cheb::CVec(g->n(), 1.0), cheb::EndpointClass::bounded}, k);
}

const SolutionFamily& benchmark(std::size_t n) {
    static std::map<std::size_t, SolutionFamily> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        const auto g = cheb::make_grid(n);
        it = cache.emplace(n, harmonic_family(unit_harmonic(g, 0.5), benchmark_params(), g)).first;
    }
    return it->second;
}

SolutionFamily synthetic(cplx s, std::vector<cplx> coeffs) {
    return synthetic_family(FamilyKind::harmonic, benchmark_params(), cheb::make_grid(32), {s}, {std::move(coeffs)});
}

}  // namespace

TEST_CASE("zero density gives a zero field") {
    const auto fam = synthetic(cplx(0.1, 0.5), {0.0});
    CHECK(evaluate_phi(0.3, 0.4, 1.0, fam).phi == cplx(0.0));
    CHECK(evaluate_psi(0.3, 0.4, 1.0, fam).psi == cplx(0.0));
    const double ts[1] = {1.0};
    const auto loads = compute_loads(fam, ts);
    CHECK(loads[0].lift == cplx(0.0));
    CHECK(loads[0].moment == cplx(0.0));

    const auto g = fam.grid;
    const auto zero_w = laplace::harmonic_downwash(cheb::zero_function(g), 0.0);
    const double xs[2] = {-0.5, 0.5};
    const auto rep = flow_tangency_residual(fam, zero_w, xs, ts);
    CHECK(rep.relative_residual == 0.0);
}

TEST_CASE("potential against direct doublet quadrature") {
    const cplx s(0.5, 1.0);
    const std::vector<cplx> coeffs{1.0, 0.3, cplx(-0.2, 0.1)};
    const auto fam = synthetic(s, coeffs);
    const FlowParams& p = benchmark_params();
    for (const Probe pr : {Probe{0.2, 0.3}, Probe{1.5, -0.4}, Probe{-1.3, 0.2}}) {
        // theta panels split at the projection of the probe
        std::vector<double> br{0.0, pi};
        if (std::abs(pr.x) < 1.0) br.insert(br.begin() + 1, std::acos(pr.x));
        const quad::Rule& rule = quad::gauss_legendre(24);
        cplx direct = 0.0;
        for (std::size_t b = 0; b + 1 < br.size(); ++b) {
            for (int piece = 0; piece < 4; ++piece) {
                const double lo = br[b] + (br[b + 1] - br[b]) * piece / 4.0;
                const double hi = br[b] + (br[b + 1] - br[b]) * (piece + 1) / 4.0;
                direct += quad::fixed(rule, lo, hi, [&](double th) {
                    const double xi = std::cos(th);
                    return cheb::clenshaw(coeffs, xi) * kernel::doublet_potential(pr.x, pr.y, xi, s, p);
                });
            }
        }
        direct *= std::exp(s * p.c * pr.x);
        const auto tv = transformed(fam, 0, {&pr, 1});
        CHECK(std::abs(tv[0].phi - direct) < 1e-7 * std::abs(direct));
    }
}

TEST_CASE("y-derivative of the potential") {
    const auto fam = synthetic(cplx(0.3, 2.0), {1.0, cplx(0.0, 0.5), 0.25});
    for (const Probe pr : {Probe{0.1, 0.2}, Probe{0.7, 0.05}, Probe{2.0, 0.5}}) {
        const double h = 1e-4;
        const Probe stencil[3] = {{pr.x, pr.y - h}, pr, {pr.x, pr.y + h}};
        const auto v = transformed(fam, 0, stencil);
        const cplx fd = (v[2].phi - v[0].phi) / (2.0 * h);
        CHECK(std::abs(v[1].phi_y - fd) < 1e-6 * std::abs(v[1].phi_y));
    }
}

TEST_CASE("linearity") {
    const cplx s(0.4, 1.5);
    const auto a = synthetic(s, {1.0, 0.5});
    const auto b = synthetic(s, {cplx(0.0, 1.0), 0.0, -0.3});
    const auto sum = add(a, b);
    const Probe pr{0.25, 0.3};
    const auto va = transformed(a, 0, {&pr, 1})[0], vb = transformed(b, 0, {&pr, 1})[0],
               vs = transformed(sum, 0, {&pr, 1})[0];
    CHECK(std::abs(vs.phi - va.phi - vb.phi) < 1e-10 * std::abs(vs.phi));
    CHECK(std::abs(vs.psi - va.psi - vb.psi) < 1e-10 * std::abs(vs.psi));
    CHECK_THROWS_AS(add(a, synthetic(cplx(0.5, 1.5), {1.0})), ConfigError);
}

TEST_CASE("acceleration potential") {
    const auto& fam = benchmark(64);
    // every doublet vanishes on y = 0 off the chord
    for (double x : {-3.0, -1.05, 1.05, 2.0})
        CHECK(evaluate_psi(x, 0.0, 1.0, fam).psi == cplx(0.0));
    const double ts[3] = {0.0, 1.0, 2.0};
    const KuttaReport k = kutta_check(fam, ts);
    CHECK(k.chord_scale > 0.0);
    CHECK(k.max_off_chord < 1e-10 * k.chord_scale);

    // one-sided limit on the chord
    const cplx lim = psi_on_chord(fam, 0.2, 1.0);
    CHECK(std::abs(evaluate_psi(0.2, 1e-4, 1.0, fam).psi - lim) < 1e-5 * std::abs(lim));

    // psi = phi_t + U phi_x
    const double x = 0.3, y = 0.4, t = 1.0, h = 1e-3;
    auto phi = [&](double xx, double tt) { return evaluate_phi(xx, y, tt, fam).phi; };
    const cplx fd = (phi(x, t + h) - phi(x, t - h)) / (2 * h) +
                    fam.params.U * (phi(x + h, t) - phi(x - h, t)) / (2 * h);
    const cplx psi = evaluate_psi(x, y, t, fam).psi;
    CHECK(std::abs(psi - fd) < 1e-3 * std::abs(psi));

    CHECK_THROWS_AS(evaluate_psi(0.2, 0.0, 1.0, fam), DomainError);
    CHECK_THROWS_AS(evaluate_phi(1.5, 0.0, 1.0, fam), DomainError);
}

TEST_CASE("far field decays") {
    const auto& fam = benchmark(64);
    const double ratio = std::abs(evaluate_phi(0.0, 10.0, 1.0, fam).phi) / std::abs(evaluate_phi(0.0, 0.5, 1.0, fam).phi);
    MESSAGE("far-field ratio " << ratio);
    CHECK(ratio < 0.1);
}

TEST_CASE("flow tangency on the harmonic benchmark") {
    const double xs[7] = {-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9};
    const double ts[2] = {0.0, 1.0};
    const auto r64 = flow_tangency_residual(benchmark(64), unit_harmonic(benchmark(64).grid, 0.5), xs, ts);
    const auto r128 = flow_tangency_residual(benchmark(128), unit_harmonic(benchmark(128).grid, 0.5), xs, ts);
    MESSAGE("residual n=64 " << r64.relative_residual << ", n=128 " << r128.relative_residual);
    CHECK(r128.relative_residual < 1e-2);
    CHECK(r128.relative_residual <= r64.relative_residual * (1.0 + 1e-6));
    for (const auto& p : r128.probes) CHECK(!p.flagged);
    CHECK(r128.probes.size() == 14);
    CHECK(r128.probes[0].dphi_dy.size() == 3);
    CHECK_THROWS_AS(flow_tangency_residual(benchmark(64), unit_harmonic(benchmark(64).grid, 0.5),
                                           std::vector<double>{1.2}, ts),
                    DomainError);
}

TEST_CASE("convected wave equation residual") {
    const auto r = pde_residual(benchmark(64), 0.5, 0.8, 1.0, {0.02, 0.01});
    MESSAGE("family residuals " << r.residual[0] << " -> " << r.residual[1]);
    CHECK(r.decay_ratio >= 3.0);
    const auto d = doublet_pde_residual(0.1, cplx(0.1, 0.5), benchmark_params(), 0.3, 0.7, 0.5, {0.02, 0.01});
    CHECK(d.decay_ratio >= 3.0);
    const auto z = pde_residual(synthetic(cplx(0.1, 0.5), {0.0}), 0.5, 0.8, 1.0, {0.02, 0.01});
    CHECK(z.residual[0] == 0.0);
}

TEST_CASE("loads") {
    const cplx s(0.2, 1.0);
    // even cofactor: T0 and T2 only
    const auto even = synthetic(s, {1.0, 0.0, 0.5});
    const auto [lift, moment] = transformed_loads(even, 0);
    CHECK(std::abs(lift - pi) < 1e-13);
    CHECK(std::abs(moment) < 1e-14);

    const std::vector<cplx> c{0.3, cplx(1.0, -0.2), 0.1, 0.05, cplx(0.0, 0.02)};
    const auto fam = synthetic(s, c);
    const auto [l, m] = transformed_loads(fam, 0);
    // dense Gauss-Chebyshev oracle
    const std::size_t dense = 4 * 32;
    cplx ld = 0.0, md = 0.0;
    for (std::size_t k = 0; k < dense; ++k) {
        const double xi = std::cos((k + 0.5) * pi / dense);
        ld += pi / dense * cheb::clenshaw(c, xi);
        md += pi / dense * xi * cheb::clenshaw(c, xi);
    }
    CHECK(std::abs(l - ld) < 1e-8);
    CHECK(std::abs(m - md) < 1e-8);
    const double ts[1] = {2.0};
    CHECK(std::abs(compute_loads(fam, ts)[0].lift - std::exp(2.0 * s) * l) < 1e-12);
}

TEST_CASE("contour family") {
    const FlowParams p = derive_params(340.0, 0.5, 0.05, 2.0, 1.0);
    const auto g = cheb::make_grid(16);
    const double shape[1] = {1.0};
    const auto step = laplace::builtin_closure("decaying-exponential", 1.0, shape, 0.0, 1.0);
    const laplace::Contour c{1.0, 2.0, 0.5};
    fredholm::SolveOptions opt;
    const auto fam = contour_family(step, p, g, c, opt);
    CHECK(fam.mirrored);
    CHECK(fam.s.size() == 9);
    // the mirrored half matches a direct solve
    const auto direct = fredholm::solve_p(fam.s[1], laplace::laplace_transform(step, fam.s[1], g), p, opt);
    double scale = 0.0;
    for (const cplx& v : direct.p_coeffs) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < direct.p_coeffs.size(); ++k)
        CHECK(std::abs(direct.p_coeffs[k] - fam.p_coeffs[1][k]) < 1e-10 * scale);
    // the Tricomi inverse carries no lift
    CHECK(std::abs(transformed_loads(fam, 4).first) < 1e-12 * scale);

    SolutionFamily loose = fam;
    loose.enforce_gate = false;
    const Probe pr{0.3, 0.4};
    const double ts[2] = {0.5, 1.0};
    for (const auto& f : evaluate(loose, {&pr, 1}, ts)) {
        CHECK(std::abs(f.phi.imag()) < 1e-8 * std::abs(f.phi));
        CHECK(std::abs(f.psi.imag()) < 1e-8 * std::abs(f.psi));
    }
    // conjugated field values agree with evaluating the mirrored densities
    SolutionFamily unmirrored = fam;
    unmirrored.mirrored = false;
    const auto vm = transformed(fam, 1, {&pr, 1})[0], vu = transformed(unmirrored, 1, {&pr, 1})[0];
    CHECK(std::abs(vm.phi - vu.phi) < 1e-10 * std::abs(vu.phi));
    CHECK(std::abs(vm.psi - vu.psi) < 1e-10 * std::abs(vu.psi));

    // a nine-point contour cannot pass the self-convergence gate
    CHECK_THROWS_AS(evaluate(fam, {&pr, 1}, ts), ConvergenceError);

    const laplace::Contour outside{2.5, 2.0, 0.5};
    CHECK_THROWS_AS(contour_family(step, p, g, outside, opt), DomainError);
}
