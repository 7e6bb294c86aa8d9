// Acceptance run: one pass/fail line per criterion. With --criterion N only
// that criterion runs. Exit status is 0 iff every selected criterion passed.

#include "app.hpp"
#include "oracles.hpp"

#include "possio/cheb.hpp"
#include "possio/field.hpp"
#include "possio/fredholm.hpp"
#include "possio/kernel.hpp"
#include "possio/laplace.hpp"
#include "possio/specfun.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace possio;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

constexpr cplx kI{0.0, 1.0};

/// Accumulates named measurements; the criterion passes when all do.
class Outcome {
public:
    void less(const std::string& name, double value, double tol) { add(name, value, "<", tol, value < tol); }
    void at_least(const std::string& name, double value, double tol) { add(name, value, ">=", tol, value >= tol); }
    void exact(const std::string& name, double value, double target) { add(name, value, "==", target, value == target); }
    void flag(const std::string& name, bool ok) {
        parts_.push_back(name + (ok ? " ok" : " VIOLATED"));
        pass_ = pass_ && ok;
    }
    void note(const std::string& text) { notes_.push_back(text); }

    bool passed() const { return pass_; }
    std::string summary() const {
        std::string s;
        for (const auto& p : parts_) s += (s.empty() ? "" : "; ") + p;
        return s;
    }
    const std::vector<std::string>& notes() const { return notes_; }

private:
    void add(const std::string& name, double value, const char* op, double tol, bool ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s %.3e %s %.3g%s", name.c_str(), value, op, tol, ok ? "" : " (fails)");
        parts_.emplace_back(buf);
        pass_ = pass_ && ok;
    }

    bool pass_ = true;
    std::vector<std::string> parts_;
    std::vector<std::string> notes_;
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, i / (n - 1.0)));
    return v;
}

void special_functions(Outcome& o) {
    double ode = 0.0;
    for (double arg : {0.0, pi / 4, pi / 2})
        for (double m : logspace(0.01, 100.0, 41)) {
            const cplx z = std::polar(m, arg);
            const auto h = specfun::hankel01(z);
            const cplx d1 = -h.h1;
            const cplx d2 = -(h.h0 - h.h1 / z);  // H1' from the order-one recurrence
            ode = std::max(ode, std::abs(d2 + d1 / z + h.h0) / (std::abs(h.h0) + std::abs(h.h1 / z)));
        }
    o.less("ODE residual", ode, 1e-8);
    double fd = 0.0;
    for (double arg : {0.0, pi / 4, pi / 2})
        for (double m : logspace(0.05, 100.0, 25)) {
            // independent of the recurrence: fourth-order differences of H0
            const cplx z = std::polar(m, arg);
            const double step = std::min(1e-2, 2e-3 * m);
            auto f = [&](int k) { return specfun::hankel1_0(z + double(k) * step); };
            const cplx d1 = (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * step);
            const cplx d2 = (-f(-2) + 16.0 * f(-1) - 30.0 * f(0) + 16.0 * f(1) - f(2)) / (12.0 * step * step);
            fd = std::max(fd, std::abs(z * z * d2 + z * d1 + z * z * f(0)) /
                                  (std::abs(z * z * f(0)) + std::abs(z * d1)));
        }
    o.note("finite-difference ODE residual (no recurrence) " + sci(fd));
    double wr = 0.0;
    for (double x : logspace(0.1, 50.0, 60)) {
        const auto e = specfun::bessel_eval(x);
        const cplx w = e.j0 * (-e.y1) - (-e.j1) * e.y0;
        wr = std::max(wr, std::abs(w - 2.0 / (pi * x)) / (2.0 / (pi * x)));
    }
    o.less("Wronskian", wr, 1e-9);
    const auto r1 = oracle::hankel_series(1.0);
    const auto h1 = specfun::hankel01(cplx(1.0));
    o.less("H0(1)", rel(h1.h0, r1.h0), 1e-9);
    o.less("H1(1)", rel(h1.h1, r1.h1), 1e-9);
    const cplx hi_ref = 2.0 / (kI * pi) * oracle::bessel_k0(1.0);
    o.less("H0(i)", rel(specfun::hankel1_0(kI), hi_ref), 1e-9);
}

void transform_identities(Outcome& o) {
    const auto g = cheb::make_grid(128);
    std::mt19937 rng(12345);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        cheb::CVec c(65);
        for (auto& v : c) v = cplx(nd(rng), nd(rng));
        cheb::ChordFunction f{g, cheb::CVec(128), cheb::EndpointClass::bounded};
        double scale = 0.0;
        for (std::size_t j = 0; j < 128; ++j) {
            // direct Chebyshev sum, not the library's Clenshaw
            const double th = std::acos(g->nodes()[j]);
            for (std::size_t k = 0; k < c.size(); ++k) f.values[j] += c[k] * std::cos(k * th);
            scale = std::max(scale, std::abs(f.values[j]));
        }
        const auto back = cheb::finite_hilbert(cheb::inverse_finite_hilbert(f));
        for (std::size_t j = 0; j < 128; ++j) worst = std::max(worst, std::abs(back.values[j] - f.values[j]) / scale);
    }
    o.less("T(T^-1 f) - f", worst, 1e-8);
    // T[T_k / sqrt(1-x^2)] = U_{k-1}, T[sqrt(1-x^2) U_{k-1}] = -T_k
    const auto g64 = cheb::make_grid(64);
    double pair = 0.0;
    for (std::size_t k = 1; k <= 30; ++k) {
        cheb::ChordFunction a{g64, cheb::CVec(64), cheb::EndpointClass::inverse_sqrt_singular};
        cheb::ChordFunction b{g64, cheb::CVec(64), cheb::EndpointClass::bounded};
        for (std::size_t j = 0; j < 64; ++j) {
            const double x = g64->nodes()[j], th = std::acos(x);
            a.values[j] = std::cos(k * th);
            b.values[j] = std::sin(k * th);
        }
        const auto ta = cheb::finite_hilbert(a), tb = cheb::finite_hilbert(b);
        for (std::size_t j = 0; j < 64; ++j) {
            const double x = g64->nodes()[j], th = std::acos(x);
            pair = std::max(pair, std::abs(ta.values[j] - std::sin(k * th) / std::sqrt(1.0 - x * x)));
            pair = std::max(pair, std::abs(tb.values[j] + std::cos(k * th)));
        }
    }
    o.less("Chebyshev pairs", pair, 1e-10);
}

cplx richardson_coefficient(const FlowParams& p, cplx s) {
    auto g = [&](double h) { return h * kernel::possio_kernel_full(0.1, 0.1 - h, s, p); };
    return (8.0 * g(2.5e-3) - 6.0 * g(5e-3) + g(1e-2)) / 3.0;
}

void kernel_split(Outcome& o) {
    double stated = 0.0, measured = 0.0;
    for (double M : {0.1, 0.5, 0.8}) {
        const FlowParams p = derive_params(340.0, M);
        const cplx target = -2.0 * kI * std::pow(1.0 - M * M, 1.5) / (pi * p.U);
        const cplx alt = 2.0 * kI * (1.0 - M * M) / (pi * p.U);
        for (cplx s : {cplx(1, 1), cplx(2, 4)}) {
            const cplx r = richardson_coefficient(p, s);
            stated = std::max(stated, rel(r, target));
            measured = std::max(measured, rel(r, alt));
        }
    }
    o.less("vs -2i(1-M^2)^{3/2}/(pi U)", stated, 1e-3);
    o.note("the extrapolated coefficient matches 2i(1-M^2)/(pi U) to " + sci(measured) +
           " relative; the stated form differs by the factor -sqrt(1-M^2)");
    const auto fit = kernel::fit_log(0.0, cplx(1, 1), derive_params(340.0, 0.5));
    o.less("log-fit residual", fit.residual, 1e-3);
}

void pde_structure(Outcome& o) {
    const FlowParams p = derive_params(340.0, 0.5);
    const cplx s(1.0, 1.0);
    const double r1 = std::abs(kernel::reduced_wave_residual(0.3, 0.7, 0.0, s, p, 0.02));
    const double r2 = std::abs(kernel::reduced_wave_residual(0.3, 0.7, 0.0, s, p, 0.01));
    const double r3 = std::abs(kernel::reduced_wave_residual(0.3, 0.7, 0.0, s, p, 0.005));
    o.at_least("reduced-wave decay", std::min(r1 / r2, r2 / r3), 3.0);
    const double d1 = std::abs(kernel::doublet_equation_residual(0.3, 0.7, 0.5, 0.0, s, p, 0.02));
    const double d2 = std::abs(kernel::doublet_equation_residual(0.3, 0.7, 0.5, 0.0, s, p, 0.01));
    const double d3 = std::abs(kernel::doublet_equation_residual(0.3, 0.7, 0.5, 0.0, s, p, 0.005));
    o.at_least("doublet-equation decay", std::min(d1 / d2, d2 / d3), 3.0);
}

field::SolutionFamily benchmark_family(std::size_t n) {
    const auto g = cheb::make_grid(n);
    const auto spec = laplace::harmonic_downwash({g, cheb::CVec(n, 1.0), cheb::EndpointClass::bounded}, 0.5);
    return field::harmonic_family(spec, derive_params(340.0, 0.5), g);
}

void kutta(Outcome& o) {
    const auto fam = benchmark_family(64);
    const double ts[3] = {0.0, 0.5, 1.0};
    const auto k = field::kutta_check(fam, ts);
    o.less("max|psi| off chord / chord scale", k.ratio, 1e-10);
    o.note("chord scale " + sci(k.chord_scale));
}

void fredholm_layer(Outcome& o) {
    const FlowParams p = derive_params(340.0, 0.5);
    const auto g = cheb::make_grid(64);
    fredholm::BuildOptions zero;
    zero.zero_kernel = true;
    const auto dz = fredholm::determinant(fredholm::build_N(cplx(1, 1), g, p, zero));
    o.exact("zero-operator |D - 1|", std::abs(dz.value - 1.0), 0.0);
    bool delta1 = std::abs(dz.delta[1]) == 0.0;

    // independent determinant: LU of I + N times exp(-tr N)
    auto oracle_det2 = [](const fredholm::Matrix& n) {
        const Eigen::Index m = n.rows();
        const fredholm::Matrix a = fredholm::Matrix::Identity(m, m) + n;
        return a.partialPivLu().determinant() * std::exp(-n.trace());
    };
    double series = 0.0, matrix = 0.0, ident = 0.0, inverse = 0.0;
    bool bounds = true;
    std::vector<cplx> points{cplx(1, 1), cplx(0.5, 3), cplx(1.5, 8), cplx(0.2, 20), cplx(1.0, 45)};
    for (cplx s : points) {
        const auto op = fredholm::build_N(s, g, p);
        const auto d = fredholm::determinant(op, 10);
        delta1 = delta1 && std::abs(d.delta[1]) == 0.0;
        matrix = std::max(matrix, rel(d.value, oracle_det2(op.matrix)));
        if (op.hs_norm < 0.5) series = std::max(series, rel(d.series_value, d.value));
        for (std::size_t m = 1; m < d.delta.size(); ++m) {
            const double mm = static_cast<double>(m);
            bounds = bounds && std::abs(d.delta[m]) <= std::pow(std::exp(1.0) / mm, mm / 2) * std::pow(op.hs_norm, mm) * (1 + 1e-10);
        }
        bounds = bounds && std::abs(d.value) <= std::exp(0.5 * op.hs_norm * op.hs_norm) * (1 + 1e-10);
        const auto r = fredholm::resolvent(op);
        const Eigen::Index m = op.matrix.rows();
        const fredholm::Matrix I = fredholm::Matrix::Identity(m, m);
        const double nn = op.matrix.norm();
        ident = std::max({ident, (r.H + op.matrix * r.H - op.matrix).norm() / nn,
                          (r.H + r.H * op.matrix - op.matrix).norm() / nn});
        inverse = std::max(inverse, ((I - r.H) * (I + op.matrix) - I).norm());
    }
    // a dense operator with prescribed HS norm 0.45
    std::mt19937 rng(99);
    std::normal_distribution<double> nd;
    const auto g32 = cheb::make_grid(32);
    fredholm::Matrix a(32, 32);
    for (Eigen::Index i = 0; i < 32; ++i)
        for (Eigen::Index j = 0; j < 32; ++j) a(i, j) = cplx(nd(rng), nd(rng));
    a *= 0.45 / fredholm::hilbert_schmidt_norm(a, g32->quad_weights());
    const auto dr = fredholm::determinant(fredholm::from_matrix(0.0, g32, a), 12);
    series = std::max(series, rel(dr.series_value, oracle_det2(a)));
    delta1 = delta1 && std::abs(dr.delta[1]) == 0.0;
    o.flag("delta_1 == 0", delta1);
    o.less("series vs matrix (HS < 0.5)", series, 1e-6);
    o.less("det vs LU oracle", matrix, 1e-10);
    o.flag("delta_m and |D| bounds", bounds);
    o.less("resolvent identities", ident, 1e-8);
    o.less("(I - H)(I + N) - I", inverse, 1e-8);
}

void growth(Outcome& o) {
    const FlowParams p = derive_params(340.0, 0.5);
    const auto g = cheb::make_grid(64);
    std::vector<double> lx, ly;
    std::string hs;
    for (double m : {1.0, 2.0, 4.0, 8.0}) {
        const cplx s(0.5, std::sqrt(m * m - 0.25));
        const double h = fredholm::build_N(s, g, p).hs_norm;
        lx.push_back(std::log(m));
        ly.push_back(std::log(h));
        hs += (hs.empty() ? "" : ", ") + sci(h);
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    o.less("fitted exponent", (n * sxy - sx * sy) / (n * sxx - sx * sx), 2.3);
    o.note("hs_norm at |s| = 1, 2, 4, 8: " + hs);
}

void end_to_end(Outcome& o) {
    const double xs[7] = {-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9};
    const double ts[3] = {0.0, 0.5, 1.0};
    double res[2];
    fredholm::PressureDensity p128;
    for (int i = 0; i < 2; ++i) {
        const std::size_t n = i == 0 ? 64 : 128;
        const auto g = cheb::make_grid(n);
        const auto spec = laplace::harmonic_downwash({g, cheb::CVec(n, 1.0), cheb::EndpointClass::bounded}, 0.5);
        const auto fam = field::harmonic_family(spec, derive_params(340.0, 0.5), g);
        res[i] = field::flow_tangency_residual(fam, spec, xs, ts).relative_residual;
        if (n == 128) p128 = fam.solutions.front();
    }
    o.less("tangency n=128", res[1], 1e-2);
    // equal to evaluation precision counts as non-increasing
    o.flag("non-increasing 64 -> 128", res[1] <= res[0] * (1.0 + 1e-6));
    o.note("tangency residual n=64 " + sci(res[0]) + ", n=128 " + sci(res[1]));
    o.flag("int |p|^1.3 finite", std::isfinite(p128.lp_norm) && p128.lp_norm > 0.0);
    o.less("R_s[p] vs rhs", p128.hook_residual, 1e-6);
}

void bromwich(Outcome& o) {
    auto F = [](cplx s) { return 1.0 / (s + 1.0); };
    const double exact = std::exp(-1.0);
    const auto a = laplace::bromwich_invert(F, {1.0, 1e5, 0.05}, 1.0);
    const auto b = laplace::bromwich_invert(F, {1.5, 1e5, 0.05}, 1.0);
    o.less("sigma'=1", std::abs(a.value.real() - exact) / exact, 1e-4);
    o.less("sigma'=1.5", std::abs(b.value.real() - exact) / exact, 1e-4);
    o.less("sigma' independence", std::abs(a.value - b.value) / exact, 1e-4);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void determinism(Outcome& o) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("possio_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "harmonic.yaml") << "flow: {a: 340.0, M: 0.5}\ngrid: {n: 64}\n"
                                             "downwash: {mode: harmonic, k: 0.5}\n"
                                             "scan: {n_sigma: 3, n_nu: 11, nu_max: 5.0}\n";
    std::ofstream(dir / "contour.yaml") << "flow: {a: 340.0, M: 0.5}\ngrid: {n: 32}\n"
                                            "downwash: {mode: closure, name: step}\n"
                                            "contour: {nu_max: 4.0, d_nu: 0.25, enforce_gate: false}\n";
    std::ostringstream sink;
    std::size_t files = 0;
    bool same = true;
    for (const auto& [cmd, cfg] : std::vector<std::pair<std::string, std::string>>{
             {"solve", "harmonic.yaml"}, {"scan", "harmonic.yaml"}, {"solve", "contour.yaml"}}) {
        std::vector<fs::path> outs;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = dir / (cmd + "_" + cfg + "_" + std::to_string(rep));
            app::run({cmd, "-c", (dir / cfg).string(), "--output.dir", out.string()}, sink, sink);
            outs.push_back(out);
        }
        for (const auto& e : fs::directory_iterator(outs[0])) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            const fs::path twin = outs[1] / e.path().filename();
            same = same && fs::exists(twin) && slurp(e.path()) == slurp(twin) && !slurp(twin).empty();
        }
    }
    fs::remove_all(dir);
    o.flag("byte-identical CSVs", same && files >= 7);
    o.note(std::to_string(files) + " CSV files compared");
}

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "special functions", 10, special_functions},
        {2, "transform identities", 10, transform_identities},
        {3, "kernel split", 60, kernel_split},
        {4, "PDE structure", 60, pde_structure},
        {5, "Kutta condition", 60, kutta},
        {6, "Fredholm layer", 120, fredholm_layer},
        {7, "growth diagnostics", 300, growth},
        {8, "end-to-end harmonic benchmark", 600, end_to_end},
        {9, "Bromwich layer", 30, bromwich},
        {10, "determinism", 600, determinism},
    };
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    bool ok = true;
    for (const auto& c : all) {
        if (only != 0 && c.id != only) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.flag(std::string("exception: ") + e.what(), false);
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = dt < c.budget_seconds;
        const bool pass = o.passed() && in_budget;
        std::printf("criterion %2d %-30s %s  %s; runtime %.2f s (budget %.0f s)\n", c.id, c.title,
                    pass ? "PASS" : "FAIL", o.summary().c_str(), dt, c.budget_seconds);
        for (const auto& n : o.notes()) std::printf("             note: %s\n", n.c_str());
        ok = ok && pass;
    }
    return ok ? 0 : 1;
}
