#include "possio/field.hpp"

#include "possio/errors.hpp"
#include "possio/kernel.hpp"
#include "possio/parallel.hpp"
#include "possio/quadrature.hpp"
#include "possio/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace possio::field {

namespace {

using std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
constexpr std::size_t kPanelOrder = 12;

/// Psi_{xi,0} and its y-derivative at separation v = x - xi.
struct DoubletValues {
    cplx psi, psi_y;
};

DoubletValues doublet_values(double v, double y, cplx q, double b2) {
    const double rho2 = v * v / b2 + y * y;
    const double rho = std::sqrt(rho2);
    const auto h = specfun::hankel01(q * rho);
    const cplx h1r = h.h1 / rho;
    return {q * y * h1r, q * (h1r * (1.0 - 2.0 * y * y / rho2) + q * y * y * h.h0 / rho2)};
}

/// Quadrature in theta (xi = cos theta) for int_{-1}^{1} p(xi) f(x - xi) dxi
/// with p = g / sqrt(1 - xi^2), graded around xi = x on the scale of the
/// doublet width.
void theta_rule(double x, double width, std::size_t n, std::vector<double>& theta, std::vector<double>& w) {
    std::vector<double> br{0.0, pi};
    if (width > 0.0) {
        for (double f : {0.0, 0.0625, 0.25, 1.0, 4.0, 16.0, 64.0, 256.0}) {
            for (double sgn : {-1.0, 1.0}) {
                const double xi = x + sgn * f * width;
                if (xi > -1.0 && xi < 1.0) br.push_back(std::acos(xi));
            }
        }
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(), [](double a, double b) { return b - a < 1e-14; }), br.end());
    const double hmax = std::min(pi / 16.0, 4.0 / static_cast<double>(n));
    const quad::Rule& rule = quad::gauss_legendre(kPanelOrder);
    theta.clear();
    w.clear();
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double len = br[i + 1] - br[i];
        const auto pieces = static_cast<std::size_t>(std::ceil(len / hmax - 1e-12));
        for (std::size_t k = 0; k < std::max<std::size_t>(1, pieces); ++k) {
            const double a = br[i] + len * static_cast<double>(k) / static_cast<double>(pieces);
            const double b = br[i] + len * static_cast<double>(k + 1) / static_cast<double>(pieces);
            quad::append_panel(rule, a, b, theta, w);
        }
    }
}

/// G(d) = int_{-inf}^{d} e^{-lambda v} Psi(v, y) dv (and the same for Psi_y)
/// at sorted separations, accumulated outward from one upstream ray.
struct Sweep {
    std::vector<double> d;
    std::vector<cplx> g, g_y;
};

Sweep sweep(std::vector<double> d, double y, cplx s, const FlowParams& params, bool want_g, bool want_gy) {
    const double b2 = params.beta2();
    const cplx q = kI * s / (params.a * std::sqrt(b2));
    const cplx lam = lambda_of(s, params);
    const double width = std::abs(y) * std::sqrt(b2);
    d.push_back(0.0);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());

    Sweep out;
    out.d = d;
    out.g.assign(d.size(), 0.0);
    out.g_y.assign(d.size(), 0.0);
    const double start = std::min(d.front(), -(4.0 * width + 1.0));

    const quad::RayOptions ro = kernel::upstream_ray_options(s, params);
    std::vector<double> breaks;
    const double len = ro.panel_length;
    for (double f = 0.25; f * std::abs(start) < 4.0 * len && breaks.size() < 40; f *= 4.0)
        breaks.push_back(f * std::abs(start));
    auto integrand = [&](double v, bool dy) {
        const DoubletValues dv = doublet_values(v, y, q, b2);
        return std::exp(-lam * v) * (dy ? dv.psi_y : dv.psi);
    };
    cplx g = 0.0, gy = 0.0;
    if (want_g) g = quad::integrate_ray([&](double r) { return integrand(start - r, false); }, breaks, ro).value;
    if (want_gy) gy = quad::integrate_ray([&](double r) { return integrand(start - r, true); }, breaks, ro).value;

    const double tol_g = 1e-15, tol_gy = 1e-15 / std::max(width, 1e-300);
    double left = start;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double right = d[i];
        if (right > left) {
            if (want_g)
                g += quad::adaptive([&](double v) { return integrand(v, false); }, left, right, tol_g, 1e-13).value;
            if (want_gy)
                gy += quad::adaptive([&](double v) { return integrand(v, true); }, left, right, tol_gy, 1e-13).value;
        }
        out.g[i] = g;
        out.g_y[i] = gy;
        left = right;
    }
    return out;
}

std::size_t index_of(const std::vector<double>& sorted, double v) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

cplx density_cofactor(const SolutionFamily& fam, std::size_t j, double xi) {
    return cheb::clenshaw(fam.p_coeffs[j], xi);
}

/// Index whose values give point j by conjugation in a mirrored family.
std::size_t mirror_source(const SolutionFamily& fam, std::size_t j) {
    if (!fam.mirrored) return j;
    const std::size_t J = (fam.s.size() - 1) / 2;
    return j < J ? 2 * J - j : j;
}

/// Takes Laplace-domain values per s point to the time domain.
struct TimeValue {
    cplx value;
    double gate = 0.0;
};

std::vector<TimeValue> to_time(const SolutionFamily& fam, const std::vector<cplx>& hat, std::span<const double> times) {
    std::vector<TimeValue> out;
    if (fam.kind == FamilyKind::harmonic) {
        for (double t : times) out.push_back({std::exp(fam.s[0] * t) * hat[0], 0.0});
        return out;
    }
    const auto res = laplace::bromwich_sum(fam.contour, hat, times, fam.gate_tol, fam.enforce_gate);
    for (const auto& r : res) out.push_back({r.value, r.rel_change});
    return out;
}

/// Density at conj(s) for real data. The doublet basis is i times a
/// Schwarz-symmetric function, so the density maps to minus its conjugate.
fredholm::PressureDensity conjugate(const fredholm::PressureDensity& p) {
    fredholm::PressureDensity c = p;
    auto cj = [](cheb::CVec& v) {
        for (auto& z : v) z = -std::conj(z);
    };
    c.s = std::conj(p.s);
    cj(c.r.values);
    cj(c.p.values);
    cj(c.rhs.values);
    cj(c.p_coeffs);
    c.determinant = std::conj(p.determinant);
    c.endpoint_left = -std::conj(p.endpoint_left);
    c.endpoint_right = -std::conj(p.endpoint_right);
    return c;
}

void check_family(const SolutionFamily& fam) {
    if (!fam.grid) throw ConfigError("solution family has no grid");
    if (fam.s.empty() || fam.s.size() != fam.p_coeffs.size()) throw ConfigError("solution family is inconsistent");
    if (fam.kind == FamilyKind::harmonic && fam.s.size() != 1) {
        throw ConfigError("a harmonic family holds exactly one s");
    }
    if (fam.kind == FamilyKind::contour && fam.s.size() != 2 * fam.contour.half_count() + 1) {
        throw ConfigError("contour family does not match its contour");
    }
}

}  // namespace

SolutionFamily harmonic_family(const laplace::DownwashSpec& spec, const FlowParams& params,
                               const cheb::GridPtr& grid, double sigma_shift, const fredholm::SolveOptions& opt) {
    if (!(sigma_shift > 0.0)) throw ConfigError("harmonic mode needs sigma_shift > 0");
    const cplx s(sigma_shift, spec.k);
    const auto w0 = laplace::harmonic_amplitude(spec, grid);
    SolutionFamily fam;
    fam.kind = FamilyKind::harmonic;
    fam.params = params;
    fam.grid = grid;
    fam.s = {s};
    fam.solutions.push_back(fredholm::solve_p(s, w0, params, opt));
    fam.p_coeffs.push_back(fam.solutions.back().p_coeffs);
    return fam;
}

SolutionFamily contour_family(const laplace::DownwashSpec& spec, const FlowParams& params,
                              const cheb::GridPtr& grid, const laplace::Contour& contour,
                              const fredholm::SolveOptions& opt) {
    if (!params.in_strip(contour.sigma)) throw DomainError("Bromwich abscissa lies outside [sigma1, sigma2]");
    SolutionFamily fam;
    fam.kind = FamilyKind::contour;
    fam.params = params;
    fam.grid = grid;
    fam.contour = contour;
    fam.s = contour.points();
    fam.mirrored = laplace::is_real_valued(spec);
    const std::size_t count = fam.s.size(), J = (count - 1) / 2;
    const std::size_t first = fam.mirrored ? J : 0;
    std::vector<fredholm::PressureDensity> solved(count);
    parallel_for(count - first, [&](std::size_t i) {
        const std::size_t j = first + i;
        solved[j] = fredholm::solve_p(fam.s[j], laplace::laplace_transform(spec, fam.s[j], grid), params, opt);
    });
    for (std::size_t j = 0; j < first; ++j) solved[j] = conjugate(solved[2 * J - j]);
    fam.solutions = std::move(solved);
    for (const auto& p : fam.solutions) fam.p_coeffs.push_back(p.p_coeffs);
    return fam;
}

SolutionFamily synthetic_family(FamilyKind kind, const FlowParams& params, const cheb::GridPtr& grid,
                                std::vector<cplx> s, std::vector<std::vector<cplx>> p_coeffs,
                                const laplace::Contour& contour) {
    SolutionFamily fam;
    fam.kind = kind;
    fam.params = params;
    fam.grid = grid;
    fam.contour = contour;
    fam.s = std::move(s);
    fam.p_coeffs = std::move(p_coeffs);
    check_family(fam);
    return fam;
}

SolutionFamily add(const SolutionFamily& a, const SolutionFamily& b) {
    if (a.kind != b.kind || a.s != b.s) throw ConfigError("families are sampled at different s");
    SolutionFamily c = a;
    c.solutions.clear();
    c.mirrored = false;
    for (std::size_t j = 0; j < c.p_coeffs.size(); ++j) {
        auto& pc = c.p_coeffs[j];
        const auto& pb = b.p_coeffs[j];
        if (pb.size() > pc.size()) pc.resize(pb.size(), 0.0);
        for (std::size_t k = 0; k < pb.size(); ++k) pc[k] += pb[k];
    }
    return c;
}

std::vector<TransformedValues> transformed(const SolutionFamily& fam, std::size_t j,
                                           std::span<const Probe> probes, unsigned need) {
    check_family(fam);
    if (j >= fam.s.size()) throw ConfigError("family index out of range");
    const std::size_t src = mirror_source(fam, j);
    if (src != j) {
        auto v = transformed(fam, src, probes, need);
        for (auto& e : v) e = {std::conj(e.phi), std::conj(e.phi_y), std::conj(e.psi)};
        return v;
    }
    const cplx s = fam.s[j];
    const FlowParams& params = fam.params;
    const double b2 = params.beta2();
    const cplx q = kI * s / (params.a * std::sqrt(b2));
    const cplx lam = lambda_of(s, params);
    const std::size_t n = fam.grid->n();
    const bool want_phi = need & need_phi, want_phi_y = need & need_phi_y, want_psi = need & need_psi;

    std::vector<TransformedValues> out(probes.size());
    // group probes by y
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Probe& pr = probes[i];
        if (!std::isfinite(pr.x) || !std::isfinite(pr.y)) throw DomainError("non-finite field probe");
        if (pr.y == 0.0 && std::abs(pr.x) <= 1.0) {
            throw DomainError("field on the chord at y = 0 is a one-sided limit; use y != 0 or psi_on_chord");
        }
        if (pr.y == 0.0 && (want_phi || want_phi_y) && pr.x >= -1.0) {
            throw DomainError("phi on y = 0 behind the leading edge is a one-sided limit; use y != 0");
        }
        groups[pr.y].push_back(i);
    }
    std::vector<double> theta, w;
    for (const auto& [y, idx] : groups) {
        const double width = std::abs(y) * std::sqrt(b2);
        struct Rule {
            std::vector<double> d;
            std::vector<cplx> gw;  ///< quadrature weight times density cofactor
        };
        std::vector<Rule> rules;
        std::vector<double> all_d;
        for (std::size_t i : idx) {
            theta_rule(probes[i].x, width, n, theta, w);
            Rule r;
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const double xi = std::cos(theta[k]);
                r.d.push_back(probes[i].x - xi);
                r.gw.push_back(w[k] * density_cofactor(fam, j, xi));
            }
            if (want_phi || want_phi_y) all_d.insert(all_d.end(), r.d.begin(), r.d.end());
            rules.push_back(std::move(r));
        }
        Sweep sw;
        if ((want_phi || want_phi_y) && y != 0.0) sw = sweep(all_d, y, s, params, want_phi, want_phi_y);
        for (std::size_t m = 0; m < idx.size(); ++m) {
            const Probe& pr = probes[idx[m]];
            const Rule& r = rules[m];
            cplx phi = 0.0, phi_y = 0.0, psi = 0.0;
            for (std::size_t k = 0; k < r.d.size(); ++k) {
                const double d = r.d[k];
                if (want_psi && y != 0.0) psi += r.gw[k] * doublet_values(d, y, q, b2).psi;
                if ((want_phi || want_phi_y) && y != 0.0) {
                    const std::size_t at = index_of(sw.d, d);
                    const cplx e = std::exp(lam * d) / params.U;
                    phi += r.gw[k] * e * sw.g[at];
                    phi_y += r.gw[k] * e * sw.g_y[at];
                }
            }
            const cplx conv = std::exp(s * params.c * pr.x);
            out[idx[m]] = {conv * phi, conv * phi_y, conv * psi};
        }
    }
    return out;
}

std::vector<FieldSample> evaluate(const SolutionFamily& fam, std::span<const Probe> probes,
                                  std::span<const double> times, unsigned need) {
    check_family(fam);
    const std::size_t S = fam.s.size();
    std::vector<std::vector<TransformedValues>> per_s(S);
    std::vector<std::size_t> todo;
    for (std::size_t j = 0; j < S; ++j)
        if (mirror_source(fam, j) == j) todo.push_back(j);
    parallel_for(todo.size(), [&](std::size_t i) { per_s[todo[i]] = transformed(fam, todo[i], probes, need); });
    for (std::size_t j = 0; j < S; ++j) {
        const std::size_t src = mirror_source(fam, j);
        if (src == j) continue;
        per_s[j] = per_s[src];
        for (auto& e : per_s[j]) e = {std::conj(e.phi), std::conj(e.phi_y), std::conj(e.psi)};
    }
    std::vector<FieldSample> out;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        std::vector<cplx> phi(S), phi_y(S), psi(S);
        for (std::size_t j = 0; j < S; ++j) {
            phi[j] = per_s[j][i].phi;
            phi_y[j] = per_s[j][i].phi_y;
            psi[j] = per_s[j][i].psi;
        }
        const auto tp = need & need_phi ? to_time(fam, phi, times) : std::vector<TimeValue>(times.size());
        const auto ty = need & need_phi_y ? to_time(fam, phi_y, times) : std::vector<TimeValue>(times.size());
        const auto ts = need & need_psi ? to_time(fam, psi, times) : std::vector<TimeValue>(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            FieldSample f;
            f.x = probes[i].x;
            f.y = probes[i].y;
            f.t = times[k];
            f.phi = tp[k].value;
            f.phi_y = ty[k].value;
            f.psi = ts[k].value;
            f.gate_change = std::max({tp[k].gate, ty[k].gate, ts[k].gate});
            out.push_back(std::move(f));
        }
    }
    return out;
}

FieldSample evaluate_phi(double x, double y, double t, const SolutionFamily& fam) {
    const Probe p{x, y};
    const double times[1] = {t};
    FieldSample f = evaluate(fam, {&p, 1}, times, need_phi).front();
    for (std::size_t j = 0; j < fam.s.size(); ++j) f.contributions.push_back(transformed(fam, j, {&p, 1}, need_phi)[0].phi);
    return f;
}

FieldSample evaluate_psi(double x, double y, double t, const SolutionFamily& fam) {
    const Probe p{x, y};
    const double times[1] = {t};
    FieldSample f = evaluate(fam, {&p, 1}, times, need_psi).front();
    for (std::size_t j = 0; j < fam.s.size(); ++j) f.contributions.push_back(transformed(fam, j, {&p, 1}, need_psi)[0].psi);
    return f;
}

cplx psi_on_chord(const SolutionFamily& fam, double x, double t) {
    check_family(fam);
    if (!(std::abs(x) < 1.0)) throw DomainError("psi_on_chord needs |x| < 1");
    const double b2 = fam.params.beta2();
    std::vector<cplx> hat(fam.s.size());
    for (std::size_t j = 0; j < fam.s.size(); ++j) {
        hat[j] = -2.0 * kI * std::sqrt(b2) * std::exp(fam.s[j] * fam.params.c * x) * density_cofactor(fam, j, x) /
                 std::sqrt(1.0 - x * x);
    }
    const double times[1] = {t};
    return to_time(fam, hat, times).front().value;
}

namespace {

/// Polynomial extrapolation to y = 0 through (y_k, f_k) by Neville's scheme.
cplx extrapolate_to_zero(const std::vector<double>& y, std::vector<cplx> f) {
    const std::size_t m = y.size();
    for (std::size_t level = 1; level < m; ++level) {
        for (std::size_t k = m - 1; k >= level; --k) {
            const double ya = y[k - level], yb = y[k];
            f[k] = (ya * f[k] - yb * f[k - 1]) / (ya - yb);
            if (k == level) break;
        }
    }
    return f[m - 1];
}

}  // namespace

TangencyReport flow_tangency_residual(const SolutionFamily& fam, const laplace::DownwashSpec& downwash,
                                      std::span<const double> xs, std::span<const double> times,
                                      std::vector<double> y_levels, double tolerance) {
    if (y_levels.size() < 2) throw ConfigError("flow tangency needs at least two y levels");
    for (double y : y_levels)
        if (!(y > 0.0)) throw ConfigError("flow tangency y levels must be positive");
    for (double x : xs)
        if (!(std::abs(x) < 1.0)) throw DomainError("flow tangency probes must lie inside the chord");
    TangencyReport rep;
    rep.y_levels = y_levels;
    rep.tolerance = tolerance;
    std::vector<Probe> probes;
    for (double y : y_levels)
        for (double x : xs) probes.push_back({x, y});
    const auto samples = evaluate(fam, probes, times, need_phi_y);
    cheb::ChordFunction w0;
    if (fam.kind == FamilyKind::harmonic) w0 = laplace::harmonic_amplitude(downwash, fam.grid);
    const auto w0c = fam.kind == FamilyKind::harmonic ? cheb::cos_coeffs(*fam.grid, w0.values) : cheb::CVec{};
    double max_err = 0.0, max_w = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t k = 0; k < times.size(); ++k) {
            TangencyProbe tp;
            tp.x = xs[i];
            tp.t = times[k];
            for (std::size_t l = 0; l < y_levels.size(); ++l)
                tp.dphi_dy.push_back(samples[(l * xs.size() + i) * times.size() + k].phi_y);
            tp.extrapolated = extrapolate_to_zero(y_levels, tp.dphi_dy);
            tp.target = fam.kind == FamilyKind::harmonic ? cheb::clenshaw(w0c, tp.x) * std::exp(fam.s[0] * tp.t)
                                                         : laplace::downwash_value(downwash, tp.x, tp.t);
            tp.error = std::abs(tp.extrapolated - tp.target);
            max_err = std::max(max_err, tp.error);
            max_w = std::max(max_w, std::abs(tp.target));
            rep.probes.push_back(tp);
        }
    }
    rep.relative_residual = max_w > 0.0 ? max_err / max_w : max_err;
    for (auto& tp : rep.probes) tp.flagged = tp.error > tolerance * std::max(max_w, 1e-300);
    return rep;
}

namespace {

template <class PhiFn>
PdeResidual fd_residual(PhiFn&& phi, const FlowParams& params, double x, double y, double t, std::vector<double> hs) {
    PdeResidual r;
    r.x = x, r.y = y, r.t = t;
    r.h = hs;
    const double a = params.a, b2 = params.beta2();
    for (double h : hs) {
        const double ht = h / a;
        // phi(dx, dy, dt) in units of the steps
        auto f = [&](int i, int j, int k) { return phi(x + i * h, y + j * h, t + k * ht); };
        const cplx c = f(0, 0, 0);
        const cplx xx = (f(1, 0, 0) - 2.0 * c + f(-1, 0, 0)) / (h * h);
        const cplx yy = (f(0, 1, 0) - 2.0 * c + f(0, -1, 0)) / (h * h);
        const cplx tt = (f(0, 0, 1) - 2.0 * c + f(0, 0, -1)) / (ht * ht);
        const cplx xt = (f(1, 0, 1) - f(1, 0, -1) - f(-1, 0, 1) + f(-1, 0, -1)) / (4.0 * h * ht);
        const double M = params.M;
        const cplx res = a * a * b2 * xx + a * a * yy - tt - 2.0 * M * a * xt;
        const double scale = std::abs(a * a * b2 * xx) + std::abs(a * a * yy) + std::abs(tt) + std::abs(2.0 * M * a * xt);
        r.residual.push_back(scale > 0.0 ? std::abs(res) / scale : 0.0);
    }
    r.decay_ratio = r.residual.back() > 0.0 ? r.residual.front() / r.residual.back() : HUGE_VAL;
    return r;
}

}  // namespace

PdeResidual pde_residual(const SolutionFamily& fam, double x, double y, double t, std::vector<double> h) {
    if (h.empty()) throw ConfigError("pde_residual needs at least one step");
    // gather the full stencil for every h in one evaluation
    std::vector<Probe> probes;
    std::vector<double> times;
    for (double hh : h) {
        for (int i = -1; i <= 1; ++i) probes.push_back({x + i * hh, y});
        probes.push_back({x, y + hh});
        probes.push_back({x, y - hh});
        for (int k = -1; k <= 1; ++k) times.push_back(t + k * hh / fam.params.a);
    }
    const auto samples = evaluate(fam, probes, times, need_phi);
    auto lookup = [&](double px, double py, double pt) {
        for (std::size_t i = 0; i < probes.size(); ++i) {
            if (probes[i].x != px || probes[i].y != py) continue;
            for (std::size_t k = 0; k < times.size(); ++k)
                if (times[k] == pt) return samples[i * times.size() + k].phi;
        }
        throw ConfigError("pde stencil point missing");
    };
    return fd_residual(lookup, fam.params, x, y, t, std::move(h));
}

PdeResidual doublet_pde_residual(double xi, cplx s, const FlowParams& params, double x, double y, double t,
                                 std::vector<double> h) {
    if (h.empty()) throw ConfigError("pde_residual needs at least one step");
    auto phi = [&](double px, double py, double pt) {
        return kernel::doublet_potential(px, py, xi, s, params) * std::exp(s * (pt + params.c * px));
    };
    return fd_residual(phi, params, x, y, t, std::move(h));
}

std::pair<cplx, cplx> transformed_loads(const SolutionFamily& fam, std::size_t j) {
    check_family(fam);
    const auto& g = *fam.grid;
    const double wt = pi / static_cast<double>(g.n());
    cplx lift = 0.0, moment = 0.0;
    for (std::size_t k = 0; k < g.n(); ++k) {
        const double xi = g.nodes()[k];
        const cplx v = density_cofactor(fam, j, xi);
        lift += wt * v;
        moment += wt * xi * v;
    }
    return {lift, moment};
}

std::vector<Loads> compute_loads(const SolutionFamily& fam, std::span<const double> times) {
    check_family(fam);
    std::vector<cplx> lift(fam.s.size()), moment(fam.s.size());
    for (std::size_t j = 0; j < fam.s.size(); ++j) std::tie(lift[j], moment[j]) = transformed_loads(fam, j);
    std::vector<Loads> out;
    if (fam.kind == FamilyKind::harmonic) {
        for (double t : times) out.push_back({t, std::exp(fam.s[0] * t) * lift[0], std::exp(fam.s[0] * t) * moment[0], 0.0});
        return out;
    }
    // one gate for the pair, measured on the larger load: the lift of a
    // zero-mean density is roundoff and has no meaningful relative change
    const auto tl = laplace::bromwich_sum(fam.contour, lift, times, fam.gate_tol, false);
    const auto tm = laplace::bromwich_sum(fam.contour, moment, times, fam.gate_tol, false);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double scale = std::max(std::abs(tl[k].value), std::abs(tm[k].value));
        const double change = std::max(std::abs(tl[k].value - tl[k].coarse_value),
                                       std::abs(tm[k].value - tm[k].coarse_value));
        const double gate = scale > 0.0 ? change / scale : 0.0;
        if (fam.enforce_gate && !(gate < fam.gate_tol)) {
            std::ostringstream os;
            os << "Bromwich loads at t = " << times[k] << " failed the self-convergence gate: relative change " << gate
               << " >= " << fam.gate_tol;
            throw ConvergenceError(os.str());
        }
        out.push_back({times[k], tl[k].value, tm[k].value, gate});
    }
    return out;
}

KuttaReport kutta_check(const SolutionFamily& fam, std::span<const double> times, std::size_t n_x) {
    if (n_x < 2) throw ConfigError("kutta_check needs at least two x samples per side");
    std::vector<Probe> probes;
    for (std::size_t i = 0; i < n_x; ++i) {
        const double ax = 1.05 + (3.0 - 1.05) * static_cast<double>(i) / static_cast<double>(n_x - 1);
        probes.push_back({ax, 0.0});
        probes.push_back({-ax, 0.0});
    }
    KuttaReport rep;
    for (const auto& f : evaluate(fam, probes, times, need_psi)) rep.max_off_chord = std::max(rep.max_off_chord, std::abs(f.psi));
    for (double t : times)
        for (double x : fam.grid->nodes()) rep.chord_scale = std::max(rep.chord_scale, std::abs(psi_on_chord(fam, x, t)));
    rep.ratio = rep.chord_scale > 0.0 ? rep.max_off_chord / rep.chord_scale : 0.0;
    return rep;
}

}  // namespace possio::field
