#include "possio/quadrature.hpp"

#include "possio/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace possio::quad {

namespace {

Rule make_gauss_legendre(std::size_t m) {
    Rule r;
    r.nodes.resize(m);
    r.weights.resize(m);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= m; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            if (m == 1) p0 = 1.0, p1 = x;
            dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= m; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[m - 1 - i] = x;
        r.weights[i] = w;
        r.weights[m - 1 - i] = w;
    }
    if (m % 2 == 1) r.nodes[m / 2] = 0.0;
    return r;
}

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    cplx value;
    double error;
};

Segment gk15(const ComplexFn& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const cplx fc = f(mid);
    cplx kron = kWgk[7] * fc;
    cplx gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const cplx f1 = f(mid - dx);
        const cplx f2 = f(mid + dx);
        kron += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    kron *= half;
    gauss *= half;
    return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace

const Rule& gauss_legendre(std::size_t m) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[m];
    if (!slot) slot = std::make_unique<Rule>(make_gauss_legendre(m));
    return *slot;
}

Rule gauss_laguerre(std::size_t n, double alpha) {
    // Initial guesses from the classical asymptotic formulas, then Newton on
    // the three-term recurrence with deflation against earlier roots.
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double nn = static_cast<double>(n);
    auto laguerre = [&](double x, double& ln, double& lnm1) {
        double p0 = 1.0, p1 = 1.0 + alpha - x;
        if (n == 0) {
            ln = 1.0;
            lnm1 = 0.0;
            return;
        }
        for (std::size_t k = 1; k < n; ++k) {
            const double kk = static_cast<double>(k);
            const double p2 = ((2.0 * kk + 1.0 + alpha - x) * p1 - (kk + alpha) * p0) / (kk + 1.0);
            p0 = p1;
            p1 = p2;
        }
        ln = p1;
        lnm1 = p0;
    };
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nn + 1.8 * alpha);
        } else if (i == 1) {
            z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nn);
        } else {
            const double ai = static_cast<double>(i - 1);
            z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) /
                 (1.0 + 0.3 * alpha) * (z - r.nodes[i - 2]);
        }
        double ln = 0.0, lnm1 = 0.0;
        for (int it = 0; it < 200; ++it) {
            laguerre(z, ln, lnm1);
            const double dl = (nn * ln - (nn + alpha) * lnm1) / z;
            const double dz = ln / dl;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::abs(z)) break;
        }
        laguerre(z, ln, lnm1);
        const double dl = (nn * ln - (nn + alpha) * lnm1) / z;
        r.nodes[i] = z;
        // w_i = Gamma(n + alpha) / (Gamma(n) * n) ... expressed through L'_n and L_{n-1}
        const double logw = std::lgamma(nn + alpha) - std::lgamma(nn);
        r.weights[i] = -std::exp(logw) / (dl * nn * lnm1);
    }
    return r;
}

void append_panel(const Rule& rule, double a, double b, std::vector<double>& nodes,
                  std::vector<double>& weights) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        nodes.push_back(mid + half * rule.nodes[i]);
        weights.push_back(std::abs(half) * rule.weights[i]);
    }
}

void append_graded(const Rule& rule, double a, double h, int levels, double ratio,
                   std::vector<double>& nodes, std::vector<double>& weights) {
    double outer = h;
    for (int k = 0; k < levels; ++k) {
        const double inner = outer * ratio;
        append_panel(rule, a + inner, a + outer, nodes, weights);
        outer = inner;
    }
    append_panel(rule, a, a + outer, nodes, weights);
}

cplx kronrod15(const ComplexFn& f, double a, double b) { return gk15(f, a, b).value; }

AdaptiveResult adaptive(const ComplexFn& f, double a, double b, double abs_tol, double rel_tol,
                        std::size_t max_intervals) {
    std::vector<Segment> segs{gk15(f, a, b)};
    std::size_t evals = 15;
    for (;;) {
        cplx total = 0.0;
        double err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (err <= std::max(abs_tol, rel_tol * std::abs(total))) return {total, err, evals};
        if (segs.size() >= max_intervals) {
            throw QuadratureError("adaptive quadrature exhausted its subdivision budget (error " +
                                  std::to_string(err) + ")");
        }
        const Segment s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (!(mid > std::min(s.a, s.b) && mid < std::max(s.a, s.b))) {
            return {total, err, evals};  // interval at floating-point resolution
        }
        segs[worst] = gk15(f, s.a, mid);
        segs.push_back(gk15(f, mid, s.b));
        evals += 30;
    }
}

RayResult integrate_ray(const ComplexFn& f, std::span<const double> breakpoints, const RayOptions& opt) {
    std::vector<double> pts;
    pts.push_back(0.0);
    for (double b : breakpoints) {
        if (b > pts.back()) pts.push_back(b);
    }
    cplx sum = 0.0;
    std::size_t panels = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        sum += adaptive(f, pts[i], pts[i + 1], opt.abs_tol, 0.1 * opt.rel_tol).value;
        ++panels;
    }
    double left = pts.back();
    std::size_t small = 0;
    while (panels < opt.max_panels) {
        const double right = left + opt.panel_length;
        const double tol = std::max(opt.abs_tol, 0.1 * opt.rel_tol * std::abs(sum));
        const cplx piece = adaptive(f, left, right, tol, 0.1 * opt.rel_tol).value;
        sum += piece;
        ++panels;
        const double envelope = std::abs(f(right)) * opt.panel_length;
        const double cut = opt.rel_tol * std::abs(sum);
        if (std::abs(piece) <= cut && envelope <= cut) {
            if (++small >= opt.consecutive_small) return {sum, right, panels};
        } else {
            small = 0;
        }
        left = right;
    }
    throw QuadratureError("tail integral did not decay within the panel budget");
}

}  // namespace possio::quad
