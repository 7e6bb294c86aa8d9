#pragma once

// Quadrature rules shared by the kernel, operator and field layers.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace possio::quad {

using cplx = std::complex<double>;
using ComplexFn = std::function<cplx(double)>;

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [-1, 1]; cached per m, thread-safe.
const Rule& gauss_legendre(std::size_t m);

/// n-point generalized Gauss-Laguerre rule for weight x^alpha e^{-x} on [0, inf).
Rule gauss_laguerre(std::size_t n, double alpha);

/// Fixed-rule integral over [a, b].
template <class F>
cplx fixed(const Rule& rule, double a, double b, F&& f) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    cplx sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

/// Appends the nodes/weights of `rule` mapped onto [a, b].
void append_panel(const Rule& rule, double a, double b, std::vector<double>& nodes,
                  std::vector<double>& weights);

/// Geometric panels on [a, a + h] (h may be negative) accumulating toward the
/// endpoint a, where the integrand may carry a logarithmic or weak algebraic
/// singularity. `levels` panels with ratio `ratio`, plus the innermost panel.
void append_graded(const Rule& rule, double a, double h, int levels, double ratio,
                   std::vector<double>& nodes, std::vector<double>& weights);

template <class F>
cplx graded(double a, double h, F&& f, int levels = 16, double ratio = 0.15, std::size_t order = 10) {
    std::vector<double> x, w;
    append_graded(gauss_legendre(order), a, h, levels, ratio, x, w);
    cplx sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * f(x[i]);
    return sum;
}

struct AdaptiveResult {
    cplx value;
    double error;
    std::size_t evaluations;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Subdivides the worst interval
/// until the summed error estimate is below max(abs_tol, rel_tol |I|).
/// Throws QuadratureError when `max_intervals` is exhausted.
AdaptiveResult adaptive(const ComplexFn& f, double a, double b, double abs_tol, double rel_tol,
                        std::size_t max_intervals = 2000);

/// Single 15-point Kronrod evaluation of [a, b].
cplx kronrod15(const ComplexFn& f, double a, double b);

struct RayOptions {
    double panel_length = 1.0;     ///< length of outer panels
    double rel_tol = 1e-12;        ///< envelope cutoff relative to the running integral
    double abs_tol = 1e-300;
    std::size_t max_panels = 100000;
    std::size_t consecutive_small = 3;  ///< panels below the cutoff before stopping
};

struct RayResult {
    cplx value;
    double truncation;  ///< length at which the integral was truncated
    std::size_t panels;
};

/// Integral of f over [0, inf): adaptive panels between the sorted
/// breakpoints, then panels of fixed length until the panel contribution
/// and the integrand envelope fall below rel_tol times the running sum.
RayResult integrate_ray(const ComplexFn& f, std::span<const double> breakpoints, const RayOptions& opt);

}  // namespace possio::quad
