#pragma once

// Downwash ingestion, the Laplace transform in t, the decay diagnostic for
// the strip hypothesis, and the truncated Bromwich inversion
//   f(t) = (1/2 pi i) int_{sigma - i inf}^{sigma + i inf} e^{st} F(s) ds
//        ~ (1/2 pi) sum_j e^{(sigma + i nu_j) t} F(sigma + i nu_j) dnu.

#include "possio/cheb.hpp"
#include "possio/flowconfig.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace possio::laplace {

using cheb::cplx;
using ClosureFn = std::function<cplx(double x, cplx s)>;
using TimeFn = std::function<cplx(double x, double t)>;

enum class DownwashMode { harmonic, laplace_closure, time_samples };

/// Downwash samples w(x_j, t_i) on a tensor grid, stored row-major in t.
struct TimeSamples {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> w;
    double tail_ratio = 0.0;  ///< max |w| over the last quarter of t / max |w|
    std::vector<double> cubic;  ///< local cubic coefficients, filled by samples_downwash

    double at(std::size_t i, std::size_t j) const { return w[i * x.size() + j]; }
};

struct DownwashSpec {
    DownwashMode mode = DownwashMode::harmonic;
    // harmonic: w(x, t) = w0(x) e^{ikt}
    cheb::ChordFunction w0;
    double k = 0.0;
    // laplace_closure: w_hat(x, s) given directly, with its time-domain form
    std::string closure_name;
    ClosureFn closure;
    TimeFn closure_time;
    // time_samples
    TimeSamples samples;
};

inline constexpr double kDecayThreshold = 1e-6;

DownwashSpec harmonic_downwash(cheb::ChordFunction w0, double k);

/// Closure from the built-in catalog, w = amplitude * shape(x) * g(t) with
///   harmonic:             g = e^{ikt},        G = 1/(s - ik)
///   step:                 g = 1,              G = 1/s
///   decaying-exponential: g = e^{-rate t},    G = 1/(s + rate)
/// and shape(x) = sum_m shape[m] x^m.
DownwashSpec builtin_closure(const std::string& name, double amplitude, std::span<const double> shape,
                             double k, double rate);

DownwashSpec closure_downwash(std::string name, ClosureFn fn, TimeFn time_fn = {});

/// Validates the grid and the decay invariant; throws DecayError when the
/// last quarter of the t-grid is not below kDecayThreshold of the maximum.
DownwashSpec samples_downwash(TimeSamples samples);

/// Reads a long-format CSV with header `t,x,w` on a full tensor grid.
TimeSamples read_time_samples_csv(const std::filesystem::path& path);

/// `downwash` config section: mode, k, amplitude, shape, name, rate, file.
DownwashSpec downwash_from_yaml(const YAML::Node& node, const cheb::GridPtr& grid,
                                const std::filesystem::path& base_dir);

/// w_hat(., s) on the grid. Time samples are integrated exactly against the
/// local cubic interpolant and require Re s > 0.
cheb::ChordFunction laplace_transform(const DownwashSpec& spec, cplx s, const cheb::GridPtr& grid);

/// Harmonic amplitude w0 on the grid.
cheb::ChordFunction harmonic_amplitude(const DownwashSpec& spec, const cheb::GridPtr& grid);

/// True when w(x, t) is real, so w_hat(x, conj s) = conj w_hat(x, s).
bool is_real_valued(const DownwashSpec& spec);

/// w(x, t) in the time domain.
cplx downwash_value(const DownwashSpec& spec, double x, double t);

struct DecaySample {
    double nu;
    double log_norm;   ///< log of the largest L2 norm over the sampled sigmas
    double log_bound;  ///< -e^{|nu|} (1 + |nu|)^{4 + epsilon}
    bool met;
};

struct DecayReport {
    std::vector<DecaySample> samples;
    bool all_met = false;
    std::optional<double> met_beyond;  ///< smallest grid nu from which every sample meets the bound
    std::optional<double> crossover;   ///< last grid nu at which the status changes
};

/// Advisory check of the strip hypothesis on nu in [0, nu_max].
DecayReport check_decay_hypothesis(const DownwashSpec& spec, const FlowParams& params, double sigma_lo,
                                   double sigma_hi, double epsilon, const cheb::GridPtr& grid,
                                   double nu_max = 10.0, std::size_t n_nu = 101);

/// Uniform symmetric contour sigma + i nu_j, nu_j = j dnu, |j| <= J. J is
/// rounded up to a multiple of 4 so the coarsened contour (half the extent,
/// twice the step) is a subset of the samples.
struct Contour {
    double sigma = 1.025;
    double nu_max = 40.0;
    double dnu = 0.05;

    std::size_t half_count() const;
    std::vector<cplx> points() const;
};

struct BromwichResult {
    cplx value;
    cplx coarse_value;
    double rel_change = 0.0;
    bool gate_passed = false;
};

inline constexpr double kGateTolerance = 1e-4;

/// Trapezoidal sum over the samples (ordered as Contour::points) and the
/// self-convergence gate against the coarsened contour. Throws
/// ConvergenceError when the gate fails and `enforce` is set.
BromwichResult bromwich_sum(const Contour& contour, std::span<const cplx> values, double t,
                            double gate_tol = kGateTolerance, bool enforce = true);

/// Same, sampling F on the contour.
BromwichResult bromwich_invert(const std::function<cplx(cplx)>& F, const Contour& contour, double t,
                               double gate_tol = kGateTolerance, bool enforce = true);

/// Several times at once from one set of samples.
std::vector<BromwichResult> bromwich_sum(const Contour& contour, std::span<const cplx> values,
                                         std::span<const double> times, double gate_tol = kGateTolerance,
                                         bool enforce = true);

}  // namespace possio::laplace
