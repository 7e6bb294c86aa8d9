#include "possio/laplace.hpp"

#include "possio/errors.hpp"
#include "possio/yaml_util.hpp"

#include <Eigen/Dense>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <array>
#include <numbers>
#include <sstream>

namespace possio::laplace {

namespace {

using std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double polynomial(std::span<const double> c, double x) {
    double v = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) v = v * x + c[m];
    return v;
}

/// int_0^1 u^m e^{-zu} du for m = 0..3.
std::array<cplx, 4> exp_moments(cplx z) {
    std::array<cplx, 4> J{};
    if (std::abs(z) <= 1.0) {
        for (int m = 0; m < 4; ++m) {
            cplx term = 1.0, sum = 1.0 / (m + 1.0);
            for (int k = 1; k < 40; ++k) {
                term *= -z / static_cast<double>(k);
                const cplx add = term / (m + k + 1.0);
                sum += add;
                if (std::abs(add) < 1e-18 * std::abs(sum)) break;
            }
            J[m] = sum;
        }
        return J;
    }
    const cplx e = std::exp(-z);
    J[0] = (1.0 - e) / z;
    for (int m = 1; m < 4; ++m) J[m] = (static_cast<double>(m) * J[m - 1] - e) / z;
    return J;
}

/// Per-interval cubic coefficients in u = (t - t_i)/h_i of the local
/// four-point interpolant, for every x column; layout [interval][column][4].
std::vector<double> cubic_coefficients(const TimeSamples& s) {
    const std::size_t nt = s.t.size(), nx = s.x.size();
    std::vector<double> out((nt - 1) * nx * 4);
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        const std::size_t b = std::min(i > 0 ? i - 1 : 0, nt - 4);
        const double h = s.t[i + 1] - s.t[i];
        Eigen::Matrix4d V;
        for (int r = 0; r < 4; ++r) {
            const double u = (s.t[b + r] - s.t[i]) / h;
            V(r, 0) = 1.0, V(r, 1) = u, V(r, 2) = u * u, V(r, 3) = u * u * u;
        }
        const Eigen::Matrix4d inv = V.inverse();
        for (std::size_t j = 0; j < nx; ++j) {
            Eigen::Vector4d y;
            for (int r = 0; r < 4; ++r) y(r) = s.at(b + r, j);
            const Eigen::Vector4d c = inv * y;
            for (int m = 0; m < 4; ++m) out[(i * nx + j) * 4 + m] = c(m);
        }
    }
    return out;
}

/// Lagrange weights over at most four neighbouring x columns.
std::vector<std::pair<std::size_t, double>> x_weights(const std::vector<double>& xs, double x) {
    const std::size_t nx = xs.size();
    if (nx == 1) return {{0, 1.0}};
    const std::size_t m = std::min<std::size_t>(4, nx);
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    hi = std::clamp<std::size_t>(hi, 1, nx - 1);
    std::size_t b = hi >= m / 2 ? hi - m / 2 : 0;
    b = std::min(b, nx - m);
    std::vector<std::pair<std::size_t, double>> w;
    for (std::size_t r = 0; r < m; ++r) {
        double l = 1.0;
        for (std::size_t q = 0; q < m; ++q)
            if (q != r) l *= (x - xs[b + q]) / (xs[b + r] - xs[b + q]);
        w.emplace_back(b + r, l);
    }
    return w;
}

cplx chord_value(const cheb::ChordFunction& f, double x) {
    const auto c = cheb::cos_coeffs(*f.grid, f.values);
    return cheb::clenshaw(c, x);
}

cheb::ChordFunction resample(const cheb::ChordFunction& f, const cheb::GridPtr& grid) {
    if (f.grid->same_as(*grid)) return {grid, f.values, f.endpoint_class};
    const auto c = cheb::cos_coeffs(*f.grid, f.values);
    cheb::ChordFunction out{grid, cheb::CVec(grid->n()), f.endpoint_class};
    for (std::size_t j = 0; j < grid->n(); ++j) out.values[j] = cheb::clenshaw(c, grid->nodes()[j]);
    return out;
}

}  // namespace

DownwashSpec harmonic_downwash(cheb::ChordFunction w0, double k) {
    if (!std::isfinite(k)) throw ConfigError("harmonic downwash: frequency k must be finite");
    if (!w0.grid) throw ConfigError("harmonic downwash: amplitude has no grid");
    for (const cplx& v : w0.values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw ConfigError("harmonic downwash: amplitude must be bounded");
        }
    }
    if (w0.endpoint_class != cheb::EndpointClass::bounded) {
        throw ConfigError("harmonic downwash: amplitude must be of bounded class");
    }
    DownwashSpec d;
    d.mode = DownwashMode::harmonic;
    d.w0 = std::move(w0);
    d.k = k;
    return d;
}

DownwashSpec closure_downwash(std::string name, ClosureFn fn, TimeFn time_fn) {
    if (!fn) throw ConfigError("laplace closure '" + name + "' is empty");
    DownwashSpec d;
    d.mode = DownwashMode::laplace_closure;
    d.closure_name = std::move(name);
    d.closure = std::move(fn);
    d.closure_time = std::move(time_fn);
    return d;
}

DownwashSpec builtin_closure(const std::string& name, double amplitude, std::span<const double> shape,
                             double k, double rate) {
    std::vector<double> c(shape.begin(), shape.end());
    if (c.empty()) c = {1.0};
    auto space = [c, amplitude](double x) { return amplitude * polynomial(c, x); };
    if (name == "harmonic") {
        if (!std::isfinite(k)) throw ConfigError("harmonic closure: k must be finite");
        return closure_downwash(
            name, [space, k](double x, cplx s) { return space(x) / (s - kI * k); },
            [space, k](double x, double t) { return t < 0.0 ? cplx(0.0) : space(x) * std::exp(kI * (k * t)); });
    }
    if (name == "step") {
        return closure_downwash(
            name, [space](double x, cplx s) { return space(x) / s; },
            [space](double x, double t) { return cplx(t < 0.0 ? 0.0 : space(x)); });
    }
    if (name == "decaying-exponential") {
        if (!(rate > 0.0)) throw ConfigError("decaying-exponential closure: rate must be positive");
        return closure_downwash(
            name, [space, rate](double x, cplx s) { return space(x) / (s + rate); },
            [space, rate](double x, double t) { return cplx(t < 0.0 ? 0.0 : space(x) * std::exp(-rate * t)); });
    }
    throw ConfigError("unknown laplace closure '" + name + "' (known: harmonic, step, decaying-exponential)");
}

DownwashSpec samples_downwash(TimeSamples s) {
    const std::size_t nt = s.t.size(), nx = s.x.size();
    if (nt < 4) throw ConfigError("time samples need at least 4 time points");
    if (nx < 1) throw ConfigError("time samples need at least one x column");
    if (s.w.size() != nt * nx) throw ConfigError("time samples do not fill the t-x grid");
    if (!std::is_sorted(s.t.begin(), s.t.end()) || std::adjacent_find(s.t.begin(), s.t.end()) != s.t.end()) {
        throw ConfigError("time grid must be strictly increasing");
    }
    if (!std::is_sorted(s.x.begin(), s.x.end()) || std::adjacent_find(s.x.begin(), s.x.end()) != s.x.end()) {
        throw ConfigError("x grid must be strictly increasing");
    }
    if (s.t.front() < 0.0) throw ConfigError("time samples must start at t >= 0");
    if (nx > 1 && (s.x.front() > -1.0 + 1e-9 || s.x.back() < 1.0 - 1e-9)) {
        throw ConfigError("time-sample x grid must cover the chord [-1, 1]");
    }
    for (double v : s.w)
        if (!std::isfinite(v)) throw ConfigError("time samples contain non-finite values");
    double peak = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            const double a = std::abs(s.at(i, j));
            peak = std::max(peak, a);
            if (4 * i >= 3 * nt) tail = std::max(tail, a);
        }
    }
    s.tail_ratio = peak > 0.0 ? tail / peak : 0.0;
    if (s.tail_ratio >= kDecayThreshold) {
        std::ostringstream os;
        os << "time samples do not decay: last-quarter maximum is " << s.tail_ratio
           << " of the peak (needs < " << kDecayThreshold << ")";
        throw DecayError(os.str());
    }
    s.cubic = cubic_coefficients(s);
    DownwashSpec d;
    d.mode = DownwashMode::time_samples;
    d.samples = std::move(s);
    return d;
}

TimeSamples read_time_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open time-sample file '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto a = cell.find_first_not_of(" \t\r");
            const auto b = cell.find_last_not_of(" \t\r");
            out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
        }
        return out;
    };
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
    const auto header = split(line);
    if (header != std::vector<std::string>{"t", "x", "w"}) {
        throw ConfigError(path.string() + ": header must be 't,x,w'");
    }
    struct Row {
        double t, x, w;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != 3) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
        }
        Row r{};
        try {
            std::size_t used = 0;
            double* dst[3] = {&r.t, &r.x, &r.w};
            for (int c = 0; c < 3; ++c) {
                *dst[c] = std::stod(cells[static_cast<std::size_t>(c)], &used);
                if (used != cells[static_cast<std::size_t>(c)].size()) throw std::invalid_argument("");
            }
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
        rows.push_back(r);
    }
    TimeSamples s;
    for (const Row& r : rows) s.t.push_back(r.t), s.x.push_back(r.x);
    std::sort(s.t.begin(), s.t.end());
    s.t.erase(std::unique(s.t.begin(), s.t.end()), s.t.end());
    std::sort(s.x.begin(), s.x.end());
    s.x.erase(std::unique(s.x.begin(), s.x.end()), s.x.end());
    if (rows.size() != s.t.size() * s.x.size()) {
        throw ConfigError(path.string() + ": samples do not form a full t-x tensor grid");
    }
    s.w.assign(rows.size(), std::nan(""));
    for (const Row& r : rows) {
        const auto i = static_cast<std::size_t>(std::lower_bound(s.t.begin(), s.t.end(), r.t) - s.t.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(s.x.begin(), s.x.end(), r.x) - s.x.begin());
        double& slot = s.w[i * s.x.size() + j];
        if (!std::isnan(slot)) throw ConfigError(path.string() + ": duplicate sample");
        slot = r.w;
    }
    return s;
}

DownwashSpec downwash_from_yaml(const YAML::Node& node, const cheb::GridPtr& grid,
                                const std::filesystem::path& base_dir) {
    namespace y = possio::yaml;
    y::require_map(node, "downwash");
    y::reject_unknown_keys(node, "downwash", {"mode", "k", "amplitude", "shape", "name", "rate", "file"});
    const std::string mode = y::optional_string(node, "mode", "downwash", "harmonic");
    const double amplitude = y::optional_double(node, "amplitude", "downwash", 1.0);
    const std::vector<double> shape = y::optional_doubles(node, "shape", "downwash", {1.0});
    const double k = y::optional_double(node, "k", "downwash", 0.0);
    if (mode == "harmonic") {
        cheb::ChordFunction w0{grid, cheb::CVec(grid->n()), cheb::EndpointClass::bounded};
        for (std::size_t j = 0; j < grid->n(); ++j) w0.values[j] = amplitude * polynomial(shape, grid->nodes()[j]);
        return harmonic_downwash(std::move(w0), k);
    }
    if (mode == "closure") {
        const std::string name = y::optional_string(node, "name", "downwash", "");
        if (name.empty()) throw ConfigError(y::where(node) + "downwash.name is required for mode 'closure'");
        return builtin_closure(name, amplitude, shape, k, y::optional_double(node, "rate", "downwash", 1.0));
    }
    if (mode == "time_samples") {
        const std::string file = y::optional_string(node, "file", "downwash", "");
        if (file.empty()) throw ConfigError(y::where(node) + "downwash.file is required for mode 'time_samples'");
        std::filesystem::path p(file);
        if (p.is_relative()) p = base_dir / p;
        return samples_downwash(read_time_samples_csv(p));
    }
    throw ConfigError(y::where(node["mode"]) + "unknown downwash mode '" + mode +
                      "' (known: harmonic, closure, time_samples)");
}

namespace {

/// Laplace transform of each x column of the sampled data.
std::vector<cplx> column_transforms(const TimeSamples& s, const std::vector<double>& cubic, cplx z) {
    const std::size_t nt = s.t.size(), nx = s.x.size();
    std::vector<cplx> out(nx, 0.0);
    // moments and the exponential step are reused while the spacing repeats
    double h_prev = -1.0;
    std::array<cplx, 4> J{};
    cplx step = 0.0, pre_exp = 0.0;
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        const double h = s.t[i + 1] - s.t[i];
        const bool same = h == h_prev;
        if (!same) {
            J = exp_moments(z * h);
            step = std::exp(-z * h);
            h_prev = h;
        }
        pre_exp = (same && i % 32 != 0) ? pre_exp * step : std::exp(-z * s.t[i]);
        const cplx pre = h * pre_exp;
        for (std::size_t j = 0; j < nx; ++j) {
            const double* c = &cubic[(i * nx + j) * 4];
            out[j] += pre * (c[0] * J[0] + c[1] * J[1] + c[2] * J[2] + c[3] * J[3]);
        }
    }
    return out;
}

}  // namespace

cheb::ChordFunction laplace_transform(const DownwashSpec& spec, cplx s, const cheb::GridPtr& grid) {
    cheb::ChordFunction out{grid, cheb::CVec(grid->n()), cheb::EndpointClass::bounded};
    switch (spec.mode) {
        case DownwashMode::harmonic: {
            const cplx denom = s - kI * spec.k;
            if (denom == cplx(0.0)) throw DomainError("harmonic downwash transform has a pole at s = ik");
            const auto w0 = resample(spec.w0, grid);
            for (std::size_t j = 0; j < grid->n(); ++j) out.values[j] = w0.values[j] / denom;
            return out;
        }
        case DownwashMode::laplace_closure:
            for (std::size_t j = 0; j < grid->n(); ++j) out.values[j] = spec.closure(grid->nodes()[j], s);
            return out;
        case DownwashMode::time_samples: {
            if (!(s.real() > 0.0)) throw DomainError("time-sample Laplace transform requires Re s > 0");
            if (spec.samples.cubic.empty()) throw ConfigError("time samples were not validated");
            const auto cols = column_transforms(spec.samples, spec.samples.cubic, s);
            for (std::size_t j = 0; j < grid->n(); ++j) {
                cplx v = 0.0;
                for (const auto& [col, wt] : x_weights(spec.samples.x, grid->nodes()[j])) v += wt * cols[col];
                out.values[j] = v;
            }
            return out;
        }
    }
    throw ConfigError("unknown downwash mode");
}

cheb::ChordFunction harmonic_amplitude(const DownwashSpec& spec, const cheb::GridPtr& grid) {
    if (spec.mode != DownwashMode::harmonic) throw ConfigError("downwash is not in harmonic mode");
    return resample(spec.w0, grid);
}

bool is_real_valued(const DownwashSpec& spec) {
    auto real_values = [](const cheb::ChordFunction& f) {
        return std::all_of(f.values.begin(), f.values.end(), [](const cplx& v) { return v.imag() == 0.0; });
    };
    switch (spec.mode) {
        case DownwashMode::harmonic:
            return spec.k == 0.0 && real_values(spec.w0);
        case DownwashMode::laplace_closure:
            return spec.closure_name == "step" || spec.closure_name == "decaying-exponential";
        case DownwashMode::time_samples:
            return true;
    }
    return false;
}

cplx downwash_value(const DownwashSpec& spec, double x, double t) {
    switch (spec.mode) {
        case DownwashMode::harmonic:
            return chord_value(spec.w0, x) * std::exp(kI * (spec.k * t));
        case DownwashMode::laplace_closure:
            if (!spec.closure_time) {
                throw ConfigError("closure '" + spec.closure_name + "' has no time-domain form");
            }
            return spec.closure_time(x, t);
        case DownwashMode::time_samples: {
            const TimeSamples& s = spec.samples;
            if (t < s.t.front() || t > s.t.back()) return 0.0;
            std::size_t i = static_cast<std::size_t>(std::upper_bound(s.t.begin(), s.t.end(), t) - s.t.begin());
            i = std::min(i, s.t.size() - 1) - 1;
            const std::size_t nt = s.t.size();
            const std::size_t b = std::min(i > 0 ? i - 1 : 0, nt - 4);
            cplx v = 0.0;
            for (const auto& [col, wt] : x_weights(s.x, x)) {
                double l = 0.0;
                for (std::size_t r = 0; r < 4; ++r) {
                    double basis = 1.0;
                    for (std::size_t q = 0; q < 4; ++q)
                        if (q != r) basis *= (t - s.t[b + q]) / (s.t[b + r] - s.t[b + q]);
                    l += basis * s.at(b + r, col);
                }
                v += wt * l;
            }
            return v;
        }
    }
    throw ConfigError("unknown downwash mode");
}

DecayReport check_decay_hypothesis(const DownwashSpec& spec, const FlowParams& params, double sigma_lo,
                                   double sigma_hi, double epsilon, const cheb::GridPtr& grid, double nu_max,
                                   std::size_t n_nu) {
    if (sigma_lo > sigma_hi || !params.in_strip(sigma_lo) || !params.in_strip(sigma_hi)) {
        throw DomainError("decay check strip must lie within [sigma1, sigma2]");
    }
    if (n_nu < 2 || !(nu_max > 0.0)) throw ConfigError("decay check needs nu_max > 0 and at least 2 samples");
    const double sigmas[3] = {sigma_lo, 0.5 * (sigma_lo + sigma_hi), sigma_hi};
    DecayReport rep;
    for (std::size_t i = 0; i < n_nu; ++i) {
        const double nu = nu_max * static_cast<double>(i) / static_cast<double>(n_nu - 1);
        double norm = 0.0;
        for (double sg : sigmas) {
            const auto w = laplace_transform(spec, cplx(sg, nu), grid);
            double sq = 0.0;
            for (std::size_t j = 0; j < grid->n(); ++j) sq += grid->quad_weights()[j] * std::norm(w.values[j]);
            norm = std::max(norm, std::sqrt(sq));
        }
        DecaySample d;
        d.nu = nu;
        d.log_norm = norm > 0.0 ? std::log(norm) : -HUGE_VAL;
        d.log_bound = -std::exp(nu) * std::pow(1.0 + nu, 4.0 + epsilon);
        d.met = d.log_norm < d.log_bound;
        rep.samples.push_back(d);
    }
    rep.all_met = std::all_of(rep.samples.begin(), rep.samples.end(), [](const DecaySample& d) { return d.met; });
    if (rep.samples.back().met) {
        std::size_t i = rep.samples.size() - 1;
        while (i > 0 && rep.samples[i - 1].met) --i;
        rep.met_beyond = rep.samples[i].nu;
    }
    for (std::size_t i = rep.samples.size(); i-- > 1;) {
        if (rep.samples[i].met != rep.samples[i - 1].met) {
            rep.crossover = rep.samples[i].nu;
            break;
        }
    }
    return rep;
}

std::size_t Contour::half_count() const {
    if (!(dnu > 0.0) || !(nu_max > 0.0) || !std::isfinite(nu_max / dnu)) {
        throw ConfigError("contour needs nu_max > 0 and dnu > 0");
    }
    const double ratio = nu_max / dnu;
    if (ratio > 1e8) throw ConfigError("contour has too many samples (nu_max / dnu > 1e8)");
    auto J = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    J = std::max<std::size_t>(4, (J + 3) / 4 * 4);
    return J;
}

std::vector<cplx> Contour::points() const {
    const std::size_t J = half_count();
    std::vector<cplx> p;
    p.reserve(2 * J + 1);
    for (std::size_t i = 0; i <= 2 * J; ++i) {
        const double j = static_cast<double>(i) - static_cast<double>(J);
        p.emplace_back(sigma, j * dnu);
    }
    return p;
}

namespace {

struct Accumulator {
    cplx fine = 0.0, coarse = 0.0;
};

/// Adds the symmetric pair (j, -j) of the fine and coarse trapezoidal sums.
void accumulate(Accumulator& acc, std::size_t J, std::size_t j, cplx term_pos, cplx term_neg) {
    const cplx pair = j == 0 ? term_pos : term_pos + term_neg;
    const double wf = j == J ? 0.5 : 1.0;
    acc.fine += wf * pair;
    if (j % 2 == 0 && j <= J / 2) {
        const double wc = j == J / 2 ? 0.5 : 1.0;
        acc.coarse += 2.0 * wc * pair;
    }
}

BromwichResult finish(const Accumulator& acc, double dnu, double gate_tol, bool enforce, double t) {
    BromwichResult r;
    r.value = acc.fine * (dnu / (2.0 * pi));
    r.coarse_value = acc.coarse * (dnu / (2.0 * pi));
    const double scale = std::max(std::abs(r.value), std::abs(r.coarse_value));
    r.rel_change = scale > 0.0 ? std::abs(r.value - r.coarse_value) / scale : 0.0;
    r.gate_passed = r.rel_change < gate_tol;
    if (enforce && !r.gate_passed) {
        std::ostringstream os;
        os << "Bromwich sum at t = " << t << " failed the self-convergence gate: relative change "
           << r.rel_change << " >= " << gate_tol;
        throw ConvergenceError(os.str());
    }
    return r;
}

}  // namespace

std::vector<BromwichResult> bromwich_sum(const Contour& contour, std::span<const cplx> values,
                                         std::span<const double> times, double gate_tol, bool enforce) {
    const std::size_t J = contour.half_count();
    if (values.size() != 2 * J + 1) throw ConfigError("Bromwich samples do not match the contour");
    std::vector<BromwichResult> out;
    for (double t : times) {
        Accumulator acc;
        for (std::size_t j = 0; j <= J; ++j) {
            const double nu = static_cast<double>(j) * contour.dnu;
            const cplx ep = std::exp(cplx(contour.sigma * t, nu * t));
            const cplx en = std::exp(cplx(contour.sigma * t, -nu * t));
            accumulate(acc, J, j, ep * values[J + j], en * values[J - j]);
        }
        out.push_back(finish(acc, contour.dnu, gate_tol, enforce, t));
    }
    return out;
}

BromwichResult bromwich_sum(const Contour& contour, std::span<const cplx> values, double t, double gate_tol,
                            bool enforce) {
    const double times[1] = {t};
    return bromwich_sum(contour, values, times, gate_tol, enforce).front();
}

BromwichResult bromwich_invert(const std::function<cplx(cplx)>& F, const Contour& contour, double t,
                               double gate_tol, bool enforce) {
    const std::size_t J = contour.half_count();
    Accumulator acc;
    for (std::size_t j = 0; j <= J; ++j) {
        const double nu = static_cast<double>(j) * contour.dnu;
        const cplx sp(contour.sigma, nu), sn(contour.sigma, -nu);
        accumulate(acc, J, j, std::exp(sp * t) * F(sp), j == 0 ? cplx(0.0) : std::exp(sn * t) * F(sn));
    }
    return finish(acc, contour.dnu, gate_tol, enforce, t);
}

}  // namespace possio::laplace
