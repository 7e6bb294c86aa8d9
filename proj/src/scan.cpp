#include "possio/errors.hpp"
#include "possio/fredholm.hpp"
#include "possio/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace possio::fredholm {

namespace {

using std::numbers::pi;

struct Candidate {
    cplx s;
    double step;
    std::size_t cell_i, cell_j;  // lower-left sample of the cell
};

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return v;
}

}  // namespace

DeterminantScan scan_function(const std::function<cplx(cplx)>& D, const ScanSpec& spec) {
    if (!(spec.sigma_lo <= spec.sigma_hi)) throw ConfigError("scan strip requires sigma_lo <= sigma_hi");
    if (spec.n_sigma < 1 || spec.n_nu < 1) throw ConfigError("scan resolution must be positive");
    if (!(spec.nu_max >= 0.0)) throw ConfigError("scan nu_max must be non-negative");

    DeterminantScan scan;
    scan.spec = spec;
    const std::size_t ns = spec.sigma_lo == spec.sigma_hi ? 1 : spec.n_sigma;
    scan.spec.n_sigma = ns;
    const std::size_t nv = spec.n_nu;
    const std::vector<double> sig = linspace(spec.sigma_lo, spec.sigma_hi, ns);
    const std::vector<double> nu = nv == 1 ? std::vector<double>{0.0} : linspace(-spec.nu_max, spec.nu_max, nv);

    scan.samples.resize(ns * nv);
    parallel_for(ns * nv, [&](std::size_t k) {
        const std::size_t i = k / nv, j = k % nv;
        scan.samples[k] = {sig[i], nu[j], D(cplx(sig[i], nu[j])), false};
    });
    auto at = [&](std::size_t i, std::size_t j) -> ScanSample& { return scan.samples[i * nv + j]; };
    for (const auto& s : scan.samples) scan.max_modulus = std::max(scan.max_modulus, std::abs(s.value));
    const double dnu = nv > 1 ? nu[1] - nu[0] : 1.0;
    const double dsig = ns > 1 ? sig[1] - sig[0] : dnu;

    std::vector<Candidate> cands;
    if (ns > 1 && nv > 1) {
        for (std::size_t i = 0; i + 1 < ns; ++i) {
            for (std::size_t j = 0; j + 1 < nv; ++j) {
                const cplx c[4] = {at(i, j).value, at(i + 1, j).value, at(i + 1, j + 1).value, at(i, j + 1).value};
                if (std::any_of(c, c + 4, [](cplx v) { return v == cplx(0.0); })) {
                    cands.push_back({cplx(0.5 * (sig[i] + sig[i + 1]), 0.5 * (nu[j] + nu[j + 1])), 0.25 * dnu, i, j});
                    continue;
                }
                double turn = 0.0;
                for (int e = 0; e < 4; ++e) turn += std::arg(c[(e + 1) % 4] / c[e]);
                if (std::lround(turn / (2.0 * pi)) != 0) {
                    cands.push_back({cplx(0.5 * (sig[i] + sig[i + 1]), 0.5 * (nu[j] + nu[j + 1])), 0.25 * dnu, i, j});
                }
            }
        }
    }
    // local minima of |D| that are small relative to the scan maximum
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
            const double m = std::abs(at(i, j).value);
            if (!(m < 1e-2 * scan.max_modulus)) continue;
            bool minimum = true;
            for (int di = -1; di <= 1 && minimum; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
                    if (ii < 0 || jj < 0 || ii >= static_cast<long>(ns) || jj >= static_cast<long>(nv)) continue;
                    if (std::abs(at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj)).value) < m) {
                        minimum = false;
                        break;
                    }
                }
            }
            if (minimum) {
                cands.push_back({cplx(sig[i], nu[j]), 0.25 * std::min(dnu, dsig), std::min(i, ns > 1 ? ns - 2 : 0),
                                 std::min(j, nv > 1 ? nv - 2 : 0)});
            }
        }
    }

    const double tol = spec.zero_tolerance * scan.max_modulus;
    const double margin = std::max(dsig, dnu);
    for (const Candidate& c : cands) {
        ScanZero z;
        z.suspect = true;
        try {
            cplx s0 = c.s, s1 = c.s + cplx(c.step, 0.5 * c.step);
            cplx d0 = D(s0), d1 = D(s1);
            for (std::size_t it = 0; it < spec.secant_iterations; ++it) {
                if (std::abs(d1) <= 0.1 * tol || d1 == d0) break;
                const cplx s2 = s1 - d1 * (s1 - s0) / (d1 - d0);
                if (!std::isfinite(s2.real()) || !std::isfinite(s2.imag())) break;
                s0 = s1;
                d0 = d1;
                s1 = s2;
                d1 = D(s1);
                if (std::abs(s1 - s0) < 1e-13 * (1.0 + std::abs(s1))) break;
            }
            z.s = s1;
            z.value = d1;
            z.residual = scan.max_modulus > 0.0 ? std::abs(d1) / scan.max_modulus : 0.0;
            const bool inside = s1.real() >= spec.sigma_lo - margin && s1.real() <= spec.sigma_hi + margin &&
                                std::abs(s1.imag()) <= spec.nu_max + margin;
            z.suspect = !(std::abs(d1) < tol && inside);
            if (!inside && !z.suspect) continue;
        } catch (const Error&) {
            z.s = c.s;
            z.value = D(c.s);
            z.residual = scan.max_modulus > 0.0 ? std::abs(z.value) / scan.max_modulus : 0.0;
        }
        const bool duplicate = std::any_of(scan.zeros.begin(), scan.zeros.end(), [&](const ScanZero& o) {
            return std::abs(o.s - z.s) < 1e-6 * (1.0 + std::abs(z.s)) && o.suspect == z.suspect;
        });
        if (duplicate) continue;
        scan.zeros.push_back(z);
        for (std::size_t di = 0; di <= 1; ++di) {
            for (std::size_t dj = 0; dj <= 1; ++dj) {
                const std::size_t ii = std::min(c.cell_i + di, ns - 1), jj = std::min(c.cell_j + dj, nv - 1);
                at(ii, jj).zero_flag = true;
            }
        }
    }
    return scan;
}

DeterminantScan scan_determinant(const ScanSpec& spec, const FlowParams& params, const cheb::GridPtr& grid,
                                 const BuildOptions& opt) {
    if (spec.sigma_lo < params.sigma1 || spec.sigma_hi > params.sigma2) {
        throw ConfigError("scan strip must lie inside [sigma1, sigma2]");
    }
    return scan_function([&](cplx s) { return determinant(build_N(s, grid, params, opt), 2).value; }, spec);
}

}  // namespace possio::fredholm
