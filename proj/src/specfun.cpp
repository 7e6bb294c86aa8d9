#include "possio/specfun.hpp"

#include "possio/errors.hpp"
#include "possio/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace possio::specfun {

namespace {

using std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr cplx kI{0.0, 1.0};
constexpr std::size_t kLaguerreOrder = 32;

struct LaguerreTables {
    quad::Rule order0;  // alpha = -1/2
    quad::Rule order1;  // alpha = +1/2
};

const LaguerreTables& laguerre_tables() {
    static const LaguerreTables t{quad::gauss_laguerre(kLaguerreOrder, -0.5),
                                  quad::gauss_laguerre(kLaguerreOrder, 0.5)};
    return t;
}

struct SeriesValues {
    cplx j0, j1, y0, y1_regular;  // y1_regular = Y1 + 2/(pi z)
};

SeriesValues series(cplx z) {
    const cplx q = 0.25 * z * z;
    const cplx log_half = std::log(0.5 * z);

    cplx t = 1.0;   // (-q)^k / (k!)^2
    cplx u = 1.0;   // (-q)^k / (k! (k+1)!)
    cplx sj0 = 1.0, sj1 = 1.0;
    cplx sy0 = 0.0;                       // sum_{k>=1} H_k t_k
    double harmonic = 0.0;                // H_k
    cplx sy1 = (-2.0 * kEulerGamma + 1.0) * u;  // sum (psi(k+1)+psi(k+2)) u_k, k = 0 term
    for (int k = 1; k < 200; ++k) {
        const double kk = k;
        t *= -q / (kk * kk);
        u *= -q / (kk * (kk + 1.0));
        harmonic += 1.0 / kk;
        const double harmonic_next = harmonic + 1.0 / (kk + 1.0);
        sj0 += t;
        sj1 += u;
        sy0 += harmonic * t;
        sy1 += (-2.0 * kEulerGamma + harmonic + harmonic_next) * u;
        const double scale = std::abs(t) * (1.0 + harmonic);
        if (scale < 1e-18 * std::abs(sj0) && std::abs(u) * (1.0 + harmonic_next) < 1e-18 * std::abs(sj1) &&
            kk > std::abs(q)) {
            break;
        }
    }
    SeriesValues v;
    v.j0 = sj0;
    v.j1 = 0.5 * z * sj1;
    v.y0 = (2.0 / pi) * ((log_half + kEulerGamma) * v.j0 - sy0);
    v.y1_regular = (2.0 / pi) * log_half * v.j1 - (1.0 / pi) * 0.5 * z * sy1;
    return v;
}

/// H0 and H1 from the Laplace-type integral; valid for -pi/2 < arg z <= pi.
std::pair<cplx, cplx> hankel_integral(cplx z) {
    const auto& tab = laguerre_tables();
    const cplx step = kI / (2.0 * z);
    cplx s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < kLaguerreOrder; ++i) {
        s0 += tab.order0.weights[i] / std::sqrt(1.0 + tab.order0.nodes[i] * step);
        s1 += tab.order1.weights[i] * std::sqrt(1.0 + tab.order1.nodes[i] * step);
    }
    const cplx pre = std::sqrt(2.0 / (pi * z));
    const cplx h0 = pre * std::exp(kI * (z - 0.25 * pi)) * s0 / std::sqrt(pi);
    const cplx h1 = pre * std::exp(kI * (z - 0.75 * pi)) * s1 / (0.5 * std::sqrt(pi));
    return {h0, h1};
}

void check_domain(cplx z, Branch branch) {
    if (z == cplx(0.0, 0.0)) throw DomainError("Hankel functions are singular at z = 0");
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("non-finite Hankel argument");
    if (branch == Branch::large_argument && !(std::arg(z) > -0.5 * pi)) {
        throw DomainError("Hankel large-argument branch requires -pi/2 < arg z <= pi");
    }
}

}  // namespace

HankelPair hankel01(cplx z, Branch branch) {
    check_domain(z, branch);
    if (branch == Branch::series) {
        const SeriesValues v = series(z);
        const cplx h1_reg = v.j1 + kI * v.y1_regular;
        return {v.j0 + kI * v.y0, h1_reg - 2.0 * kI / (pi * z), h1_reg, Branch::series};
    }
    const auto [h0, h1] = hankel_integral(z);
    return {h0, h1, h1 + 2.0 * kI / (pi * z), Branch::large_argument};
}

HankelPair hankel01(cplx z) {
    return hankel01(z, std::abs(z) < kSeriesRadius ? Branch::series : Branch::large_argument);
}

cplx hankel1_0(cplx z) { return hankel01(z).h0; }
cplx hankel1_1(cplx z) { return hankel01(z).h1; }
cplx hankel1_1_regular(cplx z) { return hankel01(z).h1_regular; }

BesselEval bessel_eval(cplx z) {
    const HankelPair h = hankel01(z);
    BesselEval e;
    e.z = z;
    e.h0 = h.h0;
    e.h1 = h.h1;
    e.branch_used = h.branch;
    if (h.branch == Branch::series) {
        const SeriesValues v = series(z);
        e.j0 = v.j0;
        e.j1 = v.j1;
        e.y0 = v.y0;
        e.y1 = v.y1_regular - 2.0 / (pi * z);
        return e;
    }
    // J = (H1 + H2)/2 with H2(w) = conj(H1(conj w)); reflect into Re z > 0
    // first. Near the imaginary axis the conjugate integral has a branch point
    // close to its path, so use the ascending series while its cancellation
    // (about e^{|z| - |Im z|}) stays small.
    if (std::abs(z) - std::abs(z.imag()) < 9.0) {
        if (std::abs(z) > 700.0) throw DomainError("bessel_eval: |z| too large near the imaginary axis");
        const SeriesValues v = series(z);
        e.j0 = v.j0;
        e.j1 = v.j1;
    } else {
        const cplx w = z.real() > 0.0 ? z : -z;
        const auto [h0w, h1w] = hankel_integral(w);
        const auto [h0c, h1c] = hankel_integral(std::conj(w));
        const cplx j0w = 0.5 * (h0w + std::conj(h0c));
        const cplx j1w = 0.5 * (h1w + std::conj(h1c));
        e.j0 = j0w;
        e.j1 = z.real() > 0.0 ? j1w : -j1w;
    }
    e.y0 = (e.h0 - e.j0) / kI;
    e.y1 = (e.h1 - e.j1) / kI;
    return e;
}

}  // namespace possio::specfun
