#pragma once

// Complex Bessel and Hankel functions of orders 0 and 1.
//
// |z| < kSeriesRadius: ascending series (J) and the log-series for Y.
// |z| >= kSeriesRadius: the steepest-descent Laplace integral
//   H_nu(z) = sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} / Gamma(nu + 1/2)
//             * int_0^inf e^{-u} u^{nu - 1/2} (1 + i u / (2z))^{nu - 1/2} du
// evaluated with a 32-point generalized Gauss-Laguerre rule. The integral
// form holds for -pi/2 < arg z <= pi, which covers the closed upper
// half-plane where every kernel argument lives.

#include <complex>

namespace possio::specfun {

using cplx = std::complex<double>;

inline constexpr double kSeriesRadius = 3.0;

enum class Branch { series, large_argument };

/// H0, H1 and the pole-free part H1 + 2i/(pi z), evaluated together.
struct HankelPair {
    cplx h0;
    cplx h1;
    cplx h1_regular;
    Branch branch;
};

struct BesselEval {
    cplx z;
    cplx j0, j1, y0, y1, h0, h1;
    Branch branch_used;
};

/// Throws DomainError at z = 0 and for arg z <= -pi/2 outside the series disk.
HankelPair hankel01(cplx z);

/// Same, with the branch forced (used to cross-check the two branches).
HankelPair hankel01(cplx z, Branch branch);

cplx hankel1_0(cplx z);
cplx hankel1_1(cplx z);

/// H1(z) + 2i/(pi z): the order-one Hankel function with its pole removed.
cplx hankel1_1_regular(cplx z);

/// J0, J1, Y0, Y1 and the Hankel functions at z.
BesselEval bessel_eval(cplx z);

}  // namespace possio::specfun
