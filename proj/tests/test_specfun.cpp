#include "doctest.h"

#include "oracles.hpp"
#include "possio/errors.hpp"
#include "possio/specfun.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

using namespace possio;
using specfun::cplx;
using std::numbers::pi;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("reference values") {
    const cplx h0 = specfun::hankel1_0(1.0);
    CHECK(h0.real() == doctest::Approx(0.7651976866).epsilon(1e-10));
    CHECK(h0.imag() == doctest::Approx(0.0882569642).epsilon(1e-9));
    const cplx h1 = specfun::hankel1_1(1.0);
    CHECK(h1.real() == doctest::Approx(0.4400505857).epsilon(1e-10));
    CHECK(h1.imag() == doctest::Approx(-0.7812128213).epsilon(1e-10));

    // H0(i) = (2/(i pi)) K0(1) with K0(1) from the ascending series
    const cplx hi = specfun::hankel1_0(cplx(0.0, 1.0));
    CHECK(std::abs(hi.real()) < 1e-15);
    const cplx via_k0 = 2.0 / (cplx(0.0, 1.0) * pi) * oracle::bessel_k0(1.0);
    CHECK(rel(hi, via_k0) < 1e-13);

    CHECK_THROWS_AS(specfun::hankel1_0(0.0), DomainError);
    CHECK_THROWS_AS(specfun::hankel1_1(0.0), DomainError);
}

TEST_CASE("agreement with the high-precision series across the upper half-plane") {
    double worst = 0.0;
    for (double arg : {0.0, pi / 4, pi / 2, 3 * pi / 4, pi}) {
        for (double lr = -8.0; lr <= 2.0; lr += 0.25) {
            const cplx z = std::polar(std::pow(10.0, lr), arg);
            const auto ref = oracle::hankel_series(z);
            const auto h = specfun::hankel01(z);
            worst = std::max({worst, rel(h.h0, ref.h0), rel(h.h1, ref.h1)});
        }
    }
    MESSAGE("worst relative error vs series oracle: " << worst);
    CHECK(worst < 1e-10);
}

TEST_CASE("large arguments on the real and imaginary axes") {
    double worst = 0.0;
    for (double x = 100.0; x <= 1e4; x *= 1.37) {
        const cplx ref(boost::math::cyl_bessel_j(0, x), boost::math::cyl_neumann(0, x));
        const cplx ref1(boost::math::cyl_bessel_j(1, x), boost::math::cyl_neumann(1, x));
        worst = std::max({worst, rel(specfun::hankel1_0(x), ref), rel(specfun::hankel1_1(x), ref1)});
    }
    for (double y = 3.0; y <= 600.0; y *= 1.37) {
        const cplx z(0.0, y);
        const cplx ref0 = 2.0 / (cplx(0.0, 1.0) * pi) * boost::math::cyl_bessel_k(0, y);
        const cplx ref1 = -2.0 / pi * boost::math::cyl_bessel_k(1, y);
        worst = std::max({worst, rel(specfun::hankel1_0(z), ref0), rel(specfun::hankel1_1(z), ref1)});
    }
    MESSAGE("worst relative error vs Boost.Math: " << worst);
    CHECK(worst < 1e-10);
}

TEST_CASE("pole-free order-one function") {
    for (double r : {1e-6, 0.3, 2.9, 3.1, 20.0}) {
        const cplx z = std::polar(r, 0.7);
        const auto h = specfun::hankel01(z);
        CHECK(std::abs(h.h1_regular - (h.h1 + 2.0 * cplx(0, 1) / (pi * z))) <=
              1e-9 * std::max(1.0, std::abs(h.h1_regular)));
    }
    // regular part ~ (i/pi) z log z near the origin
    CHECK(std::abs(specfun::hankel1_1_regular(1e-10)) < 1e-8);
}

TEST_CASE("derivative identity dH0/dz = -H1") {
    const double h = 1e-5;
    const cplx fd = (specfun::hankel1_0(2.0 + h) - specfun::hankel1_0(2.0 - h)) / (2 * h);
    CHECK(rel(fd, -specfun::hankel1_1(2.0)) < 1e-6);
}

TEST_CASE("Bessel ODE residual") {
    double worst = 0.0;
    for (double arg : {0.0, pi / 4, pi / 2}) {
        for (double lr = -2.0; lr <= 2.0; lr += 0.1) {
            const cplx z = std::polar(std::pow(10.0, lr), arg);
            const cplx dz = std::min(1e-3 * std::abs(z), 1e-2) * z / std::abs(z);
            // H0'' = -H1' by a fourth-order central difference of H1
            auto h1 = [&](double k) { return specfun::hankel1_1(z + k * dz); };
            const cplx d1 = (-h1(2) + 8.0 * h1(1) - 8.0 * h1(-1) + h1(-2)) / (12.0 * dz);
            const auto v = specfun::hankel01(z);
            const cplx resid = -d1 - v.h1 / z + v.h0;
            worst = std::max(worst, std::abs(resid) / (std::abs(v.h0) + std::abs(v.h1 / z)));
        }
    }
    MESSAGE("worst ODE residual: " << worst);
    CHECK(worst < 1e-8);
}

TEST_CASE("Wronskian on the real axis") {
    double worst = 0.0;
    for (double x = 0.1; x <= 50.0; x *= 1.05) {
        const auto e = specfun::bessel_eval(x);
        // J0 Y0' - J0' Y0 with J0' = -J1, Y0' = -Y1
        const double w = (-e.j0 * e.y1 + e.j1 * e.y0).real();
        worst = std::max(worst, std::abs(w - 2.0 / (pi * x)) / (2.0 / (pi * x)));
        CHECK(std::abs(e.j0.imag()) <= 1e-12 * std::abs(e.j0) + 1e-300);
        CHECK(std::abs(e.y1.imag()) <= 1e-12 * std::abs(e.y1));
    }
    MESSAGE("worst Wronskian error: " << worst);
    CHECK(worst < 1e-9);
}

TEST_CASE("bessel_eval consistency") {
    for (cplx z : {cplx(0.5, 0.2), cplx(5.0, 1.0), cplx(-7.0, 2.0), cplx(0.3, 9.0), cplx(40.0, 0.0)}) {
        const auto e = specfun::bessel_eval(z);
        CHECK(std::abs(e.h0 - (e.j0 + cplx(0, 1) * e.y0)) <= 1e-14 * std::max(std::abs(e.h0), std::abs(e.j0)));
        CHECK(std::abs(e.h1 - (e.j1 + cplx(0, 1) * e.y1)) <= 1e-14 * std::max(std::abs(e.h1), std::abs(e.j1)));
        if (std::abs(z) < 50) {
            const auto ref = oracle::hankel_series(z);
            CHECK(rel(e.h0, ref.h0) < 1e-10);
        }
    }
    const auto e = specfun::bessel_eval(cplx(-7.0, 2.0));
    const auto f = specfun::bessel_eval(cplx(7.0, -2.0) * -1.0);
    CHECK(std::abs(e.j0 - f.j0) < 1e-14);
}

TEST_CASE("branch consistency around the switch radius") {
    double worst = 0.0;
    for (double r = 0.8 * specfun::kSeriesRadius; r <= 1.25 * specfun::kSeriesRadius; r += 0.05) {
        for (double arg : {0.0, 0.5, 1.0, pi / 2, 2.0, 2.6, pi}) {
            const cplx z = std::polar(r, arg);
            const auto a = specfun::hankel01(z, specfun::Branch::series);
            const auto b = specfun::hankel01(z, specfun::Branch::large_argument);
            worst = std::max({worst, rel(a.h0, b.h0), rel(a.h1, b.h1)});
        }
    }
    MESSAGE("worst branch disagreement: " << worst);
    CHECK(worst < 1e-8);
}

TEST_CASE("large-argument branch rejects the lower half-plane") {
    CHECK_THROWS_AS(specfun::hankel1_0(cplx(0.0, -5.0)), DomainError);
    CHECK_THROWS_AS(specfun::hankel1_0(cplx(-1.0, -50.0)), DomainError);
    CHECK_NOTHROW(specfun::hankel1_0(cplx(0.0, -1.0)));
}
