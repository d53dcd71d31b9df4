#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qspec/qcore.hpp"

using namespace qspec;
using qcore::cplx;
using qcore::QBase;

namespace {
const QBase qb(0.5);
const cplx I(0.0, 1.0);

double rel(cplx got, cplx want) { return std::abs(got - want) / (std::abs(want) + 1e-300); }
} // namespace

TEST_CASE("base domain") {
    CHECK_NOTHROW(QBase(0.999));
    CHECK_THROWS_AS(QBase(0.9999), DomainError);
    CHECK_THROWS_AS(QBase(0.0), DomainError);
    CHECK_THROWS_AS(QBase(-0.1), DomainError);
}

TEST_CASE("finite q-shifted factorial") {
    CHECK(qcore::qpoch_finite(cplx(0.3), qb, 0) == cplx(1.0));
    CHECK(rel(qcore::qpoch_finite(cplx(0.3), qb, 3), cplx(0.550375)) < 1e-15);
    // negative order: 1 / prod_{k=1..2} (1 - 0.3 q^{-k})
    CHECK(rel(qcore::qpoch_finite(cplx(0.3), qb, -2), cplx(-12.5)) < 1e-15);
    // (q; q)_{-1} divides by (1 - q q^{-1}) = 0
    CHECK_THROWS_AS(qcore::qpoch_finite(cplx(0.5), qb, -1), PoleError);
}

TEST_CASE("infinite q-shifted factorial") {
    CHECK(rel(qcore::qpoch_infinite(cplx(0.5), qb), cplx(0.288788095086602421)) < 1e-14);
    CHECK(rel(qcore::qpoch_infinite(cplx(-0.3, 0.7), qb),
              cplx(0.908889283235465026, -1.88391222151931003)) < 1e-14);

    // list overload is the plain product
    cplx x1(0.4, 0.1), x2(-0.2, 0.3);
    CHECK(rel(qcore::qpoch_infinite({x1, x2}, qb),
              qcore::qpoch_infinite(x1, qb) * qcore::qpoch_infinite(x2, qb)) < 1e-14);

    // functional equation (x;q)_inf = (1-x)(qx;q)_inf
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mag(0.05, 3.0), ang(0.0, 6.283);
    for (int t = 0; t < 50; ++t) {
        cplx x = std::polar(mag(rng), ang(rng));
        cplx lhs = qcore::qpoch_infinite(x, qb);
        cplx rhs = (1.0 - x) * qcore::qpoch_infinite(0.5 * x, qb);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * (std::abs(lhs) + std::abs(rhs) + 1.0));
    }
}

TEST_CASE("theta oracle values and exact zeros") {
    CHECK(rel(qcore::theta(cplx(-1.0), qb), cplx(11.3691151995919874)) < 1e-14);
    CHECK(rel(qcore::theta(cplx(0.3, 0.2), qb),
              cplx(-0.104059934709710057, 0.0806607194446099139)) < 1e-13);
    // theta vanishes on q^Z: at x = q^2 the factor (1 - q/x q) = (1 - 1) is exact
    CHECK(qcore::theta(cplx(0.25), qb) == cplx(0.0));
    CHECK(qcore::theta(cplx(2.0), qb) == cplx(0.0));
}

TEST_CASE("theta quasi-periodicity under x -> q^k x") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mag(0.1, 3.0), ang(0.02, 6.26);
    std::uniform_int_distribution<int> kd(-6, 6);
    for (int t = 0; t < 200; ++t) {
        cplx x = std::polar(mag(rng), ang(rng));
        int k = kd(rng);
        cplx lhs = qcore::theta(x * std::pow(0.5, k), qb);
        cplx pref = std::pow(cplx(-x), cplx(-k)) * std::pow(0.5, -0.5 * k * (k - 1));
        CHECK(std::abs(lhs - pref * qcore::theta(x, qb)) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("theta base-splitting identities") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> mag(0.1, 3.0), ang(0.02, 6.26);
    const QBase qb2(0.25);
    for (int t = 0; t < 100; ++t) {
        cplx x = std::polar(mag(rng), ang(rng));
        cplx th = qcore::theta(x, qb);
        CHECK(std::abs(th - qcore::theta(x, qb2) * qcore::theta(0.5 * x, qb2)) <= 1e-12 * std::abs(th));
        cplx lhs = qcore::theta(-x, qb) * qcore::theta(x, qb);
        CHECK(std::abs(lhs - qcore::theta(x * x, qb2)) <= 1e-12 * (std::abs(lhs) + 1.0));
    }
}

TEST_CASE("theta four-term addition identity") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> mag(0.3, 2.0), ang(0.05, 6.2);
    for (int t = 0; t < 100; ++t) {
        cplx x = std::polar(mag(rng), ang(rng)), y = std::polar(mag(rng), ang(rng));
        cplx u = std::polar(mag(rng), ang(rng)), v = std::polar(mag(rng), ang(rng));
        cplx t1 = qcore::theta({x * y, x / y, u * v, u / v}, qb);
        cplx t2 = qcore::theta({x * v, x / v, u * y, u / y}, qb);
        cplx t3 = (u / y) * qcore::theta({x * u, x / u, y * v, y / v}, qb);
        double sc = std::abs(t1) + std::abs(t2) + std::abs(t3) + 1e-300;
        CHECK(std::abs(t1 - t2 - t3) / sc <= 1e-11);
    }
}

TEST_CASE("2phi1 oracle and contiguous relation") {
    CHECK(rel(qcore::phi21(cplx(0.3), cplx(-0.2), cplx(0.7), qb, cplx(0.25, 0.1)),
              cplx(3.07030494390877977, 1.47113975003919488)) < 1e-13);

    // u(x) - (1 + C/q) u(qx) + (C/q) u(q^2 x) = x [ u(x) - (A+B) u(qx) + AB u(q^2 x) ]
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> mag(0.1, 0.9), cm(0.15, 0.85), ang(0.0, 6.283),
        xr(0.05, 0.45);
    const double q = 0.5;
    for (int t = 0; t < 100; ++t) {
        cplx A = std::polar(mag(rng), ang(rng)), B = std::polar(mag(rng), ang(rng));
        cplx C = std::polar(cm(rng), ang(rng));
        double x = xr(rng);
        cplx u0 = qcore::phi21(A, B, C, qb, cplx(x));
        cplx u1 = qcore::phi21(A, B, C, qb, cplx(q * x));
        cplx u2 = qcore::phi21(A, B, C, qb, cplx(q * q * x));
        cplx lhs = u0 - (1.0 + C / q) * u1 + (C / q) * u2;
        cplx rhs = x * (u0 - (A + B) * u1 + A * B * u2);
        double sc = std::abs(u0) + std::abs(u1) + std::abs(u2);
        CHECK(std::abs(lhs - rhs) / sc <= 1e-10);
    }
}

TEST_CASE("general r_phi_s series") {
    // terminating 3phi2 with upper parameter q^{-2}
    cplx upper[] = {cplx(4.0), cplx(0.4), cplx(0.6)};
    cplx lower[] = {cplx(0.3), cplx(0.2)};
    CHECK(rel(qcore::rphis(upper, lower, qb, cplx(0.7)), cplx(0.429803921568627451)) < 1e-14);

    // 2phi1 diverges outside the unit disk when nonterminating
    CHECK_THROWS_AS(qcore::phi21(cplx(0.3), cplx(0.2), cplx(0.5), qb, cplx(1.5)), DivergenceError);

    // lower parameter on the pole lattice q^{-N}
    CHECK_THROWS_AS(qcore::phi21(cplx(0.3), cplx(0.2), cplx(4.0), qb, cplx(0.3)), PoleError);

    // 1phi1 (r <= s) converges for any argument: check against its q-exp value
    cplx up1[] = {cplx(0.0)};
    cplx lo1[] = {cplx(0.3)};
    CHECK_NOTHROW(qcore::rphis(up1, lo1, qb, cplx(2.5)));
}

TEST_CASE("terminating series detected from upper parameters") {
    // 2phi1(q^{-3}, B; C): polynomial of degree 3 in the argument, exact at big args
    cplx v = qcore::phi21(cplx(8.0), cplx(0.4), cplx(0.3), qb, cplx(5.0));
    CHECK(std::isfinite(v.real()));
    // compare against direct 4-term sum
    cplx sum(0.0), term(1.0);
    const double q = 0.5;
    for (int k = 0; k <= 3; ++k) {
        sum += term;
        term *= (1.0 - 8.0 * std::pow(q, k)) * (1.0 - 0.4 * std::pow(q, k)) /
                ((1.0 - std::pow(q, k + 1)) * (1.0 - 0.3 * std::pow(q, k))) * 5.0;
    }
    CHECK(rel(v, sum) < 1e-13);
}
