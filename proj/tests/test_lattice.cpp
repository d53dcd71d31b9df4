#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qspec/lattice.hpp"

using namespace qspec;
using lattice::Chain;
using lattice::Grid;
using lattice::GridFunction;
using lattice::GridPoint;
using lattice::QParams;
using qcore::cplx;

namespace {
const QParams P1 = QParams::checked(0.5, 0.6, cplx(0.5, 0.8660254037844386), 1.0);

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

GridFunction random_compact(const Grid& g, std::mt19937_64& rng, int lo_margin = 2) {
    // support away from the truncation edges so L acts exactly
    GridFunction f(g);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_int_distribution<int> nn(lo_margin, 8), pn(-6, 8);
    for (int t = 0; t < 6; ++t) {
        f.set({Chain::neg, nn(rng)}, {nd(rng), nd(rng)});
        f.set({Chain::pos, pn(rng)}, {nd(rng), nd(rng)});
    }
    return f;
}
} // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(QParams::checked(0.5, 0.6, cplx(0.0, 1.0)));
    CHECK_NOTHROW(QParams::checked(0.5, 0.9, cplx(0.8, 0.0)));     // real s, q < s^2 < 1
    CHECK_NOTHROW(QParams::checked(0.5, 0.6, cplx(0.5, 0.8660254037844386), 0.7));

    CHECK_THROWS_AS(QParams::checked(0.0, 0.6, cplx(0.0, 1.0)), ConfigError);
    CHECK_THROWS_AS(QParams::checked(0.9999, 0.6, cplx(0.0, 1.0)), ConfigError);
    CHECK_THROWS_AS(QParams::checked(0.5, 1.0, cplx(0.0, 1.0)), ConfigError);
    CHECK_THROWS_AS(QParams::checked(0.5, -0.6, cplx(0.0, 1.0)), ConfigError);
    CHECK_THROWS_AS(QParams::checked(0.5, 0.6, cplx(1.0, 0.0)), ConfigError);  // s = +1
    CHECK_THROWS_AS(QParams::checked(0.5, 0.6, cplx(-1.0, 0.0)), ConfigError); // s = -1
    CHECK_THROWS_AS(QParams::checked(0.5, 0.6, cplx(0.6, 0.0)), ConfigError);  // s^2 < q
    CHECK_THROWS_AS(QParams::checked(0.5, 0.6, cplx(0.3, 0.4)), ConfigError);  // |s| = 0.5
    CHECK_THROWS_AS(QParams::checked(0.5, 0.6, cplx(0.0, 1.0), 0.4), ConfigError); // z <= q
    CHECK_THROWS_AS(QParams::checked(0.5, 0.6, cplx(0.0, 1.0), 1.1), ConfigError); // z > 1

    CHECK(P1.spc() == doctest::Approx((0.5 + 0.5) / 0.6).epsilon(1e-14)); // 2 Re(s)/a on the circle
    CHECK(!P1.s_is_real());
    CHECK(QParams::checked(0.5, 0.9, cplx(0.8, 0.0)).s_is_real());
}

TEST_CASE("grid indexing round trips and rejects off-grid points") {
    Grid g(P1, 10, 12, 7);
    CHECK(g.size() == 11 + 12 + 7 + 1);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(g.index_of(g.point(i)) == i);

    CHECK(g.contains({Chain::neg, 10}));
    CHECK(!g.contains({Chain::neg, 11}));
    CHECK(g.contains({Chain::pos, -7}));
    CHECK(!g.contains({Chain::pos, -8}));
    CHECK_THROWS_AS(g.index_of({Chain::neg, 11}), RangeError);
    CHECK_THROWS_AS(g.index_of({Chain::pos, 13}), RangeError);

    CHECK(g.position({Chain::neg, 0}) == -1.0);
    CHECK(g.position({Chain::neg, 3}) == -0.125);
    CHECK(g.position({Chain::pos, -2}) == 4.0);
}

TEST_CASE("weight oracles and closed-form recurrence") {
    CHECK(rel(lattice::weight_w(P1, GridPoint{Chain::neg, 0}), 0.662571020147173462) < 1e-14);
    CHECK(rel(lattice::weight_w(P1, GridPoint{Chain::neg, 3}), 0.964335899275109595) < 1e-14);
    CHECK(rel(lattice::weight_w(P1, GridPoint{Chain::pos, -8}), 10.9022056598065506) < 1e-14);

    // the raw-coordinate overload maps back onto the lattice
    CHECK(rel(lattice::weight_w(P1, -0.125), 0.964335899275109595) < 1e-14);
    CHECK_THROWS_AS(lattice::weight_w(P1, -0.3), DomainError);

    // (1 - q^{n+1}) w(-q^{n+1}) = (1 - a^2 q^n) w(-q^n), and positivity
    const double q = P1.q, a = P1.a;
    for (int n = 0; n < 30; ++n) {
        double wn = lattice::weight_w(P1, GridPoint{Chain::neg, n});
        double wn1 = lattice::weight_w(P1, GridPoint{Chain::neg, n + 1});
        CHECK(wn > 0.0);
        CHECK(rel((1.0 - std::pow(q, n + 1)) * wn1, (1.0 - a * a * std::pow(q, n)) * wn) < 1e-14);
    }
    for (int n = -30; n <= 30; n += 5)
        CHECK(lattice::weight_w(P1, GridPoint{Chain::pos, n}) > 0.0);
}

TEST_CASE("weight growth at the upper end approaches its theta-ratio limit") {
    // w(z q^{-j}) a^{2j} q^{-j} -> theta(-qz;q)/theta(-z a^2;q)
    const double limit = 0.784980662780505562;
    auto scaled = [&](int j) {
        return lattice::weight_w(P1, GridPoint{Chain::pos, -j}) *
               std::pow(P1.a * P1.a / P1.q, j);
    };
    double e30 = std::abs(scaled(30) - limit), e40 = std::abs(scaled(40) - limit);
    CHECK(e40 < e30);
    CHECK(e40 < 1e-10 * limit);
}

TEST_CASE("point mass, delta normalization, and the q-integral") {
    Grid g(P1, 20, 20, 10);
    GridPoint x{Chain::pos, 3};
    double om = lattice::point_mass(P1, x);
    CHECK(rel(om, (1.0 - P1.q) * 0.125 * lattice::weight_w(P1, x)) < 1e-15);

    GridFunction d = lattice::point_delta(g, x);
    CHECK(d.at(x) == cplx(1.0 / om));

    // <d_x, f> = f(x) for a generic f
    std::mt19937_64 rng(7);
    GridFunction f = random_compact(g, rng);
    cplx ip = lattice::inner_product(d, f);
    CHECK(std::abs(ip - std::conj(f.at(x))) < 1e-13 * std::abs(f.at(x)));
    CHECK(rel(lattice::inner_product(d, d).real(), 1.0 / om) < 1e-14);

    // bare q-integral of the indicator carries the Jackson factor only;
    // the weight enters through the inner product
    GridFunction ind(g);
    ind.set(x, 1.0);
    CHECK(rel(lattice::q_integral(ind).real(), (1.0 - P1.q) * 0.125) < 1e-14);
    CHECK(rel(lattice::q_integral(ind).real() * lattice::weight_w(P1, x), om) < 1e-14);
}

TEST_CASE("truncated inner product windows") {
    Grid g(P1, 15, 15, 8);
    std::mt19937_64 rng(19);
    GridFunction f = random_compact(g, rng), h = random_compact(g, rng);

    // full window equals the ordinary inner product
    cplx full = lattice::truncated_inner(f, h, 15, 8, 15);
    CHECK(std::abs(full - lattice::inner_product(f, h)) < 1e-13 * std::abs(full));

    // k = l = m = 0 is the two-point sum at x = -1 and x = z
    GridFunction u(g), v(g);
    u.set({Chain::neg, 0}, 2.0);
    u.set({Chain::pos, 0}, 3.0);
    v.set({Chain::neg, 0}, 1.0);
    v.set({Chain::pos, 0}, 1.0);
    cplx two = lattice::truncated_inner(u, v, 0, 0, 0);
    double want = 2.0 * lattice::point_mass(P1, {Chain::neg, 0}) +
                  3.0 * lattice::point_mass(P1, {Chain::pos, 0});
    CHECK(rel(two.real(), want) < 1e-15);

    CHECK_THROWS_AS(lattice::truncated_inner(f, h, 16, 8, 15), RangeError);
    CHECK_THROWS_AS(lattice::truncated_inner(f, h, 15, 9, 15), RangeError);

    Grid g2(P1, 15, 15, 9);
    GridFunction other(g2);
    CHECK_THROWS_AS(lattice::inner_product(f, other), GridMismatch);
}

TEST_CASE("casorati determinant is antisymmetric and guards its edge") {
    Grid g(P1, 12, 12, 6);
    std::mt19937_64 rng(23);
    GridFunction f = random_compact(g, rng), h = random_compact(g, rng);
    for (GridPoint pt : {GridPoint{Chain::neg, 4}, GridPoint{Chain::pos, -3}}) {
        cplx dfg = lattice::casorati(f, h, pt);
        cplx dgf = lattice::casorati(h, f, pt);
        CHECK(std::abs(dfg + dgf) < 1e-13 * (std::abs(dfg) + 1e-30));
    }
    CHECK(lattice::casorati(f, f, {Chain::neg, 4}) == cplx(0.0));
    // qx off the grid
    CHECK_THROWS_AS(lattice::casorati(f, h, GridPoint{Chain::neg, 12}), RangeError);
    CHECK_THROWS_AS(lattice::casorati(f, h, GridPoint{Chain::pos, 12}), RangeError);
}

TEST_CASE("difference operator rows match their defining formulas") {
    Grid g(P1, 14, 14, 8);
    std::mt19937_64 rng(31);
    GridFunction f = random_compact(g, rng);
    auto lf = lattice::apply_L(f);
    CHECK(!lf.edge_clipped);

    const double a = P1.a, spc = P1.spc();

    // head row x = -1 couples only to -q
    cplx head = spc * f.at({Chain::neg, 0}) + a * (1.0 - 1.0 / (a * a)) * f.at({Chain::neg, 1});
    CHECK(std::abs(lf.f.at({Chain::neg, 0}) - head) < 1e-14 * (std::abs(head) + 1.0));

    // generic interior row at x = -q^2
    double x = -0.25;
    cplx mid = (1.0 / a) * (1.0 + 1.0 / x) * f.at({Chain::neg, 1}) -
               spc / x * f.at({Chain::neg, 2}) +
               a * (1.0 + 1.0 / (a * a * x)) * f.at({Chain::neg, 3});
    CHECK(std::abs(lf.f.at({Chain::neg, 2}) - mid) < 1e-14 * (std::abs(mid) + 1.0));

    // and one on the positive chain at x = z q^{-2}
    x = 4.0;
    mid = (1.0 / a) * (1.0 + 1.0 / x) * f.at({Chain::pos, -3}) -
          spc / x * f.at({Chain::pos, -2}) +
          a * (1.0 + 1.0 / (a * a * x)) * f.at({Chain::pos, -1});
    CHECK(std::abs(lf.f.at({Chain::pos, -2}) - mid) < 1e-14 * (std::abs(mid) + 1.0));
}

TEST_CASE("edge clipping is reported exactly when support touches an edge") {
    Grid g(P1, 10, 10, 5);
    for (GridPoint edge : {GridPoint{Chain::neg, 10}, GridPoint{Chain::pos, 10},
                           GridPoint{Chain::pos, -5}}) {
        GridFunction f(g);
        f.set(edge, 1.0);
        CHECK(lattice::apply_L(f).edge_clipped);
    }
    GridFunction f(g);
    f.set({Chain::neg, 9}, 1.0); // one row in: image reaches the edge but loses nothing
    f.set({Chain::pos, -4}, 1.0);
    CHECK(!lattice::apply_L(f).edge_clipped);
}

TEST_CASE("operator is symmetric in the weighted inner product") {
    Grid g(P1, 18, 18, 9);
    std::mt19937_64 rng(37);
    for (int t = 0; t < 10; ++t) {
        GridFunction f = random_compact(g, rng), h = random_compact(g, rng);
        cplx lhs = lattice::inner_product(lattice::apply_L(f).f, h);
        cplx rhs = lattice::inner_product(f, lattice::apply_L(h).f);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
    }
}

TEST_CASE("grid function JSON round trip") {
    Grid g(P1, 8, 8, 6);
    std::mt19937_64 rng(41);
    GridFunction f = random_compact(g, rng);
    GridFunction back = lattice::grid_function_from_json(g, lattice::grid_function_to_json(f));
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(back[i] - f[i]) == 0.0);
}
