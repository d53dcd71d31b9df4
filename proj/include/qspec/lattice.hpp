#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/qcore.hpp"

// The bilateral q-lattice I = I^- u I^+ with I^- = -q^N (n >= 0) and
// I^+ = z q^Z, the positive weight w on it, q-integration, inner products,
// and the second-order q-difference operator L acting on grid functions.

namespace qspec::lattice {

using qcore::cplx;
using qcore::QBase;

struct QParams {
    double q;
    double a;
    cplx s;
    double z;

    // Validates: q in (0, 0.999], 0 < a^2 < 1, z in (q, 1], and s either on
    // the unit circle (within 1e-12, excluding +-1) or real with q < s^2 < 1.
    // Throws ConfigError otherwise.
    static QParams checked(double q, double a, cplx s, double z = 1.0);

    bool s_is_real() const;
    // (s + 1/s)/a; real for both admissible s regimes.
    double spc() const;
    QBase base() const { return QBase(q); }

    bool operator==(const QParams&) const = default;
};

enum class Chain { neg, pos };

// Lattice point -q^n (neg) or z q^n (pos), held by its integer exponent so
// positions never accumulate floating-point drift.
struct GridPoint {
    Chain chain;
    int n;
    bool operator==(const GridPoint&) const = default;
};

struct Grid {
    QParams params;
    int neg_depth; // I^-: n in [0, neg_depth]
    int pos_low;   // I^+ deep end: largest exponent m_max (x = z q^m_max)
    int pos_high;  // I^+ upper end: l_max (x up to z q^{-l_max})

    Grid(QParams p, int neg_depth_ = 60, int pos_low_ = 60, int pos_high_ = 40);

    std::size_t size() const;
    GridPoint point(std::size_t idx) const;
    std::size_t index_of(GridPoint pt) const; // RangeError if off grid
    bool contains(GridPoint pt) const;
    double position(GridPoint pt) const;

    bool operator==(const Grid&) const = default;
};

struct GridFunction {
    Grid grid;
    std::vector<cplx> values; // indexed as Grid::point

    explicit GridFunction(const Grid& g) : grid(g), values(g.size(), cplx(0.0)) {}

    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }
    cplx at(GridPoint pt) const { return values[grid.index_of(pt)]; }
    void set(GridPoint pt, cplx v) { values[grid.index_of(pt)] = v; }
};

// w(x) = (-qx;q)_inf / (-a^2 x;q)_inf, strictly positive on I.  For deep
// upper points z q^{-j} the defining products overflow double range, so the
// telescoped closed form w(z) (-1/z;q)_j / (-q/(z a^2);q)_j a^{-2j} q^j is
// used there.
double weight_w(const QParams& p, GridPoint pt);

// Same, for a raw coordinate: maps x onto the lattice within 1e-9 relative
// and throws DomainError when x is not a lattice point.
double weight_w(const QParams& p, double x);

// Point mass of the q-integral at a lattice point: (1-q) |x| w(x).
double point_mass(const QParams& p, GridPoint pt);

// delta function normalized so that <d_x, f> = f(x): value 1/((1-q)|x|w(x))
// at pt, zero elsewhere.
GridFunction point_delta(const Grid& g, GridPoint pt);

// (1-q) [ sum_n f(-q^n) q^n + sum_n f(z q^n) z q^n ] over the grid's
// truncation range, with compensated summation.
cplx q_integral(const GridFunction& f);

// <f, g> = q-integral of f conj(g) w.  GridMismatch if grids differ.
cplx inner_product(const GridFunction& f, const GridFunction& g);

// Truncated inner product: I^- terms n in [0, k], I^+ terms n in [-l, m].
// RangeError when the requested range exceeds the grid truncation.
cplx truncated_inner(const GridFunction& f, const GridFunction& g, int k, int l, int m);

// Casorati determinant
//   D(f,g)(x) = (f(x) g(qx) - f(qx) g(x)) a^{-1} (1-q) (1+a^2 x) w(x).
// RangeError when qx is off the grid.
cplx casorati(const GridFunction& f, const GridFunction& g, GridPoint x);

struct ApplyLResult {
    GridFunction f;
    bool edge_clipped; // input nonzero at an edge row: image spills off the grid
};

// The q-difference operator:
//   (Lf)(x)  = a^{-1}(1+1/x) f(x/q) - (s+1/s)/(a x) f(x) + a(1+1/(a^2 x)) f(qx)
//   (Lf)(-1) = (s+1/s)/a f(-1) + a(1-a^{-2}) f(-q).
// Off-grid neighbors at the truncation edges contribute zero; edge_clipped
// reports whether the image of (f extended by zero) lost a row to truncation,
// i.e. whether f itself is nonzero at an edge row.
ApplyLResult apply_L(const GridFunction& f);

// JSON import/export: array of {t: "-1"|"z", n, re, im}.
std::string grid_function_to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Grid& g, const std::string& json_text);

} // namespace qspec::lattice
