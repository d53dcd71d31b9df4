#include "qspec/lattice.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace qspec::lattice {

namespace {

constexpr double kUnitCircleTol = 1e-12;

} // namespace

QParams QParams::checked(double q, double a, cplx s, double z) {
    if (!(q > 0.0) || q > 0.999)
        throw ConfigError("base q must lie in (0, 0.999], got q = " + std::to_string(q));
    QBase base(q);
    if (!(a > 0.0) || !(a * a < 1.0))
        throw ConfigError("parameter a must satisfy 0 < a^2 < 1, got a = " + std::to_string(a));
    if (!(z > q) || !(z <= 1.0))
        throw ConfigError("parameter z must lie in (q, 1], got z = " + std::to_string(z));

    bool ok = false;
    if (std::abs(s.imag()) <= kUnitCircleTol * std::max(1.0, std::abs(s))) {
        double sr = s.real();
        double s2 = sr * sr;
        ok = (s2 > q && s2 < 1.0);
        if (!ok)
            throw ConfigError("real s must satisfy q < s^2 < 1, got s = " + std::to_string(sr));
    } else {
        ok = std::abs(std::abs(s) - 1.0) <= kUnitCircleTol;
        if (ok && (std::abs(s - cplx(1.0)) <= kUnitCircleTol || std::abs(s + cplx(1.0)) <= kUnitCircleTol))
            ok = false;
        if (!ok)
            throw ConfigError("complex s must lie on the unit circle, excluding +-1");
    }
    return QParams{q, a, s, z};
}

bool QParams::s_is_real() const {
    return std::abs(s.imag()) <= kUnitCircleTol * std::max(1.0, std::abs(s));
}

double QParams::spc() const {
    cplx v = (s + 1.0 / s) / a;
    return v.real();
}

Grid::Grid(QParams p, int neg_depth_, int pos_low_, int pos_high_)
    : params(p), neg_depth(neg_depth_), pos_low(pos_low_), pos_high(pos_high_) {
    if (neg_depth < 1 || pos_low < 1 || pos_high < 0)
        throw ConfigError("grid truncation depths out of range");
}

std::size_t Grid::size() const {
    return static_cast<std::size_t>(neg_depth + 1) + static_cast<std::size_t>(pos_low + pos_high + 1);
}

GridPoint Grid::point(std::size_t idx) const {
    std::size_t nneg = static_cast<std::size_t>(neg_depth + 1);
    if (idx < nneg)
        return GridPoint{Chain::neg, static_cast<int>(idx)};
    std::size_t j = idx - nneg;
    if (j > static_cast<std::size_t>(pos_low + pos_high))
        throw RangeError("grid index out of range");
    // positive chain stored with n ascending from -pos_high (largest x last
    // is NOT the convention; deep points z q^{pos_low} come last)
    return GridPoint{Chain::pos, static_cast<int>(j) - pos_high};
}

bool Grid::contains(GridPoint pt) const {
    if (pt.chain == Chain::neg)
        return pt.n >= 0 && pt.n <= neg_depth;
    return pt.n >= -pos_high && pt.n <= pos_low;
}

std::size_t Grid::index_of(GridPoint pt) const {
    if (!contains(pt))
        throw RangeError("lattice point outside grid truncation");
    if (pt.chain == Chain::neg)
        return static_cast<std::size_t>(pt.n);
    return static_cast<std::size_t>(neg_depth + 1) + static_cast<std::size_t>(pt.n + pos_high);
}

double Grid::position(GridPoint pt) const {
    double base = (pt.chain == Chain::neg) ? -1.0 : params.z;
    return base * std::pow(params.q, pt.n);
}

double weight_w(const QParams& p, GridPoint pt) {
    QBase base = p.base();
    double q = p.q, a = p.a, z = p.z;
    if (pt.chain == Chain::neg) {
        double x = -std::pow(q, pt.n);
        double num = qcore::qpoch_infinite(cplx(-q * x), base).real();
        double den = qcore::qpoch_infinite(cplx(-a * a * x), base).real();
        return num / den;
    }
    if (pt.n >= 0) {
        double x = z * std::pow(q, pt.n);
        double num = qcore::qpoch_infinite(cplx(-q * x), base).real();
        double den = qcore::qpoch_infinite(cplx(-a * a * x), base).real();
        return num / den;
    }
    // Deep points x = z q^{-j}: telescoped ratio, evaluated factor by factor
    // so intermediate magnitudes stay bounded (w -> (z a^{-2})^j growth).
    int j = -pt.n;
    double wz = weight_w(p, GridPoint{Chain::pos, 0});
    double acc = wz;
    for (int i = 1; i <= j; ++i) {
        // (1 + q^{i-1}/z) / (1 + q^i/(z a^2)) * q / a^2, the i-th factor of
        // w(z q^{-i}) / w(z q^{-i+1}).
        double num = 1.0 + std::pow(q, i - 1) / z;
        double den = 1.0 + std::pow(q, i) / (z * a * a);
        acc *= num / den * q / (a * a);
    }
    return acc;
}

double weight_w(const QParams& p, double x) {
    if (x == 0.0)
        throw DomainError("weight undefined at x = 0");
    double q = p.q;
    double base = (x < 0.0) ? -1.0 : p.z;
    double r = x / base;
    if (r <= 0.0)
        throw DomainError("coordinate not on the lattice");
    double nf = std::log(r) / std::log(q);
    double nr = std::round(nf);
    if (std::abs(nf - nr) > 1e-9 * std::max(1.0, std::abs(nr)) && std::abs(nf - nr) > 1e-9)
        throw DomainError("coordinate not on the lattice");
    GridPoint pt{(x < 0.0) ? Chain::neg : Chain::pos, static_cast<int>(nr)};
    return weight_w(p, pt);
}

double point_mass(const QParams& p, GridPoint pt) {
    double x = (pt.chain == Chain::neg ? -1.0 : p.z) * std::pow(p.q, pt.n);
    return (1.0 - p.q) * std::abs(x) * weight_w(p, pt);
}

GridFunction point_delta(const Grid& g, GridPoint pt) {
    GridFunction d(g);
    d.set(pt, cplx(1.0 / point_mass(g.params, pt)));
    return d;
}

namespace {

// Kahan-compensated accumulation of complex terms.
struct Accum {
    cplx sum{0.0};
    cplx comp{0.0};
    void add(cplx t) {
        cplx y = t - comp;
        cplx u = sum + y;
        comp = (u - sum) - y;
        sum = u;
    }
};

} // namespace

cplx q_integral(const GridFunction& f) {
    const Grid& g = f.grid;
    double q = g.params.q;
    Accum acc;
    // I^+ from the deep end up so small terms accumulate first.
    for (int n = g.pos_low; n >= -g.pos_high; --n) {
        double x = g.params.z * std::pow(q, n);
        acc.add(f.at(GridPoint{Chain::pos, n}) * x);
    }
    for (int n = g.neg_depth; n >= 0; --n) {
        double qn = std::pow(q, n);
        acc.add(f.at(GridPoint{Chain::neg, n}) * qn);
    }
    return (1.0 - q) * acc.sum;
}

cplx inner_product(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid == g.grid))
        throw GridMismatch("inner product requires matching grids");
    const Grid& gr = f.grid;
    GridFunction prod(gr);
    for (std::size_t i = 0; i < gr.size(); ++i) {
        GridPoint pt = gr.point(i);
        double w = weight_w(gr.params, pt);
        prod[i] = f[i] * std::conj(g[i]) * w;
    }
    return q_integral(prod);
}

cplx truncated_inner(const GridFunction& f, const GridFunction& g, int k, int l, int m) {
    if (!(f.grid == g.grid))
        throw GridMismatch("truncated inner product requires matching grids");
    const Grid& gr = f.grid;
    if (k < 0 || k > gr.neg_depth || m < 0 || m > gr.pos_low || l < 0 || l > gr.pos_high)
        throw RangeError("truncation range exceeds grid");
    const QParams& p = gr.params;
    double q = p.q;
    Accum acc;
    for (int n = k; n >= 0; --n) {
        GridPoint pt{Chain::neg, n};
        acc.add(f.at(pt) * std::conj(g.at(pt)) * weight_w(p, pt) * std::pow(q, n));
    }
    for (int n = m; n >= -l; --n) {
        GridPoint pt{Chain::pos, n};
        acc.add(f.at(pt) * std::conj(g.at(pt)) * weight_w(p, pt) * p.z * std::pow(q, n));
    }
    return (1.0 - q) * acc.sum;
}

cplx casorati(const GridFunction& f, const GridFunction& g, GridPoint x) {
    const Grid& gr = f.grid;
    if (!(gr == g.grid))
        throw GridMismatch("Casorati determinant requires matching grids");
    GridPoint qx{x.chain, x.n + 1};
    if (!gr.contains(x) || !gr.contains(qx))
        throw RangeError("Casorati determinant needs both x and qx on the grid");
    const QParams& p = gr.params;
    double xv = gr.position(x);
    cplx det = f.at(x) * g.at(qx) - f.at(qx) * g.at(x);
    return det * (1.0 - p.q) / p.a * (1.0 + p.a * p.a * xv) * weight_w(p, x);
}

ApplyLResult apply_L(const GridFunction& f) {
    const Grid& g = f.grid;
    const QParams& p = g.params;
    double a = p.a, spc = p.spc();
    ApplyLResult out{GridFunction(g), false};
    // The image of a function nonzero at a truncation edge row has one
    // nonzero value just beyond the grid; that row is lost here.
    out.edge_clipped = f.at({Chain::neg, g.neg_depth}) != cplx(0.0)
        || f.at({Chain::pos, g.pos_low}) != cplx(0.0)
        || f.at({Chain::pos, -g.pos_high}) != cplx(0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        GridPoint pt = g.point(i);
        if (pt.chain == Chain::neg && pt.n == 0) {
            // boundary row at x = -1: the f(x/q) coefficient vanishes there
            cplx v = spc * f[i];
            GridPoint inner{Chain::neg, 1};
            if (g.contains(inner))
                v += a * (1.0 - 1.0 / (a * a)) * f.at(inner);
            out.f[i] = v;
            continue;
        }
        double x = g.position(pt);
        cplx v = -spc / x * f[i];
        GridPoint up{pt.chain, pt.n - 1};   // x/q
        GridPoint down{pt.chain, pt.n + 1}; // qx
        if (g.contains(up))
            v += (1.0 / a) * (1.0 + 1.0 / x) * f.at(up);
        if (g.contains(down))
            v += a * (1.0 + 1.0 / (a * a * x)) * f.at(down);
        out.f[i] = v;
    }
    return out;
}

std::string grid_function_to_json(const GridFunction& f) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        GridPoint pt = f.grid.point(i);
        arr.push_back({{"t", pt.chain == Chain::neg ? "-1" : "z"},
                       {"n", pt.n},
                       {"re", f[i].real()},
                       {"im", f[i].imag()}});
    }
    return arr.dump(2);
}

GridFunction grid_function_from_json(const Grid& g, const std::string& json_text) {
    nlohmann::json arr = nlohmann::json::parse(json_text);
    if (!arr.is_array())
        throw DomainError("grid function JSON must be an array of samples");
    GridFunction f(g);
    for (const auto& e : arr) {
        std::string t = e.at("t").get<std::string>();
        if (t != "-1" && t != "z")
            throw DomainError("grid function JSON: chain tag must be \"-1\" or \"z\"");
        GridPoint pt{t == "-1" ? Chain::neg : Chain::pos, e.at("n").get<int>()};
        if (!g.contains(pt))
            throw RangeError("grid function JSON sample outside grid truncation");
        f.set(pt, cplx(e.at("re").get<double>(), e.at("im").get<double>()));
    }
    return f;
}

} // namespace qspec::lattice
