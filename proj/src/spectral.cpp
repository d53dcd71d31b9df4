#include "qspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "qspec/gauss.hpp"

namespace qspec::spectral {

namespace {

using eigenfun::ipow;
using qcore::QBase;

constexpr double kPi = 3.14159265358979323846;
constexpr int kFamilyCap = 60; // q^{m(m+1)} underflows double range long before this

void require_z1(const QParams& pr, const char* what) {
    if (pr.z != 1.0)
        throw DomainError(std::string(what) + " requires z = 1");
}

// Smallest integer m with a q^{m+1/2} < 1.
int family_start(const QParams& pr) {
    int m = 0;
    while (pr.a * std::pow(pr.q, m + 0.5) < 1.0)
        --m;
    return m + 1;
}

// Closed-form mass of the atom at sign * a q^{m+1/2}.
double family_mass(int sign, int m, const QParams& pr) {
    QBase base = pr.base();
    QBase base2(pr.q * pr.q);
    double q = pr.q, a = pr.a;
    cplx s = pr.s;
    double sg = static_cast<double>(sign);
    double rq = std::sqrt(q);
    cplx pref = qcore::qpoch_infinite({cplx(a * a), cplx(a * a), cplx(a * a * q), cplx(1.0 / (q * a * a))}, base)
              * qcore::theta(q * s * s, base2) * qcore::theta(q / (s * s), base2)
              / (2.0 * std::pow(qcore::qpoch_infinite(cplx(q * q), base2).real(), 2)
                 * qcore::qpoch_infinite({sg * a * a * rq * s, sg * a * a * rq / s,
                                          sg * s / rq, sg / (s * rq)}, base)
                 * qcore::theta(cplx(std::pow(a, 4) * q * q), base2));
    double fac1 = (1.0 - a * a * std::pow(q, 2 * m + 1)) / (1.0 - a * a * q);
    cplx fac2 = qcore::qpoch_finite(sg * a * a * rq * s, base, m)
              * qcore::qpoch_finite(sg * a * a * rq / s, base, m)
              / (qcore::qpoch_finite(sg * std::pow(q, 1.5) * s, base, m)
                 * qcore::qpoch_finite(sg * std::pow(q, 1.5) / s, base, m));
    double value = (pref * fac1 * fac2).real() * std::pow(q, static_cast<double>(m) * (m + 1));
    return -value; // orientation making the mass positive
}

double extra_atom_mass(const QParams& pr) {
    QBase base = pr.base();
    QBase base2(pr.q * pr.q);
    double q = pr.q, a = pr.a;
    double sr = pr.s.real();
    cplx num = qcore::qpoch_infinite({cplx(a * a), cplx(sr * sr / (a * a))}, base)
             * qcore::theta(cplx(sr * sr * q), base2);
    cplx den = qcore::qpoch_infinite({cplx(q), cplx(sr * sr)}, base)
             * qcore::theta(cplx(std::pow(a, 4) * q / (sr * sr)), base2);
    return (num / den).real();
}

bool has_extra_atom(const QParams& pr) {
    if (!pr.s_is_real())
        return false;
    double r = std::abs(pr.s.real() / pr.a);
    if (std::abs(r - 1.0) <= 1e-12)
        throw ConfigError("atom location |s/a| = 1 sits on the continuous spectrum boundary");
    return r < 1.0;
}

} // namespace

DiscreteSpectrum discrete_spectrum(const QParams& pr, double tol) {
    require_z1(pr, "discrete spectrum");
    DiscreteSpectrum out{{}, tol};
    double accum = 0.0;
    for (int m = family_start(pr); m <= kFamilyCap; ++m) {
        double lam = pr.a * std::pow(pr.q, m + 0.5);
        if (!(lam > 0.0))
            break; // underflow: all further masses are zero too
        double wp = family_mass(+1, m, pr);
        double wm = family_mass(-1, m, pr);
        if (accum > 0.0 && wp < tol * accum && wm < tol * accum)
            break;
        out.atoms.push_back({lam, wp});
        out.atoms.push_back({-lam, wm});
        accum += wp + wm;
    }
    if (has_extra_atom(pr))
        out.atoms.push_back({pr.s.real() / pr.a, extra_atom_mass(pr)});
    return out;
}

double density_W(cplx lambda, const QParams& pr) {
    require_z1(pr, "spectral density");
    if (std::abs(std::abs(lambda) - 1.0) > 1e-9)
        throw DomainError("density is defined on the unit circle");
    double theta = std::arg(lambda);
    if (theta < 0.0)
        theta = -theta; // lambda and conj(lambda) carry the same density
    if (theta < 1e-12 || theta > kPi - 1e-12)
        throw PoleError("density endpoint theta in {0, pi}: c has a zero of |.|^{-2} there");
    cplx c = eigenfun::c_one(std::polar(1.0, theta), pr);
    return 1.0 / std::norm(c);
}

double atom_mass(double lambda, const QParams& pr) {
    require_z1(pr, "atom mass");
    double q = pr.q, a = pr.a;
    if (pr.s_is_real()) {
        double sa = pr.s.real() / a;
        if (std::abs(lambda - sa) <= 1e-9 * std::max(1.0, std::abs(sa)) && has_extra_atom(pr))
            return extra_atom_mass(pr);
    }
    double al = std::abs(lambda);
    if (!(al > 0.0) || al >= 1.0)
        throw DomainError("atom must lie in (-1,1) minus 0");
    double mf = std::log(al / a) / std::log(q) - 0.5;
    int m = static_cast<int>(std::lround(mf));
    if (std::abs(a * std::pow(q, m + 0.5) - al) > 1e-9 * al)
        throw DomainError("lambda is not a point of the discrete spectrum");
    return family_mass(lambda > 0 ? +1 : -1, m, pr);
}

namespace {

double contour_average(double lam0, const QParams& pr, double radius, int nodes) {
    cplx tot(0.0);
    for (int j = 0; j < nodes; ++j) {
        double t = 2.0 * kPi * j / nodes;
        cplx dir = std::polar(1.0, t);
        cplx l = lam0 + radius * dir;
        cplx f = 1.0 / (l * eigenfun::c_one(l, pr) * eigenfun::c_one(1.0 / l, pr));
        tot += f * radius * dir;
    }
    // clockwise orientation: positive masses
    return -(tot / static_cast<double>(nodes)).real();
}

} // namespace

double residue_oracle(double lambda, const QParams& pr, double radius, int nodes) {
    require_z1(pr, "residue check");
    if (radius <= 0.0) {
        double gap = std::numeric_limits<double>::infinity();
        for (const Atom& at : discrete_spectrum(pr).atoms) {
            double d = std::abs(at.lambda - lambda);
            if (d > 1e-12 * std::max(1.0, std::abs(lambda)))
                gap = std::min(gap, d);
        }
        if (!std::isfinite(gap))
            gap = 0.5 * std::abs(lambda);
        radius = pr.q * gap / 4.0;
    }
    double full = contour_average(lambda, pr, radius, nodes);
    double half = contour_average(lambda, pr, radius / 2.0, nodes);
    double scale = std::max(std::abs(full), std::abs(half));
    if (scale > 1e-13 && std::abs(full - half) > 1e-9 * scale)
        throw ContourError("residue unstable under radius halving: enclosed singularity not simple/isolated");
    return half;
}

SpectralMeasure build_measure(const QParams& pr, int n_quad, double atom_tol) {
    require_z1(pr, "spectral measure");
    if (n_quad < 4)
        throw ConfigError("quadrature needs at least 4 nodes");
    SpectralMeasure m{pr, eigenfun::casorati_K(pr), {}, discrete_spectrum(pr, atom_tol)};
    quad::QuadRule rule = quad::gauss_legendre(n_quad);
    m.nodes.reserve(static_cast<std::size_t>(n_quad));
    for (int i = 0; i < n_quad; ++i) {
        double theta = 0.5 * (rule.x[static_cast<std::size_t>(i)] + 1.0) * kPi;
        double wt = rule.w[static_cast<std::size_t>(i)] * kPi / 2.0;
        m.nodes.push_back({theta, wt, density_W(std::polar(1.0, theta), pr)});
    }
    return m;
}

cplx integrate_nu(const std::function<cplx(cplx)>& f, const SpectralMeasure& m) {
    for (const Atom& at : m.atoms.atoms) {
        cplx v = f(cplx(at.lambda));
        cplx vi = f(cplx(1.0 / at.lambda));
        if (std::abs(v - vi) > 1e-8 * std::max(1.0, std::abs(v)))
            throw SymmetryError("integrand not invariant under lambda <-> 1/lambda on an atom");
    }
    cplx circ(0.0);
    for (const QuadNode& nd : m.nodes)
        circ += nd.weight * nd.density * f(std::polar(1.0, nd.theta));
    circ /= 2.0 * kPi * m.K;
    cplx at(0.0);
    for (const Atom& a : m.atoms.atoms)
        at += a.mass * f(cplx(a.lambda));
    return circ + at / m.K;
}

std::vector<std::vector<cplx>> orthogonality_matrix(int N, const SpectralMeasure& m) {
    if (N < 0 || N > 20)
        throw RangeError("polynomial degree cap for the Gram matrix is 20");
    const QParams& pr = m.params;
    cplx b = pr.s / pr.a, c = 1.0 / (pr.s * pr.a);
    std::size_t dim = static_cast<std::size_t>(N) + 1;
    std::vector<std::vector<cplx>> G(dim, std::vector<cplx>(dim, cplx(0.0)));
    auto accumulate = [&](cplx lambda, double weight) {
        std::vector<cplx> P = eigenfun::asc_poly_all(N, lambda, b, c, pr.base());
        for (std::size_t n = 0; n < dim; ++n)
            for (std::size_t k = 0; k < dim; ++k)
                G[n][k] += weight * P[n] * P[k];
    };
    for (const QuadNode& nd : m.nodes)
        accumulate(std::polar(1.0, nd.theta), nd.weight * nd.density / (2.0 * kPi * m.K));
    for (const Atom& a : m.atoms.atoms)
        accumulate(cplx(a.lambda), a.mass / m.K);
    return G;
}

namespace {

double position_of(GridPoint pt, const QParams& pr) {
    double t = (pt.chain == lattice::Chain::neg) ? -1.0 : pr.z;
    return t * std::pow(pr.q, pt.n);
}

cplx green_denominator(cplx lambda, const QParams& pr) {
    if (std::abs(lambda) >= 1.0)
        throw DomainError("Green kernel requires lambda in the open unit disk");
    ExpansionCoeffs co = eigenfun::expansion_coefficients(lambda, pr);
    if (std::abs(co.c_minus) < 1e-12 * std::abs(co.c_plus))
        throw PoleError("lambda is a point of the discrete spectrum: Green kernel pole");
    return eigenfun::casorati_K(pr) * co.c_minus * (1.0 / lambda - lambda);
}

} // namespace

cplx green_kernel(cplx lambda, GridPoint x, GridPoint y, const QParams& pr) {
    cplx D = green_denominator(lambda, pr);
    GridPoint lo = x, hi = y;
    if (position_of(x, pr) > position_of(y, pr))
        std::swap(lo, hi);
    return eigenfun::phi(lambda, lo, pr) * eigenfun::psi_big(lambda, hi, pr) / D;
}

GridFunction resolvent_apply(const GridFunction& f, cplx lambda, const QParams& pr) {
    const Grid& g = f.grid;
    cplx D = green_denominator(lambda, pr);
    std::size_t N = g.size();
    std::vector<double> pos(N);
    std::vector<cplx> phi_v(N), Psi_v(N), fw(N);
    bool any = false;
    for (std::size_t i = 0; i < N; ++i) {
        GridPoint pt = g.point(i);
        pos[i] = position_of(pt, pr);
        fw[i] = f[i] * lattice::point_mass(pr, pt);
        if (f[i] != cplx(0.0))
            any = true;
    }
    GridFunction out(g);
    if (!any)
        return out;
    for (std::size_t i = 0; i < N; ++i) {
        GridPoint pt = g.point(i);
        phi_v[i] = eigenfun::phi(lambda, pt, pr);
        Psi_v[i] = eigenfun::psi_big(lambda, pt, pr);
    }
    for (std::size_t j = 0; j < N; ++j) {
        cplx acc(0.0);
        for (std::size_t i = 0; i < N; ++i) {
            if (fw[i] == cplx(0.0))
                continue;
            acc += (pos[i] <= pos[j]) ? fw[i] * phi_v[i] * Psi_v[j]
                                      : fw[i] * Psi_v[i] * phi_v[j];
        }
        out[j] = -acc / D;
    }
    return out;
}

std::string measure_to_json(const SpectralMeasure& m) {
    nlohmann::json j;
    j["K"] = m.K;
    j["params"] = {{"q", m.params.q}, {"a", m.params.a},
                   {"s_re", m.params.s.real()}, {"s_im", m.params.s.imag()},
                   {"z", m.params.z}};
    j["nodes"] = nlohmann::json::array();
    for (const QuadNode& nd : m.nodes)
        j["nodes"].push_back({{"theta", nd.theta}, {"weight", nd.weight}, {"density", nd.density}});
    j["atoms"] = nlohmann::json::array();
    for (const Atom& a : m.atoms.atoms)
        j["atoms"].push_back({{"lambda", a.lambda}, {"mass", a.mass}});
    return j.dump(2);
}

SpectralMeasure measure_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const auto& p = j.at("params");
    QParams pr = QParams::checked(p.at("q").get<double>(), p.at("a").get<double>(),
                                  cplx(p.at("s_re").get<double>(), p.at("s_im").get<double>()),
                                  p.at("z").get<double>());
    SpectralMeasure m{pr, j.at("K").get<double>(), {}, {{}, 0.0}};
    for (const auto& nd : j.at("nodes"))
        m.nodes.push_back({nd.at("theta").get<double>(), nd.at("weight").get<double>(),
                           nd.at("density").get<double>()});
    for (const auto& a : j.at("atoms"))
        m.atoms.atoms.push_back({a.at("lambda").get<double>(), a.at("mass").get<double>()});
    return m;
}

std::string measure_to_csv(const SpectralMeasure& m) {
    std::string out = "kind,theta_or_lambda,weight_or_mass,density\n";
    char buf[160];
    for (const QuadNode& nd : m.nodes) {
        std::snprintf(buf, sizeof buf, "node,%.17g,%.17g,%.17g\n", nd.theta, nd.weight, nd.density);
        out += buf;
    }
    for (const Atom& a : m.atoms.atoms) {
        std::snprintf(buf, sizeof buf, "atom,%.17g,%.17g,\n", a.lambda, a.mass);
        out += buf;
    }
    return out;
}

} // namespace qspec::spectral
