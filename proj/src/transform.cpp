#include "qspec/transform.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "qspec/eigenfun.hpp"

namespace qspec::transform {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool touches_edge(const GridFunction& f) {
    const Grid& g = f.grid;
    auto nonzero = [&](GridPoint pt) { return f.at(pt) != cplx(0.0); };
    if (nonzero(GridPoint{lattice::Chain::neg, g.neg_depth}))
        return true;
    return nonzero(GridPoint{lattice::Chain::pos, g.pos_low})
        || nonzero(GridPoint{lattice::Chain::pos, -g.pos_high});
}

std::vector<double> point_masses(const Grid& g) {
    std::vector<double> om(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        om[i] = lattice::point_mass(g.params, g.point(i));
    return om;
}

} // namespace

PhiTable::PhiTable(const SpectralMeasure& m, const Grid& g) : m_(m), g_(g) {
    nodes_.reserve(m.nodes.size());
    for (const spectral::QuadNode& nd : m.nodes)
        nodes_.push_back(eigenfun::phi_column(std::polar(1.0, nd.theta), g, false));
    atoms_.reserve(m.atoms.atoms.size());
    for (const spectral::Atom& a : m.atoms.atoms)
        atoms_.push_back(eigenfun::phi_column(cplx(a.lambda), g, true));
}

HFunction forward_F(const GridFunction& f, const PhiTable& t) {
    if (!(f.grid == t.grid()))
        throw GridMismatch("transform table was built for a different grid");
    if (touches_edge(f))
        throw SupportError("support touches the grid truncation edge");
    const Grid& g = t.grid();
    std::vector<double> om = point_masses(g);
    std::vector<std::size_t> supp;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (f[i] != cplx(0.0))
            supp.push_back(i);
    HFunction h;
    h.circle.resize(t.measure().nodes.size());
    h.atom.resize(t.measure().atoms.atoms.size());
    for (std::size_t n = 0; n < h.circle.size(); ++n) {
        cplx acc(0.0);
        for (std::size_t i : supp)
            acc += f[i] * t.at_node(n, i) * om[i];
        h.circle[n] = acc;
    }
    for (std::size_t a = 0; a < h.atom.size(); ++a) {
        cplx acc(0.0);
        for (std::size_t i : supp)
            acc += f[i] * t.at_atom(a, i) * om[i];
        h.atom[a] = acc;
    }
    return h;
}

HFunction forward_F(const GridFunction& f, const SpectralMeasure& m) {
    return forward_F(f, PhiTable(m, f.grid));
}

GridFunction inverse_G(const HFunction& h, const PhiTable& t) {
    const SpectralMeasure& m = t.measure();
    if (h.circle.size() != m.nodes.size() || h.atom.size() != m.atoms.atoms.size())
        throw GridMismatch("spectral function does not match the measure sampling");
    const Grid& g = t.grid();
    GridFunction out(g);
    double K = m.K;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx circ(0.0);
        for (std::size_t n = 0; n < m.nodes.size(); ++n)
            circ += m.nodes[n].weight * m.nodes[n].density * h.circle[n] * std::conj(t.at_node(n, i));
        cplx at(0.0);
        for (std::size_t a = 0; a < m.atoms.atoms.size(); ++a)
            at += m.atoms.atoms[a].mass * h.atom[a] * std::conj(t.at_atom(a, i));
        out[i] = circ / (2.0 * kPi * K) + at / K;
    }
    return out;
}

GridFunction inverse_G(const HFunction& h, const SpectralMeasure& m, const Grid& g) {
    return inverse_G(h, PhiTable(m, g));
}

cplx phi_inner_l(cplx lambda, cplx lambda_prime, int l, const QParams& pr) {
    cplx mu = eigenfun::mu_of(lambda), mup = eigenfun::mu_of(lambda_prime);
    if (std::abs(mu - mup) <= 1e-12 * std::max({std::abs(mu), std::abs(mup), 1.0}))
        throw DegenerateError("equal eigenvalues: the truncated inner product limit diverges");
    GridPoint x{lattice::Chain::pos, -l - 1};
    GridPoint qx{lattice::Chain::pos, -l};
    double xv = pr.z * std::pow(pr.q, x.n);
    cplx fx = eigenfun::phi(lambda, x, pr), fqx = eigenfun::phi(lambda, qx, pr);
    cplx gx = eigenfun::phi(lambda_prime, x, pr), gqx = eigenfun::phi(lambda_prime, qx, pr);
    double w = lattice::weight_w(pr, x);
    cplx D = (fx * gqx - fqx * gx) * (1.0 - pr.q) / pr.a * (1.0 + pr.a * pr.a * xv) * w;
    return D / (mu - mup);
}

cplx phi_inner_asymptotic(cplx lambda, cplx lambda_prime, int l, const QParams& pr) {
    cplx mu = eigenfun::mu_of(lambda), mup = eigenfun::mu_of(lambda_prime);
    if (std::abs(mu - mup) <= 1e-12 * std::max({std::abs(mu), std::abs(mup), 1.0}))
        throw DegenerateError("equal eigenvalues: the truncated inner product limit diverges");
    double K = eigenfun::casorati_K(pr);
    cplx acc(0.0);
    for (int e : {+1, -1}) {
        cplx le = (e > 0) ? lambda : 1.0 / lambda;
        cplx ce = eigenfun::c_one(le, pr);
        for (int h : {+1, -1}) {
            cplx lh = (h > 0) ? lambda_prime : 1.0 / lambda_prime;
            acc += (le - lh) * eigenfun::ipow(le * lh, l) * ce * eigenfun::c_one(lh, pr);
        }
    }
    return K * acc / (mu - mup);
}

double diagonalization_check(const GridFunction& f, const PhiTable& t) {
    HFunction hf = forward_F(f, t);
    lattice::ApplyLResult Lf = lattice::apply_L(f);
    if (Lf.edge_clipped)
        throw SupportError("L f spills over the truncation edge: support too close to it");
    HFunction hLf = forward_F(Lf.f, t);
    const SpectralMeasure& m = t.measure();
    double worst = 0.0;
    for (std::size_t n = 0; n < m.nodes.size(); ++n) {
        cplx mu = 2.0 * std::cos(m.nodes[n].theta);
        worst = std::max(worst, std::abs(hLf.circle[n] - mu * hf.circle[n]));
    }
    for (std::size_t a = 0; a < m.atoms.atoms.size(); ++a) {
        cplx mu = eigenfun::mu_of(cplx(m.atoms.atoms[a].lambda));
        worst = std::max(worst, std::abs(hLf.atom[a] - mu * hf.atom[a]));
    }
    return worst;
}

std::string hfunction_to_json(const HFunction& h, const SpectralMeasure& m) {
    if (h.circle.size() != m.nodes.size() || h.atom.size() != m.atoms.atoms.size())
        throw GridMismatch("spectral function does not match the measure sampling");
    nlohmann::json j;
    j["circle"] = nlohmann::json::array();
    for (std::size_t n = 0; n < h.circle.size(); ++n)
        j["circle"].push_back({{"theta", m.nodes[n].theta},
                               {"re", h.circle[n].real()},
                               {"im", h.circle[n].imag()}});
    j["atoms"] = nlohmann::json::array();
    for (std::size_t a = 0; a < h.atom.size(); ++a)
        j["atoms"].push_back({{"lambda", m.atoms.atoms[a].lambda},
                              {"re", h.atom[a].real()},
                              {"im", h.atom[a].imag()}});
    return j.dump(2);
}

HFunction hfunction_from_json(const std::string& text, const SpectralMeasure& m) {
    nlohmann::json j = nlohmann::json::parse(text);
    const auto& circ = j.at("circle");
    const auto& ats = j.at("atoms");
    if (circ.size() != m.nodes.size() || ats.size() != m.atoms.atoms.size())
        throw GridMismatch("spectral function does not match the measure sampling");
    HFunction h;
    for (std::size_t n = 0; n < circ.size(); ++n) {
        if (std::abs(circ[n].at("theta").get<double>() - m.nodes[n].theta) > 1e-12)
            throw GridMismatch("quadrature nodes differ from the measure's");
        h.circle.emplace_back(circ[n].at("re").get<double>(), circ[n].at("im").get<double>());
    }
    for (std::size_t a = 0; a < ats.size(); ++a) {
        if (std::abs(ats[a].at("lambda").get<double>() - m.atoms.atoms[a].lambda) > 1e-12)
            throw GridMismatch("atom positions differ from the measure's");
        h.atom.emplace_back(ats[a].at("re").get<double>(), ats[a].at("im").get<double>());
    }
    return h;
}

} // namespace qspec::transform
