#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/lattice.hpp"
#include "qspec/spectral.hpp"

// The unitary transform pair between grid functions and functions on the
// spectrum: (F f)(lambda) = sum f(x) phi_lambda(x) w(x)(1-q)|x| and its
// inverse (G h)(x) = integral of h conj(phi_.(x)) against the measure.

namespace qspec::transform {

using lattice::Grid;
using lattice::GridFunction;
using lattice::GridPoint;
using lattice::QParams;
using qcore::cplx;
using spectral::SpectralMeasure;

// A function on the spectrum, sampled at the measure's quadrature nodes and
// atoms.  The lambda <-> 1/lambda invariance is structural: values are keyed
// by theta in (0, pi) and by the in-disk atom positions.
struct HFunction {
    std::vector<cplx> circle; // one value per measure node, same order
    std::vector<cplx> atom;   // one value per measure atom, same order
};

// phi tabulated at every (spectral point, grid point) pair.  Columns at atoms
// use the one-term c-expansion, which is the stable route there.
class PhiTable {
  public:
    PhiTable(const SpectralMeasure& m, const Grid& g);

    const SpectralMeasure& measure() const { return m_; }
    const Grid& grid() const { return g_; }

    cplx at_node(std::size_t node, std::size_t gi) const { return nodes_[node][gi]; }
    cplx at_atom(std::size_t atom, std::size_t gi) const { return atoms_[atom][gi]; }

  private:
    SpectralMeasure m_;
    Grid g_;
    std::vector<std::vector<cplx>> nodes_, atoms_;
};

// Forward transform of a finitely supported grid function.  SupportError if
// a nonzero value sits on a truncation edge (its neighbors are missing, so
// the sums below would silently lose mass).
HFunction forward_F(const GridFunction& f, const PhiTable& t);
HFunction forward_F(const GridFunction& f, const SpectralMeasure& m);

// Inverse transform back to the grid.
GridFunction inverse_G(const HFunction& h, const PhiTable& t);
GridFunction inverse_G(const HFunction& h, const SpectralMeasure& m, const Grid& g);

// Truncated inner product of two generalized eigenfunctions in the limit of
// full lower/negative range at upper level l:
//   D(phi_lambda, phi_lambda')(z q^{-l-1}) / (mu - mu').
// DegenerateError when mu(lambda) = mu(lambda').
cplx phi_inner_l(cplx lambda, cplx lambda_prime, int l, const QParams& pr);

// Leading asymptotics of phi_inner_l for large l:
//   K/(mu-mu') sum_{e,h in +-1} (lam^e - lam'^h)(lam^e lam'^h)^l c(lam^e) c(lam'^h).
// The error of this approximation decays like q^l on average.
cplx phi_inner_asymptotic(cplx lambda, cplx lambda_prime, int l, const QParams& pr);

// sup over nodes and atoms of |F(Lf)(lambda) - mu(lambda) (Ff)(lambda)|: the
// residual of the diagonalization property.
double diagonalization_check(const GridFunction& f, const PhiTable& t);

// JSON {circle:[{theta,re,im}], atoms:[{lambda,re,im}]}.
std::string hfunction_to_json(const HFunction& h, const SpectralMeasure& m);
HFunction hfunction_from_json(const std::string& text, const SpectralMeasure& m);

} // namespace qspec::transform
