#pragma once

#include <complex>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/lattice.hpp"
#include "qspec/qcore.hpp"

// Eigenfunctions of the q-difference operator at eigenvalue mu = lambda + 1/lambda:
// the asymptotically-free pair psi(.;s^{+-1}), the pair Psi_{lambda^{+-1}} free at
// the upper end of the positive chain, the distinguished solution phi (polynomial
// on the negative chain), and the connection coefficients b, d, c between them.

namespace qspec::eigenfun {

using lattice::Grid;
using lattice::GridFunction;
using lattice::GridPoint;
using lattice::QParams;
using qcore::cplx;
using qcore::QBase;

struct SpectralPoint {
    cplx lambda;
    cplx mu; // lambda + 1/lambda

    static SpectralPoint of(cplx lambda);
};

cplx mu_of(cplx lambda);

// Integer power with exact binary exponentiation (n may be negative).
cplx ipow(cplx base, long n);

// Polynomial family P_n(lambda; b, c) in base 1/q, three-term recurrence
//   (1 - bc q^{-n}) P_{n+1} = (mu - (b+c) q^{-n}) P_n - (1 - q^{-n}) P_{n-1},
// P_0 = 1, P_{-1} = 0.  Degree capped at 60: the q^{-n} coefficient growth
// exhausts double precision beyond that (RangeError).  PoleError when a
// leading coefficient 1 - bc q^{-n} vanishes.
cplx asc_poly_rec(int n, cplx lambda, cplx b, cplx c, QBase base);

// All of P_0..P_N in one sweep (same recurrence).
std::vector<cplx> asc_poly_all(int N, cplx lambda, cplx b, cplx c, QBase base);

// Same polynomial through its terminating hypergeometric representation
//   b^{-n} 3phi2(q^n, b lambda, b/lambda; bc, 0 | 1/q, 1/q),
// summed over exactly n+1 terms.  Symmetric in b <-> c and lambda <-> 1/lambda.
cplx asc_poly_hyp(int n, cplx lambda, cplx b, cplx c, QBase base);

// psi_lambda(x; sigma): for points with |x| <= max(1, z) the convergent series
//   sigma^{-n} 2phi1(a lambda/sigma, a/(lambda sigma); q/sigma^2 | q, -qx),
// x = t q^n; for deeper positive points z q^{-j} the value is continued by
// stepping the eigen-relation upward from the last two series-valid points.
cplx psi_small(cplx lambda, GridPoint x, cplx s_arg, const QParams& pr);

// Psi_lambda(z q^n): the series (a lambda)^{-n} 2phi1(a lambda/s, a s lambda;
// q lambda^2 | q, -q/(a^2 x)) where it converges (|q/(a^2 x)| <= 0.9 is the
// cutoff used); elsewhere, including the whole negative chain, continued
// through the 2x2 connection system
//   psi(x; sigma) = b(lambda; sigma) Psi_lambda(x) + b(1/lambda; sigma) Psi_{1/lambda}(x),
// sigma in {s, 1/s}, whose determinant is a nonzero Casorati constant.  The
// continuation matches the limits of the two chains at 0, which is what the
// Green kernel requires.
cplx psi_big(cplx lambda, GridPoint x, const QParams& pr);

// The Casorati constant of the Psi pair: D(Psi_{1/lambda}, Psi_lambda) =
// K (1/lambda - lambda) with K = (1-q) theta(-z; q)/theta(-z a^2; q).
double casorati_K(const QParams& pr);

// Connection coefficients at a fixed lambda.
//   d(lambda; sigma)   = (a sigma lambda, a sigma/lambda; q)_inf / ((a^2; q)_inf (sigma^2; q)_inf)
//   b(lambda; sigma)   = (q/(a sigma lambda), a/(sigma lambda); q)_inf
//                        / ((lambda^{-2}; q)_inf (q/sigma^2; q)_inf)
//                        * theta(-q a z lambda/sigma; q) / theta(-q z; q)
//   c(lambda)          = theta-sum closed form; equals d_s b_s + d_{1/s} b_{1/s}.
struct ExpansionCoeffs {
    cplx b_plus;      // b(lambda; s)
    cplx b_minus;     // b(1/lambda; s)
    cplx b_plus_inv;  // b(lambda; 1/s)
    cplx b_minus_inv; // b(1/lambda; 1/s)
    cplx d_s;         // d(lambda; s)
    cplx d_sinv;      // d(lambda; 1/s)
    cplx c_plus;      // c(lambda)
    cplx c_minus;     // c(1/lambda)
};

// PoleError at lambda = +-1 (the (lambda^{-2}; q)_inf denominator vanishes).
ExpansionCoeffs expansion_coefficients(cplx lambda, const QParams& pr);

// The z = 1 factorization of c(lambda):
//   (a s/lambda, a/(s lambda); q)_inf theta(a^2 lambda^2 q; q^2)
//   / ((a^2; q)_inf (lambda^{-2}; q)_inf theta(q s^2; q^2)).
// DomainError when pr.z != 1.
cplx c_one(cplx lambda, const QParams& pr);

// phi_lambda(x): equals d_s psi(x;s) + d_{1/s} psi(x;1/s) everywhere, evaluated
// by region for stability: a^{-n} P_n on the negative chain, the d-combination
// for 0 < x <= z, and the c-combination c(lambda) Psi_lambda + c(1/lambda)
// Psi_{1/lambda} above z.  With at_atom set (lambda a zero of c(1/.)), the
// second c-term is dropped: its coefficient is exactly zero there while the
// factor it multiplies overflows.
cplx phi(cplx lambda, GridPoint x, const QParams& pr, bool at_atom = false);

// phi at every point of a grid in one sweep: the polynomial family is built
// by a single recurrence pass and the connection coefficients are computed
// once.  Same values as phi(lambda, ., pr, at_atom).
std::vector<cplx> phi_column(cplx lambda, const Grid& g, bool at_atom = false);

// The whole solution family tabulated on a grid.
struct EigenFamily {
    SpectralPoint point;
    QParams params;
    GridFunction psi_s, psi_sinv, Psi_plus, Psi_minus, phi;
    ExpansionCoeffs coeffs;
};

EigenFamily make_eigen_family(SpectralPoint pt, const Grid& g);

// Re-exported operator so eigen-equation checks can live beside the
// eigenfunctions.
using lattice::apply_L;
using lattice::ApplyLResult;

} // namespace qspec::eigenfun
