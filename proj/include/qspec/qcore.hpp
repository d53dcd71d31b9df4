#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "qspec/errors.hpp"

// Scalar kernel: q-shifted factorials, theta functions, and basic
// hypergeometric series in double precision.  Everything else in the
// library reduces to these.

namespace qspec::qcore {

using cplx = std::complex<double>;

// Base of all q-series.  Restricted to (0, 0.999]: products and series
// lengths blow up as q -> 1.
struct QBase {
    double q;
    explicit QBase(double q_);
};

// (x;q)_n.  For n >= 0 the finite product prod_{j<n}(1 - x q^j); for n < 0
// the quotient form 1 / prod_{k=1..-n}(1 - x q^{-k}).  Throws PoleError when
// a negative-index denominator factor vanishes.
cplx qpoch_finite(cplx x, QBase qb, long n);

// (x;q)_infinity, truncated once the running factor is below roundoff, with
// a first-order tail correction.  Relative error near unit roundoff for
// |x| <= 1e6.
cplx qpoch_infinite(cplx x, QBase qb);

// Product of several infinite q-shifted factorials (common in the closed
// forms, where four or more appear at once).
cplx qpoch_infinite(std::initializer_list<cplx> xs, QBase qb);

// theta(x;q) = (x;q)_inf (q/x;q)_inf.  Vanishes exactly on x in q^Z.
cplx theta(cplx x, QBase qb);
cplx theta(std::initializer_list<cplx> xs, QBase qb);

// r_phi_s basic hypergeometric series with the standard
// [(-1)^n q^(n(n-1)/2)]^(1+s-r) factor.  Terminating series are detected
// from upper parameters within 1e-14 relative of q^{-m}; nonterminating
// series require |arg| < 1 when r = s+1 (DivergenceError otherwise) and any
// arg when r <= s.  PoleError when a lower parameter lies in q^{-N}.
cplx rphis(std::span<const cplx> upper, std::span<const cplx> lower, QBase qb, cplx arg);

// Convenience wrapper for the ubiquitous 2phi1.
cplx phi21(cplx A, cplx B, cplx C, QBase qb, cplx arg);

} // namespace qspec::qcore
