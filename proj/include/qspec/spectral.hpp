#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "qspec/eigenfun.hpp"
#include "qspec/errors.hpp"
#include "qspec/lattice.hpp"

// The spectral measure of the difference operator for z = 1: continuous
// density 1/|c(e^{i theta})|^2 on the upper half circle plus point masses at
// the zeros of c(1/.) inside (-1,1), together with the Green kernel and
// resolvent, and orthogonality checks for the polynomial family.

namespace qspec::spectral {

using eigenfun::ExpansionCoeffs;
using lattice::Grid;
using lattice::GridFunction;
using lattice::GridPoint;
using lattice::QParams;
using qcore::cplx;

struct Atom {
    double lambda; // in (-1,1), nonzero
    double mass;   // positive
};

struct DiscreteSpectrum {
    std::vector<Atom> atoms;
    double truncation_tol;
};

struct QuadNode {
    double theta;   // in (0, pi)
    double weight;  // Gauss-Legendre weight on (0, pi)
    double density; // 1/|c(e^{i theta})|^2
};

struct SpectralMeasure {
    QParams params; // z = 1
    double K;       // (1-q) theta(-1;q)/theta(-a^2;q)
    std::vector<QuadNode> nodes;
    DiscreteSpectrum atoms;
};

// Point masses sit at +-a q^{m+1/2} for every integer m keeping the value
// inside (-1,1), plus s/a when s is real with |s/a| < 1 strictly (ConfigError
// on the boundary |s/a| = 1).  Enumeration stops once a generation's mass
// falls below tol times the accumulated mass.  DomainError when z != 1.
DiscreteSpectrum discrete_spectrum(const QParams& pr, double tol = 1e-14);

// Continuous density at lambda = e^{i theta}, theta in (0, pi): 1/|c(lambda)|^2
// through the z = 1 factorization.  PoleError at theta in {0, pi}.
double density_W(cplx lambda, const QParams& pr);

// Closed-form mass of a single atom.  DomainError when lambda is not in the
// discrete spectrum.
double atom_mass(double lambda, const QParams& pr);

// Independent numerical check of a mass: trapezoid contour average of
// 1/(l c(l) c(1/l)) on a small circle around lambda, oriented so the result
// is the positive mass.  radius <= 0 selects q/4 times the gap to the
// nearest other atom.  ContourError when halving the radius moves the result
// (another singularity inside, or a non-simple zero).
double residue_oracle(double lambda, const QParams& pr, double radius = 0.0, int nodes = 64);

// Assembles Gauss-Legendre nodes on (0, pi) with the density attached, the
// normalization K, and the truncated atom list.  DomainError when z != 1.
SpectralMeasure build_measure(const QParams& pr, int n_quad = 200, double atom_tol = 1e-14);

// Integral of f against the measure:
//   (1/2piK) sum_nodes wt W f(e^{i theta}) + (1/K) sum_atoms mass f(lambda).
// f must satisfy f(lambda) = f(1/lambda); this is checked on the atoms
// (SymmetryError beyond 1e-8 relative).
cplx integrate_nu(const std::function<cplx(cplx)>& f, const SpectralMeasure& m);

// Gram matrix G[n][k] = integral of P_n P_k d nu for the recurrence family
// with b = s/a, c = 1/(s a), 0 <= n,k <= N.  N capped at 20.
std::vector<std::vector<cplx>> orthogonality_matrix(int N, const SpectralMeasure& m);

// G_lambda(x,y) = phi(min) Psi(max) / D with D = K c(1/lambda)(1/lambda - lambda),
// for lambda in the open unit disk.  PoleError where c(1/lambda) vanishes
// (point spectrum) and at lambda = +-1.
cplx green_kernel(cplx lambda, GridPoint x, GridPoint y, const QParams& pr);

// (R f)(y) = -sum_x f(x) G_lambda(x,y) w(x)(1-q)|x|, the sign chosen so that
// (L - mu(lambda)) R f = f on the grid interior.
GridFunction resolvent_apply(const GridFunction& f, cplx lambda, const QParams& pr);

// JSON {K, nodes:[{theta,weight,density}], atoms:[{lambda,mass}]} and a flat
// CSV with one row per node and per atom.
std::string measure_to_json(const SpectralMeasure& m);
SpectralMeasure measure_from_json(const std::string& text);
std::string measure_to_csv(const SpectralMeasure& m);

} // namespace qspec::spectral
