#include "qspec/eigenfun.hpp"

#include <cmath>

namespace qspec::eigenfun {

namespace {

constexpr int kDegreeCap = 60;
constexpr double kSeriesArgCutoff = 0.9;


} // namespace

cplx mu_of(cplx lambda) {
    if (lambda == cplx(0.0))
        throw DomainError("mu(lambda) undefined at lambda = 0");
    return lambda + 1.0 / lambda;
}

SpectralPoint SpectralPoint::of(cplx lambda) { return SpectralPoint{lambda, mu_of(lambda)}; }

cplx ipow(cplx base, long n) {
    if (n < 0)
        return 1.0 / ipow(base, -n);
    cplx acc(1.0), p = base;
    for (long k = n; k > 0; k >>= 1) {
        if (k & 1)
            acc *= p;
        p *= p;
    }
    return acc;
}

std::vector<cplx> asc_poly_all(int N, cplx lambda, cplx b, cplx c, QBase base) {
    if (N < 0)
        throw RangeError("polynomial degree must be nonnegative");
    if (N > kDegreeCap)
        throw RangeError("polynomial degree exceeds the double-precision cap of 60");
    double q = base.q;
    cplx mu = mu_of(lambda);
    cplx bc = b * c, bpc = b + c;
    std::vector<cplx> out(static_cast<std::size_t>(N) + 1);
    out[0] = 1.0;
    cplx pm1(0.0);
    for (int n = 0; n < N; ++n) {
        double qmn = std::pow(q, -n);
        cplx den = 1.0 - bc * qmn;
        if (std::abs(den) < 1e-14 * (1.0 + std::abs(bc) * qmn))
            throw PoleError("vanishing leading coefficient in polynomial recurrence");
        cplx pn = out[static_cast<std::size_t>(n)];
        out[static_cast<std::size_t>(n) + 1] = ((mu - bpc * qmn) * pn - (1.0 - qmn) * pm1) / den;
        pm1 = pn;
    }
    return out;
}

cplx asc_poly_rec(int n, cplx lambda, cplx b, cplx c, QBase base) {
    return asc_poly_all(n, lambda, b, c, base).back();
}

cplx asc_poly_hyp(int n, cplx lambda, cplx b, cplx c, QBase base) {
    if (n < 0)
        throw RangeError("polynomial degree must be nonnegative");
    if (n > kDegreeCap)
        throw RangeError("polynomial degree exceeds the double-precision cap of 60");
    double q = base.q;
    double qi = 1.0 / q;
    cplx bc = b * c;
    double qn = std::pow(q, n);
    cplx total(0.0), term(1.0);
    double qik = 1.0; // qi^k
    for (int k = 0; k <= n; ++k) {
        total += term;
        if (k == n)
            break;
        cplx den_pole = 1.0 - bc * qik;
        if (std::abs(den_pole) < 1e-14 * (1.0 + std::abs(bc) * qik))
            throw PoleError("lower parameter bc hits a pole of the terminating series");
        term *= (1.0 - qn * qik) * (1.0 - b * lambda * qik) * (1.0 - b / lambda * qik)
              / ((1.0 - qik * qi) * den_pole) * qi;
        qik *= qi;
    }
    return ipow(b, -n) * total;
}

namespace {

// Series branch of psi: sigma^{-n} 2phi1(a lambda/sigma, a/(lambda sigma);
// q/sigma^2 | q, -q x), valid whenever |q x| < 1.
cplx psi_series(cplx lambda, GridPoint x, cplx s_arg, const QParams& pr) {
    double t = (x.chain == lattice::Chain::neg) ? -1.0 : pr.z;
    double xv = t * std::pow(pr.q, x.n);
    cplx A = pr.a * lambda / s_arg;
    cplx B = pr.a / (lambda * s_arg);
    cplx C = pr.q / (s_arg * s_arg);
    return ipow(s_arg, -x.n) * qcore::phi21(A, B, C, pr.base(), cplx(-pr.q * xv));
}

cplx Psi_series(cplx lambda, GridPoint x, const QParams& pr) {
    double xv = pr.z * std::pow(pr.q, x.n);
    cplx A = pr.a * lambda / pr.s;
    cplx B = pr.a * pr.s * lambda;
    cplx C = pr.q * lambda * lambda;
    cplx pref = ipow(pr.a * lambda, -x.n);
    return pref * qcore::phi21(A, B, C, pr.base(), cplx(-pr.q / (pr.a * pr.a * xv)));
}

// Largest exponent n on the positive chain where the Psi series argument
// q/(a^2 z q^n) still satisfies the cutoff.
int series_exponent_cutoff(const QParams& pr) {
    return static_cast<int>(std::floor(
        std::log(pr.q / (kSeriesArgCutoff * pr.a * pr.a * pr.z)) / std::log(pr.q)));
}

// Psi continued past the series region toward x -> 0 by stepping the
// three-term relation from two in-region rows.  The characteristic roots of
// the relation at x -> 0 are s and 1/s, both of unit modulus, so the stepping
// is neutral and does not amplify the seed error.  Writing Psi through the
// psi basis instead cancels catastrophically for small |lambda|: the basis
// coefficients grow like theta(a/lambda) while the value stays of moderate
// size, which is exactly what this routine avoids.
cplx Psi_continued(cplx lambda, int n, const QParams& pr) {
    int nc = series_exponent_cutoff(pr);
    if (n <= nc)
        return Psi_series(lambda, GridPoint{lattice::Chain::pos, n}, pr);
    cplx mu = mu_of(lambda);
    double a = pr.a, spc = pr.spc();
    cplx fm2 = Psi_series(lambda, GridPoint{lattice::Chain::pos, nc - 1}, pr);
    cplx fm1 = Psi_series(lambda, GridPoint{lattice::Chain::pos, nc}, pr);
    for (int j = nc; j < n; ++j) {
        double x = pr.z * std::pow(pr.q, j);
        cplx next = ((mu + spc / x) * fm1 - (1.0 / a) * (1.0 + 1.0 / x) * fm2)
                  / (a * (1.0 + 1.0 / (a * a * x)));
        fm2 = fm1;
        fm1 = next;
    }
    return fm1;
}

cplx d_coef(cplx lambda, cplx sigma, const QParams& pr) {
    QBase base = pr.base();
    double a = pr.a;
    cplx num = qcore::qpoch_infinite({a * sigma * lambda, a * sigma / lambda}, base);
    cplx den = qcore::qpoch_infinite(cplx(a * a), base) * qcore::qpoch_infinite(sigma * sigma, base);
    return num / den;
}

cplx b_coef(cplx lambda, cplx sigma, const QParams& pr) {
    QBase base = pr.base();
    double a = pr.a, q = pr.q, z = pr.z;
    cplx num = qcore::qpoch_infinite({q / (a * sigma * lambda), a / (sigma * lambda)}, base);
    cplx den = qcore::qpoch_infinite(1.0 / (lambda * lambda), base)
             * qcore::qpoch_infinite(q / (sigma * sigma), base);
    cplx th = qcore::theta(-q * a * z * lambda / sigma, base) / qcore::theta(cplx(-q * z), base);
    return num / den * th;
}

// Theta-sum closed form of c(lambda).
cplx c_theta(cplx lambda, const QParams& pr) {
    QBase base = pr.base();
    double a = pr.a, q = pr.q, z = pr.z;
    cplx s = pr.s;
    cplx pref = qcore::qpoch_infinite({a * s / lambda, a / (s * lambda)}, base)
              / (qcore::qpoch_infinite(cplx(a * a), base)
                 * qcore::qpoch_infinite(1.0 / (lambda * lambda), base)
                 * qcore::theta(cplx(-q * z), base));
    cplx t1 = qcore::theta({a * s * lambda, -q * a * z * lambda / s}, base)
            / qcore::theta(s * s, base);
    cplx t2 = qcore::theta({a * lambda / s, -q * a * s * z * lambda}, base)
            / qcore::theta(1.0 / (s * s), base);
    return pref * (t1 + t2);
}

void guard_unit_lambda(cplx lambda) {
    if (std::abs(lambda - cplx(1.0)) < 1e-10 || std::abs(lambda + cplx(1.0)) < 1e-10)
        throw PoleError("connection coefficients have a pole at lambda = +-1");
}

// The c-expansion degenerates whenever lambda^2 lands on q^Z: the two
// Frobenius exponents differ by an integer, Psi_{1/lambda} (and c itself)
// develops a simple pole, and the two series terms cancel to the finite phi.
// Within ~1e-3 of the resonance set the cancellation costs more digits than
// the d-route, which stays regular there; beyond it the roundoff
// amplification eps/dist is negligible.
bool near_resonance(cplx lambda, double q) {
    cplx l2 = lambda * lambda;
    double r = std::abs(l2);
    if (!(r > 0.0) || !std::isfinite(r))
        return true;
    double kf = std::round(std::log(r) / std::log(q));
    for (double k : {kf - 1.0, kf, kf + 1.0}) {
        double qk = std::pow(q, k);
        if (std::abs(l2 - qk) <= 1e-3 * qk)
            return true;
    }
    return false;
}

// Upward continuation of psi along the positive chain: series values at
// n = 1, 0 seed the eigen-relation solved for f(x/q).
cplx psi_extended_pos(cplx lambda, int n_target, cplx s_arg, const QParams& pr) {
    if (n_target >= 0)
        return psi_series(lambda, GridPoint{lattice::Chain::pos, n_target}, s_arg, pr);
    double q = pr.q, a = pr.a, z = pr.z;
    cplx mu = mu_of(lambda);
    cplx spc = (pr.s + 1.0 / pr.s) / a;
    cplx f_qx = psi_series(lambda, GridPoint{lattice::Chain::pos, 1}, s_arg, pr);
    cplx f_x = psi_series(lambda, GridPoint{lattice::Chain::pos, 0}, s_arg, pr);
    for (int n = 0; n > n_target; --n) {
        double xv = z * std::pow(q, n);
        cplx up = ((mu + spc / xv) * f_x - a * (1.0 + 1.0 / (a * a * xv)) * f_qx) * a / (1.0 + 1.0 / xv);
        f_qx = f_x;
        f_x = up;
    }
    return f_x;
}

} // namespace

cplx psi_small(cplx lambda, GridPoint x, cplx s_arg, const QParams& pr) {
    if (x.chain == lattice::Chain::neg) {
        if (x.n < 0)
            throw RangeError("negative-chain exponent must be nonnegative");
        return psi_series(lambda, x, s_arg, pr);
    }
    return psi_extended_pos(lambda, x.n, s_arg, pr);
}

cplx psi_big(cplx lambda, GridPoint x, const QParams& pr) {
    if (x.chain == lattice::Chain::pos) {
        double xv = pr.z * std::pow(pr.q, x.n);
        double arg = pr.q / (pr.a * pr.a * xv);
        if (std::abs(arg) <= kSeriesArgCutoff)
            return Psi_series(lambda, x, pr);
    }
    guard_unit_lambda(lambda);
    // Invert the 2x2 connection system at this point.
    cplx bp_s = b_coef(lambda, pr.s, pr);
    cplx bm_s = b_coef(1.0 / lambda, pr.s, pr);
    cplx bp_i = b_coef(lambda, 1.0 / pr.s, pr);
    cplx bm_i = b_coef(1.0 / lambda, 1.0 / pr.s, pr);
    cplx det = bp_s * bm_i - bm_s * bp_i;
    if (std::abs(det) == 0.0)
        throw DegenerateError("connection system singular: Casorati constant vanished");
    cplx ps = psi_small(lambda, x, pr.s, pr);
    cplx pi = psi_small(lambda, x, 1.0 / pr.s, pr);
    return (ps * bm_i - pi * bm_s) / det;
}

double casorati_K(const QParams& pr) {
    QBase base = pr.base();
    cplx num = qcore::theta(cplx(-pr.z), base);
    cplx den = qcore::theta(cplx(-pr.z * pr.a * pr.a), base);
    return (1.0 - pr.q) * (num / den).real();
}

ExpansionCoeffs expansion_coefficients(cplx lambda, const QParams& pr) {
    guard_unit_lambda(lambda);
    ExpansionCoeffs co;
    co.b_plus = b_coef(lambda, pr.s, pr);
    co.b_minus = b_coef(1.0 / lambda, pr.s, pr);
    co.b_plus_inv = b_coef(lambda, 1.0 / pr.s, pr);
    co.b_minus_inv = b_coef(1.0 / lambda, 1.0 / pr.s, pr);
    co.d_s = d_coef(lambda, pr.s, pr);
    co.d_sinv = d_coef(lambda, 1.0 / pr.s, pr);
    co.c_plus = c_theta(lambda, pr);
    co.c_minus = c_theta(1.0 / lambda, pr);
    return co;
}

cplx c_one(cplx lambda, const QParams& pr) {
    if (pr.z != 1.0)
        throw DomainError("factorized c-function requires z = 1");
    guard_unit_lambda(lambda);
    QBase base = pr.base();
    QBase base2(pr.q * pr.q);
    double a = pr.a, q = pr.q;
    cplx s = pr.s;
    cplx num = qcore::qpoch_infinite({a * s / lambda, a / (s * lambda)}, base)
             * qcore::theta(a * a * lambda * lambda * q, base2);
    cplx den = qcore::qpoch_infinite(cplx(a * a), base)
             * qcore::qpoch_infinite(1.0 / (lambda * lambda), base)
             * qcore::theta(q * s * s, base2);
    return num / den;
}

cplx phi(cplx lambda, GridPoint x, const QParams& pr, bool at_atom) {
    if (x.chain == lattice::Chain::neg) {
        if (x.n < 0)
            throw RangeError("negative-chain exponent must be nonnegative");
        cplx b = pr.s / pr.a, c = 1.0 / (pr.s * pr.a);
        cplx pn = asc_poly_rec(x.n, lambda, b, c, pr.base());
        return ipow(cplx(1.0 / pr.a), x.n) * pn;
    }
    // Point spectrum: the 1/lambda branch drops out, and the single Psi term
    // is valid on the whole chain through the continuation.  (A resonant
    // lambda, possible only for special a, falls through to the d-route.)
    if (at_atom && !near_resonance(lambda, pr.q))
        return c_theta(lambda, pr) * Psi_continued(lambda, x.n, pr);
    if (x.n >= 0) {
        cplx ds = d_coef(lambda, pr.s, pr);
        cplx di = d_coef(lambda, 1.0 / pr.s, pr);
        return ds * psi_series(lambda, x, pr.s, pr) + di * psi_series(lambda, x, 1.0 / pr.s, pr);
    }
    double xv = pr.z * std::pow(pr.q, x.n);
    double arg = pr.q / (pr.a * pr.a * xv);
    if (std::abs(arg) <= kSeriesArgCutoff && !near_resonance(lambda, pr.q)) {
        return c_theta(lambda, pr) * Psi_series(lambda, x, pr)
             + c_theta(1.0 / lambda, pr) * Psi_series(1.0 / lambda, x, pr);
    }
    cplx ds = d_coef(lambda, pr.s, pr);
    cplx di = d_coef(lambda, 1.0 / pr.s, pr);
    return ds * psi_extended_pos(lambda, x.n, pr.s, pr)
         + di * psi_extended_pos(lambda, x.n, 1.0 / pr.s, pr);
}

std::vector<cplx> phi_column(cplx lambda, const Grid& g, bool at_atom) {
    const QParams& pr = g.params;
    std::vector<cplx> col(g.size());
    cplx bpar = pr.s / pr.a, cpar = 1.0 / (pr.s * pr.a);
    std::vector<cplx> P = asc_poly_all(g.neg_depth, lambda, bpar, cpar, pr.base());
    cplx apow(1.0);
    for (int n = 0; n <= g.neg_depth; ++n) {
        col[g.index_of(GridPoint{lattice::Chain::neg, n})] = apow * P[static_cast<std::size_t>(n)];
        apow /= pr.a;
    }
    int nc = series_exponent_cutoff(pr);
    if (at_atom && !near_resonance(lambda, pr.q) && nc - 1 >= -g.pos_high) {
        // Point spectrum: single c(lambda) Psi term, series where it
        // converges, then continued row by row (the recursion is linear, so
        // it can run on the c-scaled values directly).
        cplx cp = c_theta(lambda, pr);
        cplx mu = mu_of(lambda);
        double a = pr.a, spc = pr.spc();
        for (int n = -g.pos_high; n <= g.pos_low; ++n) {
            GridPoint pt{lattice::Chain::pos, n};
            std::size_t i = g.index_of(pt);
            if (n <= nc) {
                col[i] = cp * Psi_series(lambda, pt, pr);
                continue;
            }
            double x = pr.z * std::pow(pr.q, n - 1);
            cplx fm1 = col[g.index_of(GridPoint{lattice::Chain::pos, n - 1})];
            cplx fm2 = col[g.index_of(GridPoint{lattice::Chain::pos, n - 2})];
            col[i] = ((mu + spc / x) * fm1 - (1.0 / a) * (1.0 + 1.0 / x) * fm2)
                   / (a * (1.0 + 1.0 / (a * a * x)));
        }
        return col;
    }
    cplx ds = d_coef(lambda, pr.s, pr);
    cplx di = d_coef(lambda, 1.0 / pr.s, pr);
    cplx cp(0.0), cm(0.0);
    bool have_c = false;
    for (int n = -g.pos_high; n <= g.pos_low; ++n) {
        GridPoint pt{lattice::Chain::pos, n};
        std::size_t i = g.index_of(pt);
        if (n >= 0) {
            col[i] = ds * psi_series(lambda, pt, pr.s, pr) + di * psi_series(lambda, pt, 1.0 / pr.s, pr);
            continue;
        }
        double xv = pr.z * std::pow(pr.q, n);
        if (std::abs(pr.q / (pr.a * pr.a * xv)) <= kSeriesArgCutoff && !near_resonance(lambda, pr.q)) {
            if (!have_c) {
                cp = c_theta(lambda, pr);
                if (!at_atom)
                    cm = c_theta(1.0 / lambda, pr);
                have_c = true;
            }
            col[i] = at_atom ? cp * Psi_series(lambda, pt, pr)
                             : cp * Psi_series(lambda, pt, pr) + cm * Psi_series(1.0 / lambda, pt, pr);
        } else {
            col[i] = ds * psi_extended_pos(lambda, n, pr.s, pr)
                   + di * psi_extended_pos(lambda, n, 1.0 / pr.s, pr);
        }
    }
    return col;
}

EigenFamily make_eigen_family(SpectralPoint pt, const Grid& g) {
    const QParams& pr = g.params;
    EigenFamily fam{pt, pr, GridFunction(g), GridFunction(g), GridFunction(g), GridFunction(g),
                    GridFunction(g), expansion_coefficients(pt.lambda, pr)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        GridPoint x = g.point(i);
        fam.psi_s[i] = psi_small(pt.lambda, x, pr.s, pr);
        fam.psi_sinv[i] = psi_small(pt.lambda, x, 1.0 / pr.s, pr);
        fam.Psi_plus[i] = psi_big(pt.lambda, x, pr);
        fam.Psi_minus[i] = psi_big(1.0 / pt.lambda, x, pr);
        fam.phi[i] = phi(pt.lambda, x, pr);
    }
    return fam;
}

} // namespace qspec::eigenfun
