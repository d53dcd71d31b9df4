#include "qspec/qcore.hpp"

#include <cmath>
#include <cstdlib>

namespace qspec::qcore {

namespace {

constexpr double kProductTail = 1e-18;

// True when u is within 1e-14 relative of q^{-m} for some integer m >= 0;
// used to detect terminating series.
bool is_inverse_power(cplx u, double q, long& m_out) {
    double au = std::abs(u);
    if (au < 1.0 - 1e-14 || std::abs(u.imag()) > 1e-14 * au) return false;
    double m_real = -std::log(au) / std::log(q);
    long m = std::lround(m_real);
    if (m < 0) return false;
    cplx target = std::pow(q, static_cast<double>(-m));
    if (std::abs(u - target) <= 1e-14 * std::abs(target)) {
        m_out = m;
        return true;
    }
    return false;
}

} // namespace

QBase::QBase(double q_) : q(q_) {
    if (!(q > 0.0) || q > 0.999)
        throw DomainError("q must lie in (0, 0.999]");
}

cplx qpoch_finite(cplx x, QBase qb, long n) {
    const double q = qb.q;
    if (n >= 0) {
        cplx p = 1.0;
        cplx t = x;
        for (long j = 0; j < n; ++j) {
            p *= (1.0 - t);
            t *= q;
        }
        return p;
    }
    cplx p = 1.0;
    for (long k = 1; k <= -n; ++k) {
        cplx f = 1.0 - x * std::pow(q, static_cast<double>(-k));
        if (std::abs(f) < 1e-250)
            throw PoleError("(x;q)_n with n<0: denominator factor vanishes");
        p *= f;
    }
    return 1.0 / p;
}

cplx qpoch_infinite(cplx x, QBase qb) {
    const double q = qb.q;
    cplx p = 1.0;
    cplx t = x;
    // Factors decay geometrically; at q = 0.999 this takes ~5e4 iterations,
    // still cheap for a scalar kernel.
    while (std::abs(t) >= kProductTail) {
        p *= (1.0 - t);
        t *= q;
    }
    // First skipped factor group: log prod_{j>=J}(1-xq^j) ~ -xq^J/(1-q).
    p *= (1.0 - t / (1.0 - q));
    return p;
}

cplx qpoch_infinite(std::initializer_list<cplx> xs, QBase qb) {
    cplx p = 1.0;
    for (cplx x : xs) p *= qpoch_infinite(x, qb);
    return p;
}

cplx theta(cplx x, QBase qb) {
    if (x == cplx(0.0))
        throw DomainError("theta(x;q) undefined at x = 0");
    return qpoch_infinite(x, qb) * qpoch_infinite(qb.q / x, qb);
}

cplx theta(std::initializer_list<cplx> xs, QBase qb) {
    cplx p = 1.0;
    for (cplx x : xs) p *= theta(x, qb);
    return p;
}

cplx rphis(std::span<const cplx> upper, std::span<const cplx> lower, QBase qb, cplx arg) {
    const double q = qb.q;
    const long r = static_cast<long>(upper.size());
    const long s = static_cast<long>(lower.size());
    const long ex = 1 + s - r; // exponent of the (-1)^n q^C(n,2) factor

    long terminate_at = -1;
    for (cplx u : upper) {
        long m;
        if (is_inverse_power(u, q, m))
            if (terminate_at < 0 || m < terminate_at) terminate_at = m;
    }
    // A lower parameter in q^{-N} kills the denominator at term m+1; that is
    // only acceptable when the series terminates strictly before it.
    for (cplx l : lower) {
        long m;
        if (is_inverse_power(l, q, m) && (terminate_at < 0 || terminate_at > m))
            throw PoleError("rphis lower parameter in q^{-N}");
    }
    if (terminate_at < 0) {
        if (ex < 0 && arg != cplx(0.0))
            throw DivergenceError("rphis with r > s+1 diverges unless terminating");
        if (ex == 0 && std::abs(arg) >= 1.0)
            throw DivergenceError("nonterminating series requires |arg| < 1");
    }

    cplx sum = 1.0;
    cplx term = 1.0;
    double qn = 1.0; // q^n
    int stall = 0;
    for (long n = 0; n < 100000; ++n) {
        if (terminate_at >= 0 && n == terminate_at) break;
        cplx ratio = arg;
        for (cplx u : upper) ratio *= (1.0 - u * qn);
        for (cplx l : lower) {
            cplx f = 1.0 - l * qn;
            if (std::abs(f) < 1e-250)
                throw PoleError("rphis lower parameter in q^{-N}");
            ratio /= f;
        }
        ratio /= (1.0 - q * qn);
        if (ex != 0) {
            // incremental [(-1) q^n]^ex
            cplx extra = -qn;
            for (long e = 0; e < std::labs(ex); ++e)
                ratio = (ex > 0) ? ratio * extra : ratio / extra;
        }
        term *= ratio;
        sum += term;
        qn *= q;
        if (std::abs(term) < 1e-16 * std::abs(sum)) {
            if (++stall >= 5) return sum;
        } else {
            stall = 0;
        }
    }
    if (terminate_at < 0)
        throw DivergenceError("rphis failed to converge within the term cap");
    return sum;
}

cplx phi21(cplx A, cplx B, cplx C, QBase qb, cplx arg) {
    const cplx up[] = {A, B};
    const cplx lo[] = {C};
    return rphis(up, lo, qb, arg);
}

} // namespace qspec::qcore
