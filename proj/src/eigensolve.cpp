#include "qspec/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qspec::eigensolve {

namespace {

// Number of eigenvalues strictly below sigma: sign changes of the LDL^T
// pivot recurrence d_i = (a_i - sigma) - b_{i-1}^2 / d_{i-1}.  A vanishing
// pivot is replaced by a tiny value of the same sign convention; this is the
// standard safeguard and does not disturb the count.
int sturm_count(const std::vector<double>& diag, const std::vector<double>& off2,
                double sigma) {
    int cnt = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double b2 = (i > 0) ? off2[i - 1] : 0.0;
        d = (diag[i] - sigma) - (d != 0.0 ? b2 / d : b2 / 1e-300);
        if (d < 0.0) ++cnt;
    }
    return cnt;
}

} // namespace

std::vector<double> tridiag_eigenvalues(const std::vector<double>& diag,
                                        const std::vector<double>& off) {
    const std::size_t n = diag.size();
    if (n == 0) return {};
    if (off.size() + 1 != n)
        throw std::invalid_argument("tridiag_eigenvalues: off.size() must be diag.size()-1");

    std::vector<double> off2(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) off2[i] = off[i] * off[i];

    // Gershgorin bound.
    double lo0 = diag[0], hi0 = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < n) r += std::abs(off[i]);
        lo0 = std::min(lo0, diag[i] - r);
        hi0 = std::max(hi0, diag[i] + r);
    }
    double pad = 1e-3 * (std::abs(lo0) + std::abs(hi0)) + 1.0;
    lo0 -= pad;
    hi0 += pad;

    std::vector<double> ev(n);
    for (std::size_t k = 0; k < n; ++k) {
        double lo = lo0, hi = hi0;
        for (int it = 0; it < 300; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break; // bracket at ulp resolution
            if (sturm_count(diag, off2, mid) <= static_cast<int>(k))
                lo = mid;
            else
                hi = mid;
            if (hi - lo <= 1e-15 * std::max(std::abs(lo), std::abs(hi))) break;
        }
        ev[k] = 0.5 * (lo + hi);
    }
    return ev;
}

} // namespace qspec::eigensolve
