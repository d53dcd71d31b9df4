#pragma once

#include <vector>

namespace qspec::eigensolve {

// All eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
// and off-diagonal `off` (off.size() == diag.size() - 1), ascending.
//
// Sturm-count bisection, driven to a RELATIVE bracket width near roundoff
// for every eigenvalue individually.  This matters here: the matrices this
// library builds are heavily graded (norm ~ q^{-depth} with O(1) eigenvalues
// of interest), and standard QR/QL iteration or absolute-tolerance bisection
// loses the small eigenvalues entirely.  The LDL^T inertia count is
// scale-robust, so each eigenvalue is recovered to ~1e-14 relative.
std::vector<double> tridiag_eigenvalues(const std::vector<double>& diag,
                                        const std::vector<double>& off);

} // namespace qspec::eigensolve
