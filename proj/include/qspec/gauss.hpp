#pragma once

#include <vector>

namespace qspec::quad {

// Gauss-Legendre rule on [-1, 1].
struct QuadRule {
    std::vector<double> x; // nodes, ascending
    std::vector<double> w; // weights, all positive
};

// Newton iteration on the Legendre recurrence; nodes accurate to ~1 ulp.
QuadRule gauss_legendre(int n);

} // namespace qspec::quad
