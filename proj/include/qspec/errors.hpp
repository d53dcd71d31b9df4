#pragma once

#include <stdexcept>
#include <string>

namespace qspec {

// Common base so callers can catch everything from this library at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of the function.
struct DomainError : Error {
    using Error::Error;
};

// Evaluation would hit a pole (vanishing denominator factor).
struct PoleError : Error {
    using Error::Error;
};

// Nonterminating series with argument outside its convergence region.
struct DivergenceError : Error {
    using Error::Error;
};

// Invalid parameter tuple or preset at configuration time.
struct ConfigError : Error {
    using Error::Error;
};

// Two grid functions that must share a grid do not.
struct GridMismatch : Error {
    using Error::Error;
};

// Index outside the truncation range of a grid.
struct RangeError : Error {
    using Error::Error;
};

// Contour quadrature detected another singularity inside the circle.
struct ContourError : Error {
    using Error::Error;
};

// A function fed to the measure fails the lambda <-> 1/lambda symmetry check.
struct SymmetryError : Error {
    using Error::Error;
};

// Two spectral points with equal eigenvalue where distinct ones are required.
struct DegenerateError : Error {
    using Error::Error;
};

// Function support touches the grid truncation edge.
struct SupportError : Error {
    using Error::Error;
};

} // namespace qspec
