#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/lattice.hpp"

// Self-check harness behind the CLI: parameter presets, the verification
// suites (scalar identities, eigenfunctions, measure, transform), and an
// independent finite-matrix cross-check of the spectrum.

namespace qspec::verify {

using lattice::QParams;
using qcore::cplx;

// generic   : parameters taken as given.
// symmetric : s forced to i (the self-dual choice on the unit circle).
// laguerre  : (a, s) forced to (q^{-alpha/2 - 1/4}, q^{1/4}); requires
//             alpha < -1/2 so that a^2 < 1 (ConfigError otherwise).
enum class Preset { generic, symmetric, laguerre };

struct RunConfig {
    double q = 0.5;
    double a = 0.6;
    cplx s = cplx(0.5, 0.8660254037844386); // e^{i pi/3}
    double z = 1.0;
    Preset preset = Preset::generic;
    double alpha = -0.7;

    double tol = 1e-8; // headline tolerance echoed into reports
    int n_quad = 200;
    int neg_depth = 60;
    int pos_low = 60;
    int pos_high = 40;
    std::uint64_t seed = 20240917;

    std::string out;           // output path; empty = stdout
    std::string format = "json"; // "json" | "csv" where applicable

    // Applies the preset substitutions and validates (ConfigError).
    QParams resolved() const;
};

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<CheckResult> suite;
    QParams params;
    std::vector<std::pair<std::string, double>> timing; // seconds per suite

    bool all_pass() const;
    std::string to_json() const;
};

// Runs every suite applicable to the configuration.  The measure, transform,
// and matrix suites need z = 1 and are skipped otherwise (the report then
// contains only the scalar and eigenfunction checks).
VerificationReport run_verify(const RunConfig& cfg);

// Independent spectral cross-check: L is assembled as a real symmetric
// tridiagonal matrix on a single path through the truncated lattice, the two
// chains glued where they meet at 0 (values at -q^D and z q^D identified,
// their row entries averaged with their integration weights).  All
// eigenvalues are computed by Sturm bisection and compared against the
// spectrum the measure predicts:
//   - the images mu(lambda) of the six heaviest atoms each have a matrix
//     eigenvalue within 1e-3;
//   - every eigenvalue small enough to be trustworthy (below the square root
//     of the largest matrix entry) lies in [-2, 2] up to 1e-2 or near some
//     atom image;
//   - no eigenvalue exceeds the largest enumerated atom image by more than 0.1;
//   - the largest eigenvalue gap inside [-2, 2] shrinks when the path grows,
//     as it must over continuous spectrum.
std::vector<CheckResult> matrix_crosscheck(const RunConfig& cfg);

// Serialized measure for cfg.resolved() in cfg.format ("json" or "csv";
// RangeError otherwise).
std::string export_measure(const RunConfig& cfg);

} // namespace qspec::verify
