#pragma once

#include <cmath>
#include <functional>

namespace riskgen {

struct Extremum {
    double arg = 0.0;
    double value = 0.0;
};

using ScalarFn = std::function<double(double)>;

// golden-section search for a maximum of a unimodal function on [lo, hi]
Extremum golden_maximize(const ScalarFn& f, double lo, double hi, double tol = 1e-10);

/**
 * @brief Coarse scan on `points` equispaced nodes of [lo, hi] followed by a
 *        golden-section refinement around the best node.
 *
 * Ties on the grid go to the smallest argument. The returned value is never
 * below the best grid value.
 */
Extremum scan_golden_maximize(const ScalarFn& f, double lo, double hi, int points = 400,
                              double tol = 1e-10);

// same, for minimization
Extremum scan_golden_minimize(const ScalarFn& f, double lo, double hi, int points = 400,
                              double tol = 1e-10);

}  // namespace riskgen
