#pragma once

#include <vector>

namespace riskgen {

enum class LpStatus { optimal, infeasible, unbounded };

/// min c.x subject to A x = b, x >= 0, with A dense row-major (rows x cols).
struct LpProblem {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;

    LpProblem(int m, int n) : rows(m), cols(n), a(static_cast<std::size_t>(m) * n, 0.0), b(m, 0.0), c(n, 0.0) {}
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    // y with c - A^T y >= 0 at optimum
    std::vector<double> dual;
    double value = 0.0;
    double dual_value = 0.0;
    // most negative reduced cost at termination (0 when dual feasible)
    double dual_infeasibility = 0.0;
    int iterations = 0;
};

struct LpOptions {
    // phase-one residual above which the problem is declared infeasible (scaled by 1 + |b|_1)
    double feasibility_tol = 1e-9;
    double pivot_tol = 1e-11;
    int max_iterations = 200000;
};

// two-phase revised simplex with Bland's anti-cycling rule
LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace riskgen
