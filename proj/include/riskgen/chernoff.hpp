#pragma once

#include <cstddef>
#include <vector>

#include "riskgen/grid.hpp"
#include "riskgen/onestep.hpp"
#include "riskgen/reference.hpp"

namespace riskgen {

struct Snapshot {
    int step = 0;
    GridFunction value;
};

/**
 * @brief n-fold composition of I_{t/n} on a fixed grid.
 *
 * Nodes in [trust_lo, trust_hi] are not influenced by the constant boundary
 * extension over the whole run.
 */
struct ChernoffRun {
    double t = 0.0;
    int n = 0;
    PenaltySpec spec;
    ReferenceModel model;
    // steps {0, n/4, n/2, 3n/4, n}, duplicates removed
    std::vector<Snapshot> trajectory;
    double trust_lo = 0.0;
    double trust_hi = 0.0;
    // total propagation radius subtracted from each end of the grid
    double propagation = 0.0;

    const GridFunction& final() const { return trajectory.back().value; }
};

struct ChernoffOptions {
    // comparisons are made on |x| <= radius, which must lie in the trust region
    double radius = 2.0;
    // relative slack for the per-step structural spot checks
    double tolerance = 1e-9;
    OneStepOptions onestep;
};

// propagation radius of n steps of size t/n from f; +inf when no bound is available
double propagation_radius(const PenaltySpec& spec, const ReferenceModel& model, double t, int n,
                          const GridFunction& f);

ChernoffRun iterate(const PenaltySpec& spec, const ReferenceModel& model, double t, int n, const GridFunction& f,
                    const ChernoffOptions& options = {});

struct ConvergenceRow {
    int n = 0;
    double error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    // each error at most 1.1 times its predecessor
    bool monotone = true;
    // error(last) / error(first), NaN when error(first) = 0
    double ratio = 0.0;
};

ConvergenceTable convergence_study(const PenaltySpec& spec, const ReferenceModel& model, double t,
                                   const std::vector<int>& n_list, const GridFunction& f,
                                   const GridFunction& comparator, const ChernoffOptions& options = {});

// errors nonincreasing within slack (relative) and error(last) <= error(first) / factor
bool decreasing_verdict(const std::vector<double>& errors, double slack, double factor);

struct SemigroupCheck {
    // sup |iterate(t, 2n) - iterate(t/2, n) o iterate(t/2, n)| on |x| <= radius
    double composition_gap = 0.0;
    // sup |iterate(t, 2n) - iterate(t, n)| on |x| <= radius
    double scheme_error = 0.0;
    bool pass = false;
};

SemigroupCheck semigroup_check(const PenaltySpec& spec, const ReferenceModel& model, double t, int n,
                               const GridFunction& f, const ChernoffOptions& options = {});

}  // namespace riskgen
