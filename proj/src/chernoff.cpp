#include "riskgen/chernoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskgen/errors.hpp"

namespace riskgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> snapshot_steps(int n) {
    std::vector<int> s{0, n / 4, n / 2, (3 * n) / 4, n};
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace

double propagation_radius(const PenaltySpec& spec, const ReferenceModel& model, double t, int n,
                          const GridFunction& f) {
    const double h = t / n;
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    double far = 0.0;
    for (double y : mu.points()) far = std::max(far, std::abs(y - mu.mean()));
    // independent increments: n-step spread measured in standard deviations, not summed supports
    double r = std::max(6.0 * std::sqrt(n * mu.variance()), far) + n * std::abs(mu.mean());
    if (!model.psi_is_identity()) r += t * model.drift.sup_abs(g.xmin, g.xmax());

    const double osc = f.max_value() - f.min_value();
    if (osc <= 0.0) return r;
    const double L = f.lipschitz() * std::exp(model.drift.lipschitz() * t);
    const double w = step_window(spec, t / n, L, osc);
    // shifts add up linearly over the steps, symmetric dilations only in the square-root sense
    return r + (spec.martingale() ? std::sqrt(static_cast<double>(n)) : static_cast<double>(n)) * w;
}

ChernoffRun iterate(const PenaltySpec& spec, const ReferenceModel& model, double t, int n, const GridFunction& f,
                    const ChernoffOptions& options) {
    if (!(t > 0.0)) throw DomainError("iterate: horizon t must be positive");
    if (n < 1) throw DomainError("iterate: step count must be at least 1");
    const double h = t / n;
    spec.check_horizon(h);
    const Grid& g = f.grid();

    ChernoffRun run;
    run.t = t;
    run.n = n;
    run.spec = spec;
    run.model = model;
    run.propagation = propagation_radius(spec, model, t, n, f);
    run.trust_lo = g.xmin + run.propagation;
    run.trust_hi = g.xmax() - run.propagation;
    const double R = options.radius;
    if (!(run.trust_lo <= -R && R <= run.trust_hi)) {
        const double widen = std::isinf(run.propagation) ? kInf : std::max(run.trust_lo + R, R - run.trust_hi);
        std::ostringstream msg;
        msg << "iterate: |x| <= " << R << " is not inside the trust region [" << run.trust_lo << ", " << run.trust_hi
            << "]; widen the grid by " << widen << " on each side";
        throw WindowError(msg.str(), widen);
    }

    const auto steps = snapshot_steps(n);
    run.trajectory.push_back({0, f});
    GridFunction cur = f;
    std::size_t next = 1;
    for (int k = 1; k <= n; ++k) {
        GridFunction nxt = apply_I(spec, model, h, cur, options.onestep);
        // I_h sits between the constants min f and max f (monotone, cash invariant, penalty >= 0)
        const double tol = options.tolerance * (1.0 + cur.sup_norm());
        if (nxt.min_value() < cur.min_value() - tol || nxt.max_value() > cur.max_value() + tol) {
            std::ostringstream msg;
            msg << "iterate: step " << k << " left the range [min f, max f]";
            throw InvariantError(msg.str());
        }
        cur = std::move(nxt);
        if (next < steps.size() && steps[next] == k) {
            run.trajectory.push_back({k, cur});
            ++next;
        }
    }
    return run;
}

bool decreasing_verdict(const std::vector<double>& errors, double slack, double factor) {
    if (errors.empty()) return false;
    for (std::size_t k = 1; k < errors.size(); ++k)
        if (errors[k] > (1.0 + slack) * errors[k - 1]) return false;
    return errors.back() <= errors.front() / factor;
}

ConvergenceTable convergence_study(const PenaltySpec& spec, const ReferenceModel& model, double t,
                                   const std::vector<int>& n_list, const GridFunction& f,
                                   const GridFunction& comparator, const ChernoffOptions& options) {
    if (!(comparator.grid() == f.grid())) throw ValidationError("convergence_study: comparator must share the grid");
    ConvergenceTable tab;
    for (int n : n_list) {
        const auto run = iterate(spec, model, t, n, f, options);
        tab.rows.push_back({n, sup_distance(run.final(), comparator, options.radius)});
    }
    for (std::size_t k = 1; k < tab.rows.size(); ++k)
        if (tab.rows[k].error > 1.1 * tab.rows[k - 1].error) tab.monotone = false;
    if (!tab.rows.empty()) {
        const double e0 = tab.rows.front().error;
        tab.ratio = e0 > 0.0 ? tab.rows.back().error / e0 : std::numeric_limits<double>::quiet_NaN();
    }
    return tab;
}

SemigroupCheck semigroup_check(const PenaltySpec& spec, const ReferenceModel& model, double t, int n,
                               const GridFunction& f, const ChernoffOptions& options) {
    const auto full = iterate(spec, model, t, 2 * n, f, options);
    const auto coarse = iterate(spec, model, t, n, f, options);
    const auto half = iterate(spec, model, 0.5 * t, n, f, options);
    const auto composed = iterate(spec, model, 0.5 * t, n, half.final(), options);
    SemigroupCheck out;
    out.composition_gap = sup_distance(full.final(), composed.final(), options.radius);
    out.scheme_error = sup_distance(full.final(), coarse.final(), options.radius);
    out.pass = out.composition_gap <= 2.0 * out.scheme_error + 1e-12;
    return out;
}

}  // namespace riskgen
