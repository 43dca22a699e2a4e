#include "riskgen/genlab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "riskgen/errors.hpp"
#include "riskgen/optimize.hpp"

namespace riskgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_basic(const PenaltySpec& spec, double h) {
    spec.check_horizon(h);
    const auto v = spec.basic_violations();
    if (!v.empty()) throw ValidationError("penalty: " + v.front());
}

// v -> phi(sqrt(v)) convex, so the canonical dilation coupling is optimal for mart_ot
bool sqrt_convex(const CostFunction& phi) {
    if (phi.closed_form()) return phi.exponent() >= 2.0;
    const auto& kv = phi.knot_v();
    double prev = -kInf;
    for (std::size_t i = 0; i + 1 < kv.size(); ++i) {
        const double s = (phi(kv[i + 1]) - phi(kv[i])) / (kv[i + 1] * kv[i + 1] - kv[i] * kv[i]);
        if (s < prev - 1e-9 * (1.0 + std::abs(prev))) return false;
        prev = s;
    }
    return true;
}

// gain - pen is negative beyond r; r may be +inf, in which case boundedness is probed
Extremum maximize_on_ray(const ScalarFn& gain, const ScalarFn& pen, double r) {
    const auto obj = [&](double x) { return gain(x) - pen(x); };
    if (std::isinf(r)) {
        std::vector<double> xs, vs;
        for (int k = 0; k <= 30; ++k) {
            xs.push_back(std::pow(4.0, k - 5));
            vs.push_back(obj(xs.back()));
        }
        // cancellation noise grows with the gain term
        std::vector<double> noise;
        for (double x : xs) noise.push_back(1e-12 * (1.0 + std::abs(gain(x))));
        const std::size_t n = xs.size();
        if (vs[n - 1] > vs[n - 2] + noise[n - 1] && vs[n - 1] > noise[n - 1])
            throw DomainError("generator sup is +inf (penalty grows too slowly)");
        double top = -kInf;
        for (std::size_t j = 0; j < n; ++j) top = std::max(top, vs[j] - noise[j]);
        std::size_t k = 0;
        while (vs[k] + noise[k] < top) ++k;
        r = xs[std::min(k + 1, xs.size() - 1)];
    }
    if (!(r > 0.0)) return {0.0, 0.0};
    auto e = scan_golden_maximize(obj, 0.0, r, 400, 1e-10 * std::max(1.0, r));
    if (e.value < 0.0) e = {0.0, 0.0};
    return e;
}

}  // namespace

double compute_g_h(const PenaltySpec& spec, const ReferenceModel& model, double h, double m) {
    if (spec.martingale()) throw ValidationError("compute_g_h: first-order kind required");
    check_basic(spec, h);
    if (m == 0.0) return 0.0;
    const double sgn = m > 0.0 ? 1.0 : -1.0, am = std::abs(m);
    std::function<double(double)> shift_penalty;
    if (spec.kind == PenaltyKind::wasserstein || spec.phi.convex()) {
        // W_p of a translation is |b|; for convex phi the translation coupling is optimal by Jensen
        shift_penalty = [&](double b) { return h * spec.phi(b / h); };
    } else {
        const auto mu = discretize_mu(model, h);
        if (mu.size() <= 60) {
            shift_penalty = [&, mu](double b) { return penalty_value(spec, h, mu, mu.shifted(sgn * b)); };
        } else {
            // translation coupling: an upper bound on the penalty, so g_h is bounded from below
            shift_penalty = [&](double b) { return h * spec.phi(b / h); };
        }
    }
    const double r = h * growth_radius(spec.phi, am, 1.0, 0.0);
    return maximize_on_ray([&](double b) { return am * b; }, shift_penalty, r).value;
}

double compute_G_h(const PenaltySpec& spec, const ReferenceModel& model, double h, double a) {
    if (!spec.martingale()) throw ValidationError("compute_G_h: martingale kind required");
    check_basic(spec, h);
    if (a <= 0.0) return 0.0;
    if (spec.kind == PenaltyKind::mart_wasserstein) {
        // W_p^mart(mu, mu * B^theta) = theta for p >= 2
        const double w = growth_radius(spec.phi, a, 1.0, 0.0);
        const double r = std::isinf(w) ? kInf : std::sqrt(2.0 * h * w);
        return maximize_on_ray([&](double th) { return 0.5 * a * th * th; },
                               [&](double th) { return dilation_penalty(spec, h, th); }, r)
            .value;
    }
    std::function<double(double)> pen = [&](double th) { return dilation_penalty(spec, h, th); };
    std::optional<DiscreteMeasure> mu;
    if (!sqrt_convex(spec.phi)) {
        mu = discretize_mu(model, h);
        if (mu->size() <= 40) pen = [&](double th) { return penalty_value(spec, h, *mu, dilation_measure(*mu, th)); };
    }
    const double x = growth_radius(spec.phi, a, 2.0, 0.0);
    const double r = std::isinf(x) ? kInf : std::sqrt(2.0 * h) * x;
    return maximize_on_ray([&](double th) { return 0.5 * a * th * th; }, pen, r).value;
}

double analytic_limit(const PenaltySpec& spec, double arg) {
    try {
        switch (spec.kind) {
            case PenaltyKind::ot:
            case PenaltyKind::wasserstein: return conjugate(spec.phi, std::abs(arg));
            case PenaltyKind::mart_wasserstein: return conjugate(spec.phi, std::max(arg, 0.0));
            case PenaltyKind::mart_ot: return arg <= 0.0 ? 0.0 : power_conjugate(spec.phi, arg, 2.0);
        }
    } catch (const DomainError&) {
        return kInf;
    }
    return kInf;
}

namespace {

template <class Gen>
double residual(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                const GridFunction& deriv, double R, Gen&& gen) {
    if (!(deriv.grid() == f.grid())) throw ValidationError("residual: derivative samples must share the grid");
    const Grid& g = f.grid();
    std::size_t first = g.n, last = 0;
    for (std::size_t i = 0; i < g.n; ++i)
        if (std::abs(g.x(i)) <= R + 1e-12) {
            first = std::min(first, i);
            last = i;
        }
    if (first > last) throw DomainError("residual: no grid node with |x| <= R");
    const auto I = apply_I_nodes(spec, model, h, f, first, last);
    const auto P = apply_P(model, h, f);
    double worst = 0.0;
    for (std::size_t i = first; i <= last; ++i)
        worst = std::max(worst, std::abs(I[i - first] - P[i] - gen(deriv[i])) / h);
    return worst;
}

}  // namespace

double generator_residual_first(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                                const GridFunction& gradient, double R) {
    if (spec.martingale()) throw ValidationError("generator_residual_first: first-order kind required");
    return residual(spec, model, h, f, gradient, R, [&](double m) { return compute_g_h(spec, model, h, m); });
}

double generator_residual_second(const PenaltySpec& spec, const ReferenceModel& model, double h,
                                 const GridFunction& f, const GridFunction& hessian, double R) {
    if (!spec.martingale()) throw ValidationError("generator_residual_second: martingale kind required");
    return residual(spec, model, h, f, hessian, R, [&](double a) { return compute_G_h(spec, model, h, a); });
}

GeneratorEstimate limit_profile(const PenaltySpec& spec, const ReferenceModel& model, const std::vector<double>& h,
                                const std::vector<double>& args) {
    for (std::size_t k = 1; k < h.size(); ++k)
        if (!(h[k] < h[k - 1])) throw ValidationError("limit_profile: h list must be decreasing");
    GeneratorEstimate out;
    out.order = spec.martingale() ? GeneratorOrder::second : GeneratorOrder::first;
    out.h = h;
    out.args = args;
    for (double hk : h) {
        std::vector<double> row;
        for (double x : args)
            row.push_back((spec.martingale() ? compute_G_h(spec, model, hk, x) : compute_g_h(spec, model, hk, x)) / hk);
        out.scaled.push_back(std::move(row));
    }
    for (double x : args) out.analytic.push_back(analytic_limit(spec, x));
    out.cauchy.assign(h.size(), 0.0);
    for (std::size_t k = 1; k < h.size(); ++k)
        for (std::size_t j = 0; j < args.size(); ++j)
            out.cauchy[k] = std::max(out.cauchy[k], std::abs(out.scaled[k][j] - out.scaled[k - 1][j]));
    if (!out.scaled.empty()) {
        const auto& row = out.scaled.back();
        double prev = -kInf;
        for (std::size_t j = 0; j + 1 < args.size(); ++j) {
            const double s = (row[j + 1] - row[j]) / (args[j + 1] - args[j]);
            if (s < prev - 1e-8) out.convex = false;
            prev = s;
            if (row[j + 1] < row[j] - 1e-12 && out.order == GeneratorOrder::second) out.monotone = false;
        }
    }
    return out;
}

}  // namespace riskgen
