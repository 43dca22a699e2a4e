#include "riskgen/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>

#include "riskgen/chernoff.hpp"
#include "riskgen/conjugate.hpp"
#include "riskgen/fixtures.hpp"
#include "riskgen/genlab.hpp"
#include "riskgen/measures.hpp"
#include "riskgen/onestep.hpp"
#include "riskgen/oracles.hpp"
#include "riskgen/testfn.hpp"

namespace riskgen {

namespace {

using Clock = std::chrono::steady_clock;

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? " " : "") + fmt("%.3e", xs[k]);
    return s;
}

ReferenceModel gaussian(double s0) {
    ReferenceModel m;
    m.increments = GaussianIncrements{s0};
    return m;
}

PenaltySpec ot_quadratic() { return PenaltySpec::ot(CostFunction::quadratic(1.0)); }
PenaltySpec mart_w() { return PenaltySpec::mart_wasserstein(4.0, CostFunction::power(2.0)); }

const std::vector<double> kM{-2, -1, -0.5, 0, 0.5, 1, 2};

// errors nonincreasing within 10% per step, last at most first / factor, all positive
bool decay_ok(const std::vector<double>& r, double factor) {
    for (double x : r)
        if (!(x > 0.0)) return false;
    return decreasing_verdict(r, 0.1, factor);
}

HjbProblem second_order_hjb(const GridFunction& f, double t) {
    HjbProblem p;
    p.order = GeneratorOrder::second;
    p.hamiltonian = SampledHamiltonian::from_penalty(mart_w(), -1.0, 40.0, 4101);
    p.model = gaussian(1.0);
    p.terminal = f;
    p.t = t;
    return p;
}

// second-order scenario shared by the convergence and oracle criteria
struct ClippedAbs {
    Grid grid{-8, 8, 0.01};
    double t = 0.25;
    double radius = 2.0;
    GridFunction f = TestFunction::abs_clipped(8.0).on(grid);
    VarianceScan scan() const {
        VarianceScanOptions o;
        o.radius = radius;
        return variance_scan_oracle(1.0, CostFunction::power(2.0), t, f, o);
    }
};

// ---- criteria

void conjugate_suite(CriterionResult& r) {
    double fy = 0.0, mono = 0.0, conv = 0.0, sandwich = 0.0;
    for (const auto& [name, c] : shipped_costs()) {
        std::vector<double> cs;
        for (int k = 0; k <= 100; ++k) cs.push_back(conjugate(c, 0.1 * k));
        for (int i = 0; i <= 100; ++i)
            for (int k = 0; k <= 100; ++k) fy = std::max(fy, 0.1 * i * 0.1 * k - c(0.1 * i) - cs[k]);
        for (int k = 0; k < 100; ++k) mono = std::max(mono, cs[k] - cs[k + 1]);
        for (int k = 1; k < 100; ++k) conv = std::max(conv, cs[k] - 0.5 * (cs[k - 1] + cs[k + 1]));
        const auto cc = biconjugate(c);
        for (int i = 0; i <= 100; ++i) {
            const double v = 0.1 * i;
            sandwich = std::max({sandwich, cc(v) - c(v), c(0.0) - cc(v)});
        }
    }
    double closed = 0.0;
    for (double gamma : {0.5, 1.0, 2.5})
        for (int k = 0; k <= 100; ++k) {
            const double w = 0.1 * k;
            closed = std::max(closed, std::abs(conjugate(CostFunction::quadratic(gamma), w) - gamma * w * w / 2));
        }
    r.pass = fy <= 1e-9 && mono <= 1e-9 && conv <= 1e-9 && sandwich <= 1e-9 && closed <= 1e-8;
    r.detail = fmt("%zu costs; violations FY %.1e mono %.1e conv %.1e sandwich %.1e; quadratic %.1e",
                   shipped_costs().size(), fy, mono, conv, sandwich, closed);
}

void first_order_identity(CriterionResult& r, const PenaltySpec& spec, const std::function<double(double)>& limit) {
    double err = 0.0;
    for (double h : {0.1, 0.05, 0.025, 0.0125})
        for (double m : kM) err = std::max(err, std::abs(compute_g_h(spec, gaussian(1.0), h, m) / h - limit(m)));
    r.pass = err <= 1e-6;
    r.detail = fmt("max |g_h/h - limit| = %.2e", err);
}

void second_order_identities(CriterionResult& r) {
    const std::vector<PenaltySpec> specs{mart_w(), PenaltySpec::mart_ot(CostFunction::power(4.0))};
    double err = 0.0, nonpos = 0.0;
    for (const auto& spec : specs)
        for (double h : {0.1, 0.05, 0.025})
            for (double a : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
                const double G = compute_G_h(spec, gaussian(1.0), h, a);
                // both limits reduce to (a+)^2 / 4 for these costs
                const double ap = std::max(a, 0.0);
                err = std::max(err, std::abs(G / h - ap * ap / 4));
                if (a <= 0.0) nonpos = std::max(nonpos, std::abs(G));
            }
    const double lim = std::max(std::abs(analytic_limit(specs[0], 1.5) - 0.5625),
                                std::abs(analytic_limit(specs[1], 1.5) - 0.5625));
    r.pass = err <= 1e-6 && nonpos == 0.0 && lim <= 1e-9;
    r.detail = fmt("max |G_h/h - limit| = %.2e; max |G_h(a<=0)| = %.1e", err, nonpos);
}

void residual_decay(CriterionResult& r, bool second) {
    const Grid g(-5, 5, 0.01);
    const auto bump = TestFunction::bump(0.0, 0.5, 1.0);
    const auto f = bump.on(g);
    const auto d = GridFunction::sample(g, [&](double x) { return second ? bump.hessian(x) : bump.gradient(x); });
    std::vector<double> res;
    for (int k = 0; k <= 5; ++k) {
        const double h = 0.1 * std::pow(2.0, -k);
        res.push_back(second ? generator_residual_second(mart_w(), gaussian(1.0), h, f, d, 2.0)
                             : generator_residual_first(ot_quadratic(), gaussian(1.0), h, f, d, 2.0));
    }
    r.pass = decay_ok(res, 5.0);
    r.detail = "residuals " + join(res) + fmt("; last/first %.3f", res.back() / res.front());
}

void structural_suite(CriterionResult& r) {
    std::mt19937_64 rng(41);
    const Grid g(-4, 4, 0.05);
    const double h = 0.05, tol = 1e-6;
    const auto model = gaussian(1.0);
    const std::vector<PenaltySpec> kinds{ot_quadratic(), PenaltySpec::wasserstein(2.0, CostFunction::power(2.0)),
                                         mart_w(), PenaltySpec::mart_ot(CostFunction::power(4.0))};
    double mono = 0.0, conv = 0.0, cash = 0.0, below = 0.0, band = 0.0;
    for (const auto& spec : kinds)
        for (int trial = 0; trial < 3; ++trial) {
            const auto a = random_trig(rng), b = random_trig(rng);
            const auto fa = GridFunction::sample(g, a);
            const auto fmax = GridFunction::sample(g, [&](double x) { return std::max(a(x), b(x)); });
            const auto fmid = GridFunction::sample(g, [&](double x) { return 0.5 * a(x) + 0.5 * b(x); });
            const auto fk = GridFunction::sample(g, [&](double x) { return a(x) + 1.75; });
            OneStepDiagnostics diag;
            const auto Ia = apply_I(spec, model, h, fa, {}, &diag), Imax = apply_I(spec, model, h, fmax);
            const auto Ib = apply_I(spec, model, h, GridFunction::sample(g, b));
            const auto Imid = apply_I(spec, model, h, fmid), Ik = apply_I(spec, model, h, fk);
            const auto Pa = apply_P(model, h, fa);
            // martingale kinds: the grid curvature of the interpolant adds curv dx^2 / 4
            const double bound = spec.martingale() ? h * spec.band_conjugate(a.curv()) + a.curv() * g.dx * g.dx / 4
                                                   : h * spec.band_conjugate(a.lip());
            // the band holds where the stencil never reaches the constant extension beyond the grid
            double reach = diag.window;
            for (double y : reference_law(model, h, g).points()) reach = std::max(reach, std::abs(y) + diag.window);
            for (std::size_t i = 0; i < g.n; ++i) {
                if (std::abs(g.x(i)) + reach <= g.xmax()) band = std::max(band, Ia[i] - Pa[i] - bound);
                mono = std::max(mono, Ia[i] - Imax[i]);
                conv = std::max(conv, Imid[i] - 0.5 * (Ia[i] + Ib[i]));
                cash = std::max(cash, std::abs(Ik[i] - Ia[i] - 1.75));
                below = std::max(below, Pa[i] - Ia[i]);
            }
        }
    r.pass = mono <= tol && conv <= tol && cash <= 1e-12 && below <= 1e-12 && band <= tol;
    r.detail = fmt("4 kinds x 3 functions; violations mono %.1e conv %.1e cash %.1e I>=P %.1e band %.1e", mono, conv,
                   cash, below, band);
}

void envelope_lp(CriterionResult& r) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1, 1), wt(0.05, 1);
    std::uniform_int_distribution<int> na(2, 20);
    const Grid g(-0.95, 0.95, 0.1);
    std::uniform_int_distribution<std::size_t> node(0, g.n - 1);
    const std::vector<PenaltySpec> specs{ot_quadratic(), PenaltySpec::ot(shipped_step_cost()),
                                         PenaltySpec::ot(CostFunction::power(3.0, 0.5))};
    OneStepOptions nodes;
    nodes.inner = InnerSup::nodes;
    double err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = na(rng);
        std::vector<double> p, w;
        for (int j = 0; j < n; ++j) {
            p.push_back(u(rng));
            w.push_back(wt(rng));
        }
        double s = 0.0;
        for (double x : w) s += x;
        for (double& x : w) x /= s;
        ReferenceModel model;
        model.increments = ScaledFixedIncrements{DiscreteMeasure::from_atoms(p, w)};
        std::vector<double> vals(g.n);
        for (double& v : vals) v = u(rng);
        const GridFunction f(g, vals);
        const auto& spec = specs[trial % specs.size()];
        const std::size_t i = node(rng);
        const double env = apply_I_nodes(spec, model, 0.2, f, i, i, nodes).front();
        err = std::max(err, std::abs(env - ot_marginal_lp_I(spec, model, 0.2, f, i)));
    }
    r.pass = err <= 1e-8 && g.n <= 20;
    r.detail = fmt("20 instances on %zu targets; max |envelope - LP| = %.2e", g.n, err);
}

void strassen(CriterionResult& r) {
    const auto corpus = strassen_corpus(200, 3);
    const PairCost dist = [](double y, double z) { return std::abs(z - y); };
    int agree = 0, feasible = 0;
    for (const auto& [mu, nu] : corpus) {
        const bool lp = min_cost_martingale_coupling(mu, nu, dist).has_value();
        feasible += lp;
        agree += lp == check_convex_order(mu, nu);
    }
    r.pass = agree == static_cast<int>(corpus.size()) && corpus.size() == 200;
    r.detail = fmt("%d/%zu agree (%d in convex order)", agree, corpus.size(), feasible);
}

void chernoff_first(CriterionResult& r) {
    const auto gate = entropic_gate();
    const Grid g(-12, 12, 0.01);
    const auto f = TestFunction::sine(1.0).on(g);
    const auto ent = entropic_oracle(gaussian(1.0), 1.0, 0.5, f);
    const auto tab = convergence_study(ot_quadratic(), gaussian(1.0), 0.5, {2, 4, 8, 16, 32, 64}, f, ent);
    std::vector<double> e;
    for (const auto& row : tab.rows) e.push_back(row.error);
    r.pass = gate.pass && decreasing_verdict(e, 0.1, 4.0);
    r.detail = "errors " + join(e) + fmt("; e64/e2 %.3f; gate %s", e.back() / e.front(), gate.pass ? "ok" : "FAILED");
}

void chernoff_second(CriterionResult& r) {
    const ClippedAbs sc;
    const auto scan = sc.scan();
    const auto u = hjb_solve(second_order_hjb(sc.f, sc.t));
    ChernoffOptions opt;
    opt.radius = sc.radius;
    std::vector<double> e, eh;
    double trust = 1e300;
    for (int n : {2, 4, 8, 16, 32, 64}) {
        const auto run = iterate(mart_w(), gaussian(1.0), sc.t, n, sc.f, opt);
        trust = std::min({trust, -run.trust_lo, run.trust_hi});
        e.push_back(sup_distance(run.final(), scan.value, sc.radius));
        eh.push_back(sup_distance(run.final(), u, sc.radius));
    }
    r.pass = decreasing_verdict(e, 0.1, 3.0);
    r.detail = "errors vs variance scan " + join(e) + fmt("; e64/e2 %.3f", e.back() / e.front());
    r.info.push_back("errors vs second-order HJB " + join(eh));
    r.info.push_back(fmt("compared on |x| <= %.1f; smallest trust half-width %.2f", sc.radius, trust));
}

void oracle_gate(CriterionResult& r) {
    const auto gate = entropic_gate();
    std::vector<double> ge;
    for (const auto& s : gate.scenarios) ge.push_back(s.error);

    const ClippedAbs sc;
    const double scan_gap = sup_distance(sc.scan().value, hjb_solve(second_order_hjb(sc.f, sc.t)), sc.radius);

    const Grid g(-8, 8, 0.02);
    const auto f = TestFunction::sine(1.0).on(g);
    MonteCarloOptions mo;
    mo.paths = 100000;
    mo.seed = 20240607;
    mo.points = {-1.0, 0.0, 0.7};
    std::vector<GridFunction> controls{GridFunction::constant(g, 0.0)};
    for (double b : {-1.0, -0.5, 0.5, 1.0}) controls.push_back(GridFunction::constant(g, b));
    controls.push_back(GridFunction::sample(g, [](double x) { return 0.6 * std::cos(x); }));
    const auto mc = mc_drift_lower_bound(gaussian(1.0), CostFunction::quadratic(1.0), 0.5, f, controls, mo);
    const auto ent = entropic_oracle(gaussian(1.0), 1.0, 0.5, f);
    double excess = -1e300;
    for (std::size_t p = 0; p < mo.points.size(); ++p)
        excess = std::max(excess, (mc.value[p] - ent(mo.points[p])) / mc.std_error[p]);

    const bool mc_ok = excess <= 3.0;
    r.pass = gate.pass && scan_gap <= 2e-2 && mc_ok;
    r.detail = "entropic vs HJB " + join(ge) + fmt("; scan vs HJB %.3e; MC max (value - entropic)/SE %.2f",
                                                   scan_gap, excess);
}

void semigroup(CriterionResult& r) {
    // hjb_solve: full horizon against two half horizons, each with its own automatic time step
    auto solve = [](const Grid& g, double t, const GridFunction* terminal) {
        HjbProblem p;
        p.hamiltonian = SampledHamiltonian::from_penalty(ot_quadratic(), -3.0, 3.0, 801);
        p.model = gaussian(1.0);
        p.terminal = terminal ? *terminal : TestFunction::sine(1.0).on(g);
        p.t = t;
        return hjb_solve(p);
    };
    const Grid g(-8, 8, 0.02), fine(-8, 8, 0.01);
    const auto full = solve(g, 0.5, nullptr);
    const auto mid = solve(g, 0.25, nullptr);
    const double hjb_gap = sup_distance(full, solve(g, 0.25, &mid), 2.0);
    const auto uf = solve(fine, 0.5, nullptr);
    const double hjb_err = sup_distance(full, GridFunction::sample(g, [&](double x) { return uf(x); }), 2.0);
    const bool hjb_ok = hjb_gap <= 2.0 * hjb_err;

    const Grid gc(-12, 12, 0.01);
    const auto c1 = semigroup_check(ot_quadratic(), gaussian(1.0), 0.5, 16, TestFunction::sine(1.0).on(gc));
    const ClippedAbs sc;
    ChernoffOptions opt;
    opt.radius = sc.radius;
    const auto c2 = semigroup_check(mart_w(), gaussian(1.0), sc.t, 8, sc.f, opt);

    r.pass = hjb_ok && c1.pass && c2.pass;
    r.detail = fmt("hjb gap %.2e vs scheme %.2e; chernoff first %.2e vs %.2e; second %.2e vs %.2e", hjb_gap, hjb_err,
                   c1.composition_gap, c1.scheme_error, c2.composition_gap, c2.scheme_error);
}

struct Entry {
    const char* name;
    double limit;
    std::function<void(CriterionResult&)> run;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries{
        {"conjugate suite", 1.0, conjugate_suite},
        {"first-order identity, ot quadratic", 5.0,
         [](CriterionResult& r) { first_order_identity(r, ot_quadratic(), [](double m) { return m * m / 2; }); }},
        {"first-order identity, wasserstein", 5.0,
         [](CriterionResult& r) {
             first_order_identity(r, PenaltySpec::wasserstein(2.0, CostFunction::power(2.0)),
                                  [](double m) { return conjugate(CostFunction::power(2.0), std::abs(m)); });
         }},
        {"second-order identities", 5.0, second_order_identities},
        {"first-order residual decay", 120.0, [](CriterionResult& r) { residual_decay(r, false); }},
        {"second-order residual decay", 120.0, [](CriterionResult& r) { residual_decay(r, true); }},
        {"one-step structural suite", 60.0, structural_suite},
        {"envelope-LP duality", 10.0, envelope_lp},
        {"convex order equivalence", 10.0, strassen},
        {"Chernoff convergence, first order", 300.0, chernoff_first},
        {"Chernoff convergence, second order", 300.0, chernoff_second},
        {"oracle cross-validation", 180.0, oracle_gate},
        {"semigroup property", 120.0, semigroup},
    };
    return entries;
}

}  // namespace

CriterionResult run_criterion(int id) {
    CriterionResult r;
    r.id = id;
    if (id < 1 || id > kCriterionCount) {
        r.name = "unknown";
        r.detail = "no such criterion";
        return r;
    }
    const auto& e = registry()[static_cast<std::size_t>(id - 1)];
    r.name = e.name;
    r.limit = e.limit;
    const auto t0 = Clock::now();
    try {
        e.run(r);
    } catch (const std::exception& ex) {
        r.pass = false;
        r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r.seconds > r.limit) {
        r.pass = false;
        r.detail += "; runtime over budget";
    }
    return r;
}

std::string format_result(const CriterionResult& r) {
    return fmt("%s [%d] %s: %s (%.2f s / %.0f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
               r.seconds, r.limit);
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, std::ostream* log) {
    std::vector<int> which = ids;
    if (which.empty())
        for (int k = 1; k <= kCriterionCount; ++k) which.push_back(k);
    std::vector<CriterionResult> out;
    for (int id : which) {
        out.push_back(run_criterion(id));
        if (log) {
            *log << format_result(out.back()) << '\n';
            for (const auto& line : out.back().info) *log << "     " << line << '\n';
            log->flush();
        }
    }
    return out;
}

}  // namespace riskgen
