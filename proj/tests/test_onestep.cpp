#include <doctest.h>

#include <cmath>
#include <random>

#include "riskgen/errors.hpp"
#include "riskgen/onestep.hpp"
#include "riskgen/testfn.hpp"
#include "riskgen/fixtures.hpp"

using namespace riskgen;

namespace {

ReferenceModel gaussian(double s0) {
    ReferenceModel m;
    m.increments = GaussianIncrements{s0};
    return m;
}

ReferenceModel scaled_fixed(std::vector<double> pts, std::vector<double> w) {
    ReferenceModel m;
    m.increments = ScaledFixedIncrements{DiscreteMeasure(std::move(pts), std::move(w))};
    return m;
}

std::vector<PenaltySpec> all_kinds() {
    return {PenaltySpec::ot(CostFunction::quadratic(1.0)),
            PenaltySpec::wasserstein(2.0, CostFunction::power(2.0)),
            PenaltySpec::mart_wasserstein(4.0, CostFunction::power(2.0)),
            PenaltySpec::mart_ot(CostFunction::power(4.0))};
}

}  // namespace

TEST_CASE("penalty_value examples") {
    const auto mu = discretize_mu(scaled_fixed({-1, 0, 1}, {0.25, 0.5, 0.25}), 0.1);
    for (const auto& spec : all_kinds()) CHECK(penalty_value(spec, 0.1, mu, mu) == 0.0);
    const auto ot = PenaltySpec::ot(CostFunction::quadratic(1.0));
    for (double b : {-1.0, 0.3, 2.0})
        CHECK(penalty_value(ot, 0.1, DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(b)) ==
              doctest::Approx(b * b / 0.2).epsilon(1e-12));
    const auto mot = PenaltySpec::mart_ot(CostFunction::power(2.0));
    for (double th : {0.2, 0.7})
        CHECK(penalty_value(mot, 0.05, DiscreteMeasure::dirac(0), DiscreteMeasure({-th, th}, {0.5, 0.5})) ==
              doctest::Approx(th * th / 2).epsilon(1e-10));
    CHECK(std::isinf(penalty_value(mot, 0.05, DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(1.0))));
    const auto mw = PenaltySpec::mart_wasserstein(4.0, CostFunction::power(2.0));
    // W^mart_4(delta_0, dilation) = theta, penalty h (theta^2 / 2h)^2
    CHECK(penalty_value(mw, 0.05, DiscreteMeasure::dirac(0), DiscreteMeasure({-0.3, 0.3}, {0.5, 0.5})) ==
          doctest::Approx(0.05 * std::pow(0.09 / 0.1, 2)).epsilon(1e-9));
    CHECK_THROWS_AS(penalty_value(ot, 1.0, mu, mu), HorizonError);
}

TEST_CASE("spec validation") {
    CHECK(PenaltySpec::ot(CostFunction::quadratic(1.0)).violations().empty());
    CHECK_FALSE(PenaltySpec::wasserstein(2.0, CostFunction::power(1.5)).violations().empty());
    CHECK(PenaltySpec::wasserstein(2.0, CostFunction::power(3.0)).violations().empty());
    CHECK_FALSE(PenaltySpec::mart_wasserstein(5.0, CostFunction::power(2.0)).violations().empty());
    CHECK_FALSE(PenaltySpec::mart_wasserstein(2.0, CostFunction::power(2.0)).violations().empty());
    CHECK_FALSE(PenaltySpec::mart_ot(CostFunction::quadratic(1.0)).violations().empty());
    CHECK(PenaltySpec::mart_ot(CostFunction::power(4.0)).violations().empty());
    std::vector<double> sq;
    for (int i = 0; i <= 500; ++i) sq.push_back(std::pow(0.01 * i, 2));
    CHECK(PenaltySpec::wasserstein(2.0, CostFunction::tabulated(0.01, sq)).violations().empty());
    CHECK_FALSE(PenaltySpec::wasserstein(2.0, shipped_step_cost()).violations().empty());
    const Grid g(-2, 2, 0.1);
    CHECK_THROWS_AS(apply_I(PenaltySpec::mart_ot(CostFunction::quadratic(1.0)), gaussian(1.0), 0.05,
                            GridFunction::constant(g, 1.0)),
                    ValidationError);
    CHECK_THROWS_AS(apply_I(PenaltySpec::ot(CostFunction::quadratic(1.0), 0.5), gaussian(1.0), 0.5,
                            GridFunction::constant(g, 1.0)),
                    HorizonError);
}

TEST_CASE("constants are reproduced exactly") {
    const Grid g(-3, 3, 0.05);
    for (const auto& spec : all_kinds())
        for (double K : {0.0, -2.5, 7.0}) {
            const auto out = apply_I(spec, gaussian(1.0), 0.05, GridFunction::constant(g, K));
            for (double v : out.values()) CHECK(v == K);
        }
}

TEST_CASE("ot on sin lies in the conjugate band") {
    const Grid g(-6, 6, 0.01);
    const auto f = TestFunction::sine(1.0).on(g);
    const auto spec = PenaltySpec::ot(CostFunction::quadratic(1.0));
    const auto P = apply_P(gaussian(1.0), 0.05, f);
    const auto I = apply_I(spec, gaussian(1.0), 0.05, f);
    const double band = 0.05 * conjugate(spec.phi, 1.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(I[i] >= P[i] - 1e-14);
        CHECK(I[i] <= P[i] + band + 1e-12);
        if (std::abs(g.x(i)) < 0.01) gap = I[i] - P[i];
    }
    // at x = 0 the slope is 1, so the gain is close to the full band
    CHECK(gap > 0.9 * band);
}

TEST_CASE("node envelope equals the finite-candidate oracle") {
    // five atoms on grid nodes, 21-point tabulated bump, optimal displacements below two cells
    const auto model = scaled_fixed({-1, -0.5, 0, 0.5, 1}, {0.1, 0.2, 0.4, 0.2, 0.1});
    const double h = 0.1;
    const Grid g(-0.5, 0.5, 0.05);
    const auto f = TestFunction::bump(0.05, 0.15, 1.0).on(g);
    const auto spec = PenaltySpec::ot(CostFunction::quadratic(0.1));
    const auto mu = discretize_mu(model, h);
    std::vector<DiscreteMeasure> cands{mu};
    std::vector<int> d(mu.size(), -2);
    while (true) {
        std::vector<double> pts, w;
        for (std::size_t j = 0; j < mu.size(); ++j) {
            pts.push_back(mu.point(j) + d[j] * g.dx);
            w.push_back(mu.weight(j));
        }
        cands.push_back(DiscreteMeasure::from_atoms(pts, w, 1e-9));
        std::size_t k = 0;
        while (k < d.size() && ++d[k] > 2) d[k++] = -2;
        if (k == d.size()) break;
    }
    OneStepOptions nodes;
    nodes.inner = InnerSup::nodes;
    const auto I = apply_I(spec, model, h, f, nodes);
    const auto B = brute_force_I(spec, model, h, f, cands);
    const auto Iint = apply_I(spec, model, h, f);
    for (std::size_t i = 4; i + 4 < g.n; ++i) {
        CHECK(std::abs(I[i] - B[i]) <= 1e-8);
        CHECK(Iint[i] >= B[i] - 1e-12);
    }
}

TEST_CASE("brute force with mu_h alone is P_h") {
    const auto model = scaled_fixed({-1, 1}, {0.5, 0.5});
    const Grid g(-2, 2, 0.05);
    const auto f = TestFunction::sine(1.3).on(g);
    const auto mu = discretize_mu(model, 0.1);
    const auto B = brute_force_I(PenaltySpec::ot(CostFunction::quadratic(1.0)), model, 0.1, f, {mu});
    const auto P = apply_P(model, 0.1, f);
    for (std::size_t i = 0; i < g.n; ++i) CHECK(B[i] == P[i]);
    CHECK_THROWS_AS(brute_force_I(PenaltySpec::ot(CostFunction::quadratic(1.0)), model, 0.1, f,
                                  {DiscreteMeasure::dirac(0)}),
                    ValidationError);
}

TEST_CASE("shift candidates attain the envelope for affine f and bound it for concave f") {
    const auto model = scaled_fixed({-1, 0, 1}, {0.25, 0.5, 0.25});
    const double h = 0.1;
    const Grid g(-3, 3, 0.05);
    const auto spec = PenaltySpec::ot(CostFunction::quadratic(1.0));
    const auto mu = discretize_mu(model, h);
    std::vector<DiscreteMeasure> shifts{mu};
    for (int k = -10; k <= 10; ++k)
        if (k != 0) shifts.push_back(mu.shifted(k * g.dx));
    const auto lin = GridFunction::sample(g, [](double x) { return x; });
    const auto I = apply_I(spec, model, h, lin), B = brute_force_I(spec, model, h, lin, shifts);
    for (std::size_t i = 20; i + 20 < g.n; ++i) {
        CHECK(std::abs(I[i] - B[i]) < 1e-12);
        CHECK(I[i] == doctest::Approx(g.x(i) + h * 0.5).epsilon(1e-12));
    }
    const auto cav = GridFunction::sample(g, [](double x) { return -0.5 * x * x; });
    const auto Ic = apply_I(spec, model, h, cav), Bc = brute_force_I(spec, model, h, cav, shifts);
    for (std::size_t i = 20; i + 20 < g.n; ++i) {
        CHECK(Bc[i] <= Ic[i] + 1e-12);
        CHECK(Ic[i] - Bc[i] <= 5e-3);
    }
}

TEST_CASE("envelope agrees with the marginal-constrained LP") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1, 1), wt(0.05, 1);
    std::uniform_int_distribution<int> na(2, 20);
    const Grid g(-1, 1, 0.05);
    std::vector<PenaltySpec> specs{PenaltySpec::ot(CostFunction::quadratic(1.0)),
                                   PenaltySpec::ot(shipped_step_cost()),
                                   PenaltySpec::ot(CostFunction::power(3.0, 0.5))};
    OneStepOptions nodes;
    nodes.inner = InnerSup::nodes;
    for (int trial = 0; trial < 12; ++trial) {
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
        const std::size_t node = 10 + trial;
        const double env = apply_I_nodes(spec, model, 0.2, f, node, node, nodes).front();
        CHECK(std::abs(env - ot_marginal_lp_I(spec, model, 0.2, f, node)) <= 1e-8);
    }
}

TEST_CASE("wasserstein with a pure power cost coincides with ot") {
    const Grid g(-4, 4, 0.05);
    const auto f = TestFunction::sine(1.5, 0.8).on(g);
    for (double c : {0.5, 2.0}) {
        const auto w = apply_I(PenaltySpec::wasserstein(2.0, CostFunction::power(2.0, c)), gaussian(1.0), 0.05, f);
        const auto o = apply_I(PenaltySpec::ot(CostFunction::power(2.0, c)), gaussian(1.0), 0.05, f);
        for (std::size_t i = 0; i < g.n; ++i) CHECK(std::abs(w[i] - o[i]) < 1e-8);
    }
}

TEST_CASE("martingale kinds: dilation candidates reproduce the scan") {
    const auto model = scaled_fixed({-1, 1}, {0.5, 0.5});
    const double h = 0.05;
    const Grid g(-2, 2, 0.05);
    const auto f = TestFunction::bump(0.0, 0.4, 1.0).on(g);
    const auto mu = discretize_mu(model, h);
    for (const auto& spec : {PenaltySpec::mart_wasserstein(4.0, CostFunction::power(2.0)),
                             PenaltySpec::mart_ot(CostFunction::power(4.0))}) {
        OneStepDiagnostics diag;
        const auto I = apply_I(spec, model, h, f, {}, &diag);
        const double delta = g.dx / diag.lattice_refinement;
        std::vector<DiscreteMeasure> cands{mu};
        for (int t = 1; t * delta <= diag.window + 1e-12; ++t) cands.push_back(dilation_measure(mu, t * delta));
        const auto B = brute_force_I(spec, model, h, f, cands);
        for (std::size_t i = 0; i < g.n; ++i) CHECK(std::abs(I[i] - B[i]) < 1e-10);
        // kernel LP over martingale kernels dominates the dilation family
        for (std::size_t i : {10ul, 30ul, 40ul, 55ul}) {
            const double lp = kernel_lp_I(spec, model, h, f, i);
            CHECK(lp >= I[i] - 1e-9);
        }
    }
}

TEST_CASE("martingale kinds are rigid on affine functions") {
    const Grid g(-4, 4, 0.05);
    const auto f = GridFunction::sample(g, [](double x) { return 0.3 * x - 1.0; });
    for (const auto& spec : {PenaltySpec::mart_wasserstein(4.0, CostFunction::power(2.0)),
                             PenaltySpec::mart_ot(CostFunction::power(4.0))}) {
        const auto I = apply_I(spec, gaussian(1.0), 0.05, f);
        const auto P = apply_P(gaussian(1.0), 0.05, f);
        for (std::size_t i = 30; i + 30 < g.n; ++i) CHECK(std::abs(I[i] - P[i]) <= 1e-8);
    }
}

TEST_CASE("structural properties on random smooth functions") {
    std::mt19937_64 rng(41);
    const Grid g(-4, 4, 0.05);
    const double h = 0.05, tol = 1e-6;
    const auto model = gaussian(1.0);
    for (const auto& spec : all_kinds()) {
        for (int trial = 0; trial < 3; ++trial) {
            const auto a = random_trig(rng), b = random_trig(rng);
            const auto fa = GridFunction::sample(g, a);
            const auto fb = GridFunction::sample(g, [&](double x) { return std::max(a(x), b(x)); });
            const auto fm = GridFunction::sample(g, [&](double x) { return 0.5 * a(x) + 0.5 * b(x); });
            const auto gb = GridFunction::sample(g, b);
            OneStepDiagnostics diag;
            const auto Ia = apply_I(spec, model, h, fa, {}, &diag), Ib = apply_I(spec, model, h, fb);
            const auto Ig = apply_I(spec, model, h, gb), Im = apply_I(spec, model, h, fm);
            const auto Ik = apply_I(spec, model, h, GridFunction::sample(g, [&](double x) { return a(x) + 1.75; }));
            const auto Pa = apply_P(model, h, fa);
            const double band = spec.martingale()
                                    ? h * spec.band_conjugate(a.curv()) + a.curv() * g.dx * g.dx / 4
                                    : h * spec.band_conjugate(a.lip());
            double reach = diag.window;
            for (double y : reference_law(model, h, g).points()) reach = std::max(reach, std::abs(y) + diag.window);
            for (std::size_t i = 0; i < g.n; ++i) {
                CHECK(Ia[i] <= Ib[i] + tol);
                CHECK(Im[i] <= 0.5 * Ia[i] + 0.5 * Ig[i] + tol);
                CHECK(std::abs(Ik[i] - Ia[i] - 1.75) <= 1e-12);
                CHECK(Ia[i] >= Pa[i] - 1e-12);
                // constant extension puts a kink at the grid ends
                if (std::abs(g.x(i)) + reach <= g.xmax()) CHECK(Ia[i] - Pa[i] <= band + tol);
            }
        }
    }
}
