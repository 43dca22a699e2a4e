#include <doctest.h>

#include <cmath>

#include "riskgen/chernoff.hpp"
#include "riskgen/errors.hpp"
#include "riskgen/testfn.hpp"

using namespace riskgen;

namespace {

ReferenceModel gaussian(double s0) {
    ReferenceModel m;
    m.increments = GaussianIncrements{s0};
    return m;
}

const PenaltySpec kOt = PenaltySpec::ot(CostFunction::quadratic(1.0));
const PenaltySpec kMw = PenaltySpec::mart_wasserstein(4.0, CostFunction::power(2.0));

}  // namespace

TEST_CASE("one step is apply_I") {
    const Grid g(-8, 8, 0.02);
    const auto f = TestFunction::sine(1.0).on(g);
    for (const auto& spec : {kOt, kMw}) {
        const auto run = iterate(spec, gaussian(1.0), 0.1, 1, f);
        const auto ref = apply_I(spec, gaussian(1.0), 0.1, f);
        REQUIRE(run.trajectory.size() == 2);
        CHECK(run.trajectory.front().step == 0);
        CHECK(run.final().values() == ref.values());
    }
}

TEST_CASE("constants are preserved at every snapshot") {
    const Grid g(-8, 8, 0.05);
    const auto k = GridFunction::constant(g, -1.25);
    for (const auto& spec : {kOt, kMw}) {
        const auto run = iterate(spec, gaussian(1.0), 0.5, 8, k);
        std::vector<int> steps;
        for (const auto& s : run.trajectory) {
            steps.push_back(s.step);
            for (double v : s.value.values()) CHECK(v == -1.25);
        }
        CHECK(steps == std::vector<int>{0, 2, 4, 6, 8});
    }
}

TEST_CASE("snapshot sup-norms respect the conjugate band") {
    const Grid g(-10, 10, 0.02);
    const auto f = TestFunction::sine(1.0).on(g);
    const auto run = iterate(kOt, gaussian(1.0), 0.5, 8, f);
    for (const auto& s : run.trajectory) {
        const double tk = 0.5 * s.step / 8.0;
        CHECK(s.value.sup_norm() <= f.sup_norm() + tk * conjugate(kOt.phi, f.lipschitz()) + 1e-9);
    }
}

TEST_CASE("narrow grids are rejected with the needed widening") {
    const Grid g(-3, 3, 0.02);
    const auto f = TestFunction::sine(1.0).on(g);
    try {
        iterate(kOt, gaussian(1.0), 0.5, 4, f);
        FAIL("expected WindowError");
    } catch (const WindowError& e) {
        CHECK(e.required_widening() > 0.0);
        const double w = 3.0 + 0.02 * std::ceil(e.required_widening() / 0.02 + 1.0);
        const Grid wide(-w, w, 0.02);
        CHECK_NOTHROW(iterate(kOt, gaussian(1.0), 0.5, 4, TestFunction::sine(1.0).on(wide)));
    }
    CHECK_THROWS_AS(iterate(kOt, gaussian(1.0), 0.5, 0, f), DomainError);
    CHECK_THROWS_AS(iterate(PenaltySpec::ot(CostFunction::quadratic(1.0), 0.1), gaussian(1.0), 0.5, 2, f),
                    HorizonError);
}

TEST_CASE("trust region is unaffected by the boundary extension") {
    const Grid narrow(-10, 10, 0.02), wide(-20, 20, 0.02);
    const auto run = iterate(kOt, gaussian(1.0), 0.5, 8, TestFunction::sine(1.0).on(narrow));
    const auto ref = iterate(kOt, gaussian(1.0), 0.5, 8, TestFunction::sine(1.0).on(wide));
    CHECK(run.trust_hi > 2.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < narrow.n; ++i) {
        const double x = narrow.x(i);
        if (x >= run.trust_lo && x <= run.trust_hi) gap = std::max(gap, std::abs(run.final()[i] - ref.final()(x)));
    }
    CHECK(gap <= 1e-9);
}

TEST_CASE("convergence study and semigroup check") {
    const Grid g(-8, 8, 0.02);
    const auto f = TestFunction::sine(1.0).on(g);
    const std::vector<int> ns{2, 4, 8};
    const auto top = iterate(kOt, gaussian(1.0), 0.5, 8, f);
    const auto tab = convergence_study(kOt, gaussian(1.0), 0.5, ns, f, top.final());
    REQUIRE(tab.rows.size() == 3);
    CHECK(tab.rows.back().error == 0.0);
    CHECK(tab.rows[0].error > tab.rows[1].error);
    CHECK(tab.monotone);
    CHECK(tab.ratio == 0.0);

    CHECK(decreasing_verdict({1.0, 1.05, 0.2}, 0.1, 4.0));
    CHECK_FALSE(decreasing_verdict({1.0, 1.2, 0.2}, 0.1, 4.0));
    CHECK_FALSE(decreasing_verdict({1.0, 0.9, 0.3}, 0.1, 4.0));

    const auto sg = semigroup_check(kOt, gaussian(1.0), 0.5, 4, f);
    CHECK(sg.scheme_error > 0.0);
    CHECK(sg.pass);
}
