#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskgen/conjugate.hpp"
#include "riskgen/errors.hpp"
#include "riskgen/fixtures.hpp"

using namespace riskgen;

namespace {

// sup over a dense v-grid, independent of the library's knot logic
double brute_conjugate(const CostFunction& c, double w, double vmax = 60.0, double dv = 1e-3) {
    double best = -1e300;
    for (double v = 0.0; v <= vmax; v += dv) best = std::max(best, w * v - c(v));
    return best;
}

}  // namespace

TEST_CASE("quadratic conjugate closed form") {
    const auto c = CostFunction::quadratic(1.0);
    CHECK(conjugate(c, 3.0) == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(conjugate(c, -2.0) == 0.0);
    CHECK(conjugate(c, 0.0) == 0.0);
    const auto c2 = CostFunction::quadratic(2.5);
    CHECK(std::abs(conjugate(c2, 1.3) - 2.5 * 1.3 * 1.3 / 2.0) < 1e-12);
}

TEST_CASE("tabulated square against grid brute force") {
    std::vector<double> vals;
    for (int i = 0; i <= 10000; ++i) vals.push_back(std::pow(i * 1e-3, 2));
    const auto c = CostFunction::tabulated(1e-3, vals);
    const double got = conjugate(c, 2.0);
    double brute = -1e300;
    for (int i = 0; i <= 10000; ++i) brute = std::max(brute, 2.0 * i * 1e-3 - vals[i]);
    CHECK(std::abs(got - brute) < 1e-12);
    CHECK(std::abs(got - 1.0) < 1e-5);
    CHECK(conjugate_argmax(c, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("power conjugate matches dense scan") {
    const auto c = CostFunction::power(3.0, 0.5);
    for (double w : {0.1, 0.7, 1.5, 4.0}) CHECK(std::abs(conjugate(c, w) - brute_conjugate(c, w, 10.0, 1e-5)) < 1e-6);
}

TEST_CASE("linear tail is not superlinear") {
    const auto c = CostFunction::piecewise_linear({{0, 0}, {1, 1}}, CostTail{false, 0.0});
    CHECK(conjugate(c, 0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(conjugate(c, 2.0), DomainError);
    CHECK_FALSE(c.invariant_violations().empty());
}

TEST_CASE("infinite tail acts as a ball constraint") {
    const auto c = CostFunction::piecewise_linear({{0, 0}, {2, 0}}, CostTail{true, 0.0});
    CHECK(std::isinf(c(2.5)));
    CHECK(conjugate(c, 3.0) == doctest::Approx(6.0));
    CHECK(conjugate(c, -1.0) == 0.0);
    CHECK(growth_radius(c, 0.0, 1.0, 10.0) == doctest::Approx(2.0));
}

TEST_CASE("Fenchel-Young, monotonicity, convexity on shipped costs") {
    for (const auto& [name, c] : shipped_costs()) {
        CAPTURE(name);
        std::vector<double> cs;
        for (int k = 0; k <= 100; ++k) cs.push_back(conjugate(c, 0.1 * k));
        for (int i = 0; i <= 100; ++i)
            for (int k = 0; k <= 100; ++k) CHECK(c(0.1 * i) + cs[k] >= 0.1 * i * 0.1 * k - 1e-9);
        for (int k = 0; k < 100; ++k) CHECK(cs[k] <= cs[k + 1] + 1e-12);
        for (int k = 1; k < 100; ++k) CHECK(cs[k] <= 0.5 * (cs[k - 1] + cs[k + 1]) + 1e-9);
        for (int k = 0; k <= 100; ++k) CHECK(cs[k] >= -c(0.0) - 1e-12);
    }
}

TEST_CASE("sandwich for biconjugates") {
    for (const auto& [name, c] : shipped_costs()) {
        CAPTURE(name);
        const auto cc = biconjugate(c);
        CHECK(cc.convex());
        for (int i = 0; i <= 100; ++i) {
            const double v = 0.1 * i;
            CHECK(cc(v) <= c(v) + 1e-9);
            CHECK(cc(v) >= c(0.0) - 1e-9);
        }
    }
}

TEST_CASE("biconjugate of a convex cost is unchanged") {
    const auto c = CostFunction::quadratic(1.0);
    const auto cc = biconjugate(c);
    double d = 0.0;
    for (int i = 0; i <= 1000; ++i) d = std::max(d, std::abs(cc(0.01 * i) - c(0.01 * i)));
    CHECK(d == 0.0);
    const auto k = CostFunction::piecewise_linear({{0, 0}, {1, 0}, {2, 3}});
    CHECK(k.convex());
    CHECK(biconjugate(k)(1.0) == 0.0);
}

TEST_CASE("biconjugate of a step cost against double brute-force conjugation") {
    const auto c = shipped_step_cost();
    CHECK_FALSE(c.convex());
    const auto cc = biconjugate(c);
    // c**(v) = sup_w (w v - c*(w)) on a w-grid; c* from a dense v-scan
    std::vector<double> ws, cstar;
    for (double w = -1.0; w <= 25.0; w += 0.01) {
        ws.push_back(w);
        cstar.push_back(brute_conjugate(c, w, 20.0, 1e-3));
    }
    for (double v = 0.0; v <= 8.0; v += 0.05) {
        double b = -1e300;
        for (std::size_t k = 0; k < ws.size(); ++k) b = std::max(b, ws[k] * v - cstar[k]);
        CHECK(std::abs(cc(v) - b) < 5e-3);
        CHECK(cc(v) <= c(v) + 1e-12);
    }
}

TEST_CASE("biconjugate tangent to the quadratic tail") {
    // dip at v = 3 forces the envelope to bridge into the tail
    const auto c = CostFunction::piecewise_linear({{0, 0}, {1, 5}, {3, 5.5}}, CostTail{false, 1.0});
    const auto cc = biconjugate(c);
    for (double w = 0.0; w <= 12.0; w += 0.25) CHECK(std::abs(conjugate(cc, w) - conjugate(c, w)) < 1e-9);
    for (double v = 0.0; v <= 10.0; v += 0.1) CHECK(cc(v) <= c(v) + 1e-12);
}

TEST_CASE("order reversal") {
    const auto c1 = CostFunction::quadratic(1.0);   // v^2/2
    const auto c2 = CostFunction::power(2.0, 1.0);  // v^2 >= c1
    for (double w = -1.0; w <= 10.0; w += 0.1) CHECK(conjugate(c1, w) >= conjugate(c2, w) - 1e-12);
}

TEST_CASE("power conjugate and growth radius") {
    const auto phi = CostFunction::power(4.0, 1.0);
    // sup_x (a x^2 - x^4) = a^2/4
    for (double a : {0.5, 1.0, 2.0}) CHECK(power_conjugate(phi, a, 2.0) == doctest::Approx(a * a / 4).epsilon(1e-12));
    CHECK(power_conjugate(phi, -1.0, 2.0) == 0.0);
    const auto q = CostFunction::quadratic(1.0);
    CHECK_THROWS_AS(power_conjugate(CostFunction::power(2.0, 1.0), 2.0, 2.0), DomainError);
    CHECK(power_conjugate(CostFunction::power(2.0, 1.0), 1.0, 2.0) == 0.0);
    CHECK(growth_radius(q, 1.5, 1.0, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(growth_radius(q, 0.0, 1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::isinf(growth_radius(CostFunction::power(2.0, 1.0), 1.0, 2.0, 1.0)));
    const double r = growth_radius(phi, 1.0, 2.0, 0.0);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
    const auto t = shipped_step_cost();
    const double rt = growth_radius(t, 2.0, 1.0, 0.5);
    CHECK(t(rt) <= 2.0 * rt + 0.5 + 1e-9);
    for (double v = rt + 1e-3; v < rt + 5; v += 1e-3) CHECK(t(v) > 2.0 * v + 0.5);
}

TEST_CASE("invariant violations are named") {
    const auto dec = CostFunction::piecewise_linear({{0, 0}, {1, 2}, {2, 1}});
    REQUIRE_FALSE(dec.invariant_violations().empty());
    CHECK(dec.invariant_violations().front().find("nondecreasing") != std::string::npos);
    const auto pos = CostFunction::piecewise_linear({{0, 1}, {1, 2}});
    CHECK_THROWS_AS(pos.validate(), ValidationError);
    CHECK_THROWS_AS(CostFunction::piecewise_linear({{0.5, 0}, {1, 1}}), ValidationError);
}

TEST_CASE("negative c(0) is supported") {
    const auto c = CostFunction::piecewise_linear({{0, -1}, {1, -1}, {2, 1}});
    CHECK(conjugate(c, -3.0) == doctest::Approx(1.0));
    CHECK(conjugate(c, 0.0) == doctest::Approx(1.0));
    CHECK(c.invariant_violations().empty());
}
