#include <doctest.h>

#include <cmath>
#include <random>

#include "lp_oracle.hpp"
#include "riskgen/fixtures.hpp"
#include "riskgen/errors.hpp"
#include "riskgen/lp.hpp"
#include "riskgen/measures.hpp"

using namespace riskgen;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& rng, int max_atoms) {
    std::uniform_int_distribution<int> na(1, max_atoms);
    std::uniform_real_distribution<double> u(-3.0, 3.0), wgt(0.05, 1.0);
    const int n = na(rng);
    std::vector<double> p(n), w(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        p[i] = u(rng);
        w[i] = wgt(rng);
        s += w[i];
    }
    for (double& x : w) x /= s;
    return DiscreteMeasure::from_atoms(p, w);
}

auto sq = [](double y, double z) { return (z - y) * (z - y); };
auto ab = [](double y, double z) { return std::abs(z - y); };

}  // namespace

TEST_CASE("measure construction") {
    CHECK_THROWS_AS(DiscreteMeasure({0.0, 0.0}, {0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(DiscreteMeasure({0.0, 1.0}, {0.5, 0.4}), ValidationError);
    const auto m = DiscreteMeasure::from_atoms({1.0, 0.0, 1.0 + 1e-14}, {0.25, 0.5, 0.25});
    CHECK(m.size() == 2);
    CHECK(m.weight(1) == doctest::Approx(0.5));
}

TEST_CASE("simplex agrees with vertex enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int m = 3, n = 7;
        LpProblem lp(m, n);
        std::vector<std::vector<double>> A(m, std::vector<double>(n));
        std::vector<double> x0(n);
        for (double& x : x0) x = std::max(0.0, u(rng));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) A[i][j] = lp.at(i, j) = u(rng);
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += A[i][j] * x0[j];
            lp.b[i] = s;
        }
        for (int j = 0; j < n; ++j) lp.c[j] = u(rng) + 1.5;  // positive costs keep it bounded
        const auto oracle = lp_oracle::minimize(A, lp.b, lp.c);
        const auto r = solve_lp(lp);
        REQUIRE(oracle.has_value());
        REQUIRE(r.status == LpStatus::optimal);
        CHECK(std::abs(r.value - *oracle) < 1e-9);
        CHECK(std::abs(r.value - r.dual_value) < 1e-9);
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("infeasible and unbounded programs") {
    LpProblem inf(2, 2);
    inf.at(0, 0) = 1;
    inf.at(0, 1) = 1;
    inf.b[0] = 1;
    inf.at(1, 0) = 1;
    inf.at(1, 1) = 1;
    inf.b[1] = 2;
    CHECK(solve_lp(inf).status == LpStatus::infeasible);
    LpProblem unb(1, 2);
    unb.at(0, 0) = 1;
    unb.at(0, 1) = -1;
    unb.b[0] = 1;
    unb.c = {0.0, -1.0};
    CHECK(solve_lp(unb).status == LpStatus::unbounded);
}

TEST_CASE("min_cost_coupling examples") {
    CHECK(min_cost_coupling(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(2), ab).value == doctest::Approx(2.0));
    const auto mu = DiscreteMeasure({0.0, 1.0}, {0.5, 0.5});
    const auto nu = DiscreteMeasure({1.0, 2.0}, {0.5, 0.5});
    // every 2x2 coupling is [[t, 1/2-t], [1/2-t, t]]
    double brute = 1e300;
    for (int k = 0; k <= 1000; ++k) {
        const double t = 0.5 * k / 1000;
        brute = std::min(brute, t * 1 + (0.5 - t) * 4 + (0.5 - t) * 0 + t * 1);
    }
    const auto sol = min_cost_coupling(mu, nu, sq);
    CHECK(std::abs(sol.value - brute) < 1e-12);
    CHECK(sol.value == doctest::Approx(1.0));
    CHECK(min_cost_coupling(mu, mu, sq).value == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("transport LP duality and marginals on random instances") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto mu = random_measure(rng, 20), nu = random_measure(rng, 20);
        const auto sol = min_cost_coupling(mu, nu, sq);
        CHECK(sol.duality_gap <= 1e-9);
        double dual = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) dual += mu.weight(i) * sol.u[i];
        for (std::size_t j = 0; j < nu.size(); ++j) dual += nu.weight(j) * sol.v[j];
        CHECK(std::abs(dual - sol.value) <= 1e-9);
        CHECK(sol.coupling.marginal_error() <= 1e-10);
        // monotone coupling is optimal for a convex cost of z - y
        CHECK(std::abs(monotone_coupling(mu, nu, sq).value - sol.value) <= 1e-9);
    }
}

TEST_CASE("wasserstein examples and triangle inequality") {
    CHECK(wasserstein_p(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(-1.5), 3.0) == doctest::Approx(1.5));
    CHECK(wasserstein_p(DiscreteMeasure({-1, 1}, {0.5, 0.5}), DiscreteMeasure::dirac(0), 2.0) == doctest::Approx(1.0));
    std::mt19937_64 rng(5);
    const auto m = random_measure(rng, 8);
    CHECK(wasserstein_p(m, m, 2.0) == 0.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_measure(rng, 8), b = random_measure(rng, 8), c = random_measure(rng, 8);
        for (double p : {1.0, 2.0, 3.5})
            CHECK(wasserstein_p(a, c, p) <= wasserstein_p(a, b, p) + wasserstein_p(b, c, p) + 1e-8);
        const double lp = std::sqrt(min_cost_coupling(a, b, sq).value);
        CHECK(std::abs(lp - wasserstein_p(a, b, 2.0)) < 1e-8);
    }
}

TEST_CASE("convex order examples") {
    CHECK(check_convex_order(DiscreteMeasure::dirac(0), DiscreteMeasure({-1, 1}, {0.5, 0.5})));
    CHECK_FALSE(check_convex_order(DiscreteMeasure({-1, 1}, {0.5, 0.5}), DiscreteMeasure::dirac(0)));
    CHECK(check_convex_order(DiscreteMeasure({0, 1}, {0.5, 0.5}), DiscreteMeasure({-0.5, 1.5}, {0.5, 0.5})));
    CHECK_FALSE(check_convex_order(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(1)));
}

TEST_CASE("martingale coupling examples") {
    for (double theta : {0.3, 1.0, 2.5}) {
        const auto r = min_cost_martingale_coupling(DiscreteMeasure::dirac(0),
                                                    DiscreteMeasure({-theta, theta}, {0.5, 0.5}), sq);
        REQUIRE(r.has_value());
        CHECK(r->value == doctest::Approx(theta * theta));
    }
    CHECK_FALSE(min_cost_martingale_coupling(DiscreteMeasure({-1, 1}, {0.5, 0.5}), DiscreteMeasure::dirac(0), sq));
}

TEST_CASE("martingale LP on the three-point example against vertex enumeration") {
    const auto mu = DiscreteMeasure({-1, 0, 1}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto nu = DiscreteMeasure({-2, 0, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    // coupling variables pi(i,j): row sums, column sums, barycenters
    std::vector<std::vector<double>> A;
    std::vector<double> b, c;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> row(9, 0.0);
        for (int j = 0; j < 3; ++j) row[3 * i + j] = 1.0;
        A.push_back(row);
        b.push_back(1.0 / 3);
    }
    for (int j = 0; j < 3; ++j) {
        std::vector<double> row(9, 0.0);
        for (int i = 0; i < 3; ++i) row[3 * i + j] = 1.0;
        A.push_back(row);
        b.push_back(1.0 / 3);
    }
    for (int i = 0; i < 3; ++i) {
        std::vector<double> row(9, 0.0);
        for (int j = 0; j < 3; ++j) row[3 * i + j] = nu.point(j) - mu.point(i);
        A.push_back(row);
        b.push_back(0.0);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c.push_back(sq(mu.point(i), nu.point(j)));
    const auto oracle = lp_oracle::minimize(A, b, c);
    REQUIRE(oracle.has_value());
    const auto r = min_cost_martingale_coupling(mu, nu, sq);
    REQUIRE(r.has_value());
    CHECK(std::abs(r->value - *oracle) < 1e-9);
    // variance identity: E|Z-Y|^2 = Var(nu) - Var(mu) for every martingale coupling
    CHECK(r->value == doctest::Approx(nu.variance() - mu.variance()));
    CHECK(r->coupling.barycenter_residual() <= 1e-9);
}

TEST_CASE("martingale couplings preserve the mean and match the hinge test") {
    const auto corpus = strassen_corpus(120, 3);
    int feasible = 0;
    for (const auto& [mu, nu] : corpus) {
        const auto r = min_cost_martingale_coupling(mu, nu, ab);
        CHECK(r.has_value() == check_convex_order(mu, nu));
        if (r) {
            ++feasible;
            CHECK(r->coupling.marginal_error() <= 1e-10);
            CHECK(r->coupling.barycenter_residual() <= 1e-9);
            double tm = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = 0; j < nu.size(); ++j) tm += r->coupling(i, j) * nu.point(j);
            CHECK(std::abs(tm - mu.mean()) <= 1e-8);
            CHECK(r->duality_gap <= 1e-9);
        }
    }
    CHECK(feasible > 10);
    CHECK(feasible < 110);
}

TEST_CASE("dilation measure") {
    const auto d = dilation_measure(DiscreteMeasure::dirac(0), 1.0);
    CHECK(d.size() == 2);
    CHECK(d.point(0) == -1.0);
    CHECK(d.weight(1) == 0.5);
    const auto mu = DiscreteMeasure({0, 2}, {0.5, 0.5});
    CHECK(dilation_measure(mu, 0.0).points() == mu.points());
    const auto e = dilation_measure(mu, 1.0);
    REQUIRE(e.size() == 3);
    CHECK(e.points() == std::vector<double>{-1, 1, 3});
    CHECK(e.weights() == std::vector<double>{0.25, 0.5, 0.25});
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> th(0.0, 2.0);
    for (int k = 0; k < 40; ++k) {
        const auto m = random_measure(rng, 6);
        CHECK(check_convex_order(m, dilation_measure(m, th(rng))));
    }
}
