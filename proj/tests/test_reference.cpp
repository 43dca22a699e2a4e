#include <doctest.h>

#include <cmath>
#include <random>

#include "riskgen/errors.hpp"
#include "riskgen/reference.hpp"
#include "riskgen/testfn.hpp"

using namespace riskgen;

namespace {

ReferenceModel gaussian(double s0) {
    ReferenceModel m;
    m.increments = GaussianIncrements{s0};
    return m;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

TEST_CASE("gaussian quantization moments") {
    const auto mu = discretize_mu(gaussian(1.0), 0.01);
    double s = 0.0;
    for (double w : mu.weights()) s += w;
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(std::abs(mu.mean()) <= 1e-10);
    // truncated-normal variance plus the midpoint-quantization term step^2/12
    const double sigma = 0.1, c = 6.0, step = sigma / 50;
    const double trunc = sigma * sigma * (1.0 - 2.0 * c * normal_pdf(c) / std::erf(c / std::sqrt(2.0)));
    CHECK(std::abs(mu.variance() - (trunc + step * step / 12.0)) < 1e-7);
    CHECK(std::abs(mu.variance() - 0.01) < 1e-5);
}

TEST_CASE("lattice-aligned gaussian atoms") {
    const auto mu = discretize_mu(gaussian(1.0), 0.05, 0.01);
    const double step = mu.point(1) - mu.point(0);
    const double k = std::round(0.01 / step);
    CHECK(std::abs(0.01 / step - k) < 1e-9);
    for (double y : mu.points()) CHECK(std::abs(y / 0.01 * k - std::round(y / 0.01 * k)) < 1e-9);
    CHECK(std::abs(mu.variance() - 0.05) < 1e-5);
    ReferenceModel m = gaussian(1.0);
    m.truncation.relative_step = 10.0;
    CHECK_THROWS_AS(discretize_mu(m, 0.01), ValidationError);
}

TEST_CASE("scaled fixed and compound Poisson laws") {
    ReferenceModel sf;
    sf.increments = ScaledFixedIncrements{DiscreteMeasure({-1, 1}, {0.5, 0.5})};
    const auto a = discretize_mu(sf, 0.1);
    CHECK(a.points() == std::vector<double>{-0.1, 0.1});
    ReferenceModel cp;
    cp.increments = CompoundPoissonIncrements{1.0, DiscreteMeasure::dirac(1.0)};
    const auto b = discretize_mu(cp, 0.1);
    REQUIRE(b.size() == 5);
    CHECK(b.point(0) == 0.0);
    CHECK(b.weight(0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-15));
    CHECK(b.weight(1) == doctest::Approx(0.1 * std::exp(-0.1)).epsilon(1e-14));
    CHECK(b.weight(2) == doctest::Approx(0.005 * std::exp(-0.1)).epsilon(1e-13));
    // five or more jumps folded into the four-jump atom
    const double rem = 1.0 - std::exp(-0.1) * (1 + 0.1 + 0.005 + 0.1 * 0.1 * 0.1 / 6);
    CHECK(b.weight(4) == doctest::Approx(rem).epsilon(1e-6));
    CHECK(rem < std::pow(0.1, 4) / 24 + std::pow(0.1, 5) / 120);
}

TEST_CASE("apply_P on constants and the heat kernel") {
    const Grid g(-20, 20, 0.01);
    const auto k = apply_P(gaussian(1.0), 0.25, GridFunction::constant(g, 7.0));
    for (double v : k.values()) CHECK(v == 7.0);
    const auto f = TestFunction::sine(1.0).on(g);
    const auto p = apply_P(gaussian(1.0), 0.25, f);
    double err = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        if (std::abs(g.x(i)) <= 2.0) err = std::max(err, std::abs(p[i] - std::exp(-0.125) * std::sin(g.x(i))));
    CHECK(err <= 2e-4);
}

TEST_CASE("symmetric increments leave the identity unchanged") {
    ReferenceModel sf;
    sf.increments = ScaledFixedIncrements{DiscreteMeasure({-1, 1}, {0.5, 0.5})};
    const Grid g(-5, 5, 0.05);
    const auto f = GridFunction::sample(g, [](double x) { return x; });
    const auto p = apply_P(sf, 0.1, f);
    for (std::size_t i = 2; i + 2 < g.n; ++i) CHECK(std::abs(p[i] - f[i]) < 1e-13);
}

TEST_CASE("P_h is monotone and a contraction") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1), pos(0, 0.5);
    const Grid g(-6, 6, 0.05);
    ReferenceModel m = gaussian(0.7);
    m.drift = Drift::linear(-0.5);
    m.psi = PsiScheme::euler;
    for (int t = 0; t < 5; ++t) {
        std::vector<double> a(g.n), b(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            a[i] = u(rng);
            b[i] = a[i] + pos(rng);
        }
        const GridFunction fa(g, a), fb(g, b);
        const auto pa = apply_P(m, 0.05, fa), pb = apply_P(m, 0.05, fb);
        double dp = 0.0, df = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            CHECK(pa[i] <= pb[i] + 1e-15);
            dp = std::max(dp, std::abs(pa[i] - pb[i]));
            df = std::max(df, std::abs(a[i] - b[i]));
        }
        CHECK(dp <= df + 1e-14);
        CHECK(pa.bound() == fa.bound());
    }
}

TEST_CASE("model validation") {
    ReferenceModel m = gaussian(1.0);
    m.drift = Drift::linear(1.0);
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.psi = PsiScheme::euler;
    CHECK_NOTHROW(m.validate());
    CHECK(m.psi_h(0.1, 2.0) == doctest::Approx(2.2));
}

TEST_CASE("condition report: gaussian") {
    const auto rep = validate_conditions(gaussian(1.0), {0.1, 0.05, 0.02, 0.01, 0.005});
    for (const auto& r : rep.rows) {
        CHECK(r.m_quotient == doctest::Approx(1.0).epsilon(0.01));
        CHECK(r.tail_quotients[0] <= 0.02);
    }
    CHECK(rep.rows.back().tail_quotients[0] < 1e-12);
    CHECK(rep.a.pass);
    CHECK(rep.m.pass);
    CHECK(rep.t.pass);
    CHECK(rep.d.pass);
    CHECK(rep.label == "numerical evidence");
}

TEST_CASE("condition report: scaled fixed and compound Poisson") {
    ReferenceModel sf;
    sf.increments = ScaledFixedIncrements{DiscreteMeasure({-1, 1}, {0.5, 0.5})};
    const auto a = validate_conditions(sf, {0.1, 0.05, 0.025});
    for (const auto& r : a.rows) CHECK(r.m_quotient == doctest::Approx(r.h).epsilon(1e-12));
    ReferenceModel cp;
    cp.increments = CompoundPoissonIncrements{1.0, DiscreteMeasure::dirac(1.0)};
    ConditionOptions opt;
    opt.tail_levels = {0.5, 1.0, 2.0};
    const auto b = validate_conditions(cp, {0.1, 0.01, 0.001}, opt);
    for (const auto& r : b.rows) CHECK(r.tail_quotients[0] == doctest::Approx(1.0).epsilon(0.06));
    CHECK(b.rows.back().tail_quotients[1] < 1e-3);
    CHECK(b.t.pass);
    ReferenceModel eu = gaussian(1.0);
    eu.drift = Drift::linear(2.0);
    eu.psi = PsiScheme::euler;
    CHECK(validate_conditions(eu, {0.1, 0.05}).d.pass);
    CHECK_THROWS_AS(validate_conditions(eu, {0.05, 0.1}), ValidationError);
}
