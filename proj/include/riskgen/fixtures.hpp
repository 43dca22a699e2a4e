#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "riskgen/conjugate.hpp"
#include "riskgen/measures.hpp"

// Shared inputs for tests, the acceptance suite and the CLI.

namespace riskgen {

// step cost: 0 on [0,1), 1 on [1,2), v^2 afterwards, tabulated with step 0.01
inline CostFunction shipped_step_cost() {
    std::vector<double> vals;
    for (int i = 0; i <= 1000; ++i) {
        const double v = 0.01 * i;
        vals.push_back(v < 1.0 ? 0.0 : (v < 2.0 ? 1.0 : v * v));
    }
    return CostFunction::tabulated(0.01, vals, CostTail{false, 1.0});
}

// every cost function that appears in the shipped configurations and tests
inline std::vector<std::pair<std::string, CostFunction>> shipped_costs() {
    std::vector<std::pair<std::string, CostFunction>> out;
    out.emplace_back("quadratic gamma=1", CostFunction::quadratic(1.0));
    out.emplace_back("quadratic gamma=0.5", CostFunction::quadratic(0.5));
    out.emplace_back("power p=2 scale=1", CostFunction::power(2.0, 1.0));
    out.emplace_back("power p=4 scale=1", CostFunction::power(4.0, 1.0));
    out.emplace_back("power p=3 scale=0.5", CostFunction::power(3.0, 0.5));
    out.emplace_back("piecewise-linear convex", CostFunction::piecewise_linear({{0, 0}, {1, 0}, {2, 3}}));
    std::vector<double> sq;
    for (int i = 0; i <= 1000; ++i) sq.push_back(std::pow(0.01 * i, 2));
    out.emplace_back("tabulated v^2", CostFunction::tabulated(0.01, sq));
    out.emplace_back("tabulated step", shipped_step_cost());
    out.emplace_back("ball radius 2", CostFunction::piecewise_linear({{0, 0}, {2, 0}}, CostTail{true, 0.0}));
    return out;
}

// Equal-mean pairs with at most five atoms. Points are multiples of 1/8 and
// weights multiples of 1/64, so every mean is computed exactly.
inline std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> strassen_corpus(int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> out;
    while (static_cast<int>(out.size()) < count) {
        const int k = uni(1, 3);
        std::vector<double> p, w;
        int left = 16;
        for (int i = 0; i < k; ++i) {
            const int units = (i == k - 1) ? left : uni(1, left - (k - 1 - i));
            left -= units;
            p.push_back(uni(-16, 16) / 8.0);
            w.push_back(units / 16.0);
        }
        std::vector<double> q = p, v = w;
        const int moves = uni(1, 3);
        for (int mv = 0; mv < moves; ++mv) {
            const int kind = uni(0, 2);
            const int a = uni(0, static_cast<int>(q.size()) - 1);
            if (kind == 0) {
                // mean-preserving spread of atom a
                const double d = uni(1, 8) / 8.0;
                const double half = v[a] / 2.0;
                q.push_back(q[a] + d);
                v.push_back(half);
                q[a] -= d;
                v[a] = half;
            } else {
                const int b = uni(0, static_cast<int>(q.size()) - 1);
                if (a == b) continue;
                const double t = std::min(v[a], v[b]) * uni(1, 4) / 4.0;
                const double d = uni(1, 8) / 8.0 * (kind == 1 ? 1.0 : -1.0);
                // move mass t from a by +d and from b by -d (contraction or spread depending on order)
                q.push_back(q[a] + d);
                v.push_back(t);
                v[a] -= t;
                q.push_back(q[b] - d);
                v.push_back(t);
                v[b] -= t;
            }
        }
        try {
            auto mu = DiscreteMeasure::from_atoms(p, w);
            auto nu = DiscreteMeasure::from_atoms(q, v);
            if (mu.size() > 5 || nu.size() > 5) continue;
            if (uni(0, 3) == 0) std::swap(mu, nu);
            out.emplace_back(std::move(mu), std::move(nu));
        } catch (...) {
            continue;
        }
    }
    return out;
}

// random trigonometric sum with its exact Lipschitz and second-derivative bounds
struct TrigSum {
    std::vector<double> a, w, c;
    double operator()(double x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::sin(w[k] * x + c[k]);
        return s;
    }
    double lip() const {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k]) * w[k];
        return s;
    }
    double curv() const {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k]) * w[k] * w[k];
        return s;
    }
};

inline TrigSum random_trig(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-0.6, 0.6), freq(0.3, 2.0), ph(0.0, 6.283);
    TrigSum t;
    for (int k = 0; k < 3; ++k) {
        t.a.push_back(amp(rng));
        t.w.push_back(freq(rng));
        t.c.push_back(ph(rng));
    }
    return t;
}

}  // namespace riskgen
