#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace riskgen {

/// Finitely supported probability measure on the real line.
class DiscreteMeasure {
public:
    DiscreteMeasure() : points_{0.0}, weights_{1.0} {}
    // strict: points strictly increasing, weights >= 0 summing to 1 within 1e-12
    DiscreteMeasure(std::vector<double> points, std::vector<double> weights);

    /**
     * @brief Builds a measure from unsorted atoms.
     *
     * Sorts, merges points closer than `merge_tol`, drops zero weights and
     * removes a total-mass drift of at most 1e-9 by rescaling.
     */
    static DiscreteMeasure from_atoms(std::vector<double> points, std::vector<double> weights,
                                      double merge_tol = 1e-12);
    static DiscreteMeasure dirac(double x) { return DiscreteMeasure({x}, {1.0}); }

    std::size_t size() const { return points_.size(); }
    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    double point(std::size_t i) const { return points_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    double mean() const;
    double variance() const;
    double expect(const std::function<double(double)>& f) const;

    DiscreteMeasure shifted(double b) const;
    DiscreteMeasure scaled(double s) const;

private:
    std::vector<double> points_;
    std::vector<double> weights_;
};

// mu * nu
DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double merge_tol = 1e-12);

struct Coupling {
    DiscreteMeasure source;
    DiscreteMeasure target;
    // row-major, source index first
    std::vector<double> matrix;

    double operator()(std::size_t i, std::size_t j) const { return matrix[i * target.size() + j]; }
    double marginal_error() const;
    // max over source atoms of |sum_z pi(y,z)(z - y)| / mu(y)
    double barycenter_residual() const;
};

struct TransportSolution {
    Coupling coupling;
    double value = 0.0;
    // dual potentials: value = sum mu u + sum nu v  (martingale case adds a multiplier per source)
    std::vector<double> u, v;
    double duality_gap = 0.0;
};

using PairCost = std::function<double(double y, double z)>;

// LP-certified optimal coupling
TransportSolution min_cost_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const PairCost& cost);

// comonotone (quantile) coupling; optimal for costs convex in z - y
TransportSolution monotone_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const PairCost& cost);

double wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

// Strassen test via hinge functions at the joint support knots
bool check_convex_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol = 1e-9);

// absent when Mart(mu, nu) is empty
std::optional<TransportSolution> min_cost_martingale_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                              const PairCost& cost);

// mu * (1/2 delta_{-theta} + 1/2 delta_{theta})
DiscreteMeasure dilation_measure(const DiscreteMeasure& mu, double theta);

}  // namespace riskgen
