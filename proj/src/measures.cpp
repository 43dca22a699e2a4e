#include "riskgen/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "riskgen/errors.hpp"
#include "riskgen/lp.hpp"

namespace riskgen {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty() || points_.size() != weights_.size())
        throw ValidationError("DiscreteMeasure: points and weights must be nonempty and of equal length");
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i])) throw ValidationError("DiscreteMeasure: points must be finite");
        if (!(weights_[i] >= 0.0)) throw ValidationError("DiscreteMeasure: weights must be nonnegative");
        if (i > 0 && !(points_[i] > points_[i - 1]))
            throw ValidationError("DiscreteMeasure: points must be strictly increasing");
        s += weights_[i];
    }
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("DiscreteMeasure: weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::from_atoms(std::vector<double> points, std::vector<double> weights,
                                            double merge_tol) {
    if (points.empty() || points.size() != weights.size())
        throw ValidationError("DiscreteMeasure: points and weights must be nonempty and of equal length");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<double> p, w;
    for (std::size_t k : order) {
        if (weights[k] < 0.0) throw ValidationError("DiscreteMeasure: weights must be nonnegative");
        if (weights[k] == 0.0) continue;
        if (!p.empty() && points[k] - p.back() <= merge_tol) {
            w.back() += weights[k];
        } else {
            p.push_back(points[k]);
            w.push_back(weights[k]);
        }
    }
    if (p.empty()) throw ValidationError("DiscreteMeasure: all weights are zero");
    double s = 0.0;
    for (double x : w) s += x;
    if (std::abs(s - 1.0) > 1e-9) throw ValidationError("DiscreteMeasure: weights must sum to 1");
    if (std::abs(s - 1.0) > 1e-13)
        for (double& x : w) x /= s;
    return DiscreteMeasure(std::move(p), std::move(w));
}

double DiscreteMeasure::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * points_[i];
    return m;
}

double DiscreteMeasure::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < size(); ++i) v += weights_[i] * (points_[i] - m) * (points_[i] - m);
    return v;
}

double DiscreteMeasure::expect(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * f(points_[i]);
    return s;
}

DiscreteMeasure DiscreteMeasure::shifted(double b) const {
    auto p = points_;
    for (double& x : p) x += b;
    return DiscreteMeasure::from_atoms(std::move(p), weights_);
}

DiscreteMeasure DiscreteMeasure::scaled(double s) const {
    auto p = points_;
    for (double& x : p) x *= s;
    return DiscreteMeasure::from_atoms(std::move(p), weights_);
}

DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double merge_tol) {
    std::vector<double> p, w;
    p.reserve(mu.size() * nu.size());
    w.reserve(mu.size() * nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) {
            p.push_back(mu.point(i) + nu.point(j));
            w.push_back(mu.weight(i) * nu.weight(j));
        }
    return DiscreteMeasure::from_atoms(std::move(p), std::move(w), merge_tol);
}

double Coupling::marginal_error() const {
    const std::size_t n = source.size(), m = target.size();
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += (*this)(i, j);
        err = std::max(err, std::abs(s - source.weight(i)));
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (*this)(i, j);
        err = std::max(err, std::abs(s - target.weight(j)));
    }
    return err;
}

double Coupling::barycenter_residual() const {
    double res = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (source.weight(i) <= 0.0) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < target.size(); ++j) s += (*this)(i, j) * (target.point(j) - source.point(i));
        res = std::max(res, std::abs(s) / source.weight(i));
    }
    return res;
}

TransportSolution min_cost_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const PairCost& cost) {
    const int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
    std::vector<int> var_i, var_j;
    std::vector<double> cvals;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double c = cost(mu.point(i), nu.point(j));
            if (std::isnan(c)) throw DomainError("min_cost_coupling: cost is NaN");
            if (c == kInf) continue;
            var_i.push_back(i);
            var_j.push_back(j);
            cvals.push_back(c);
        }
    TransportSolution sol;
    sol.coupling = {mu, nu, std::vector<double>(static_cast<std::size_t>(n) * m, 0.0)};
    if (cvals.empty()) {
        sol.value = kInf;
        return sol;
    }
    LpProblem lp(n + m, static_cast<int>(cvals.size()));
    for (int k = 0; k < lp.cols; ++k) {
        lp.at(var_i[k], k) = 1.0;
        lp.at(n + var_j[k], k) = 1.0;
        lp.c[k] = cvals[k];
    }
    for (int i = 0; i < n; ++i) lp.b[i] = mu.weight(i);
    for (int j = 0; j < m; ++j) lp.b[n + j] = nu.weight(j);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::optimal) {
        sol.value = kInf;
        return sol;
    }
    for (int k = 0; k < lp.cols; ++k) sol.coupling.matrix[static_cast<std::size_t>(var_i[k]) * m + var_j[k]] = r.x[k];
    sol.value = r.value;
    sol.u.assign(r.dual.begin(), r.dual.begin() + n);
    sol.v.assign(r.dual.begin() + n, r.dual.end());
    sol.duality_gap = std::abs(r.value - r.dual_value) + std::max(0.0, -r.dual_infeasibility);
    return sol;
}

TransportSolution monotone_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const PairCost& cost) {
    const std::size_t n = mu.size(), m = nu.size();
    TransportSolution sol;
    sol.coupling = {mu, nu, std::vector<double>(n * m, 0.0)};
    std::size_t i = 0, j = 0;
    double ri = mu.weight(0), rj = nu.weight(0);
    while (i < n && j < m) {
        const double t = std::min(ri, rj);
        if (t > 0.0) {
            sol.coupling.matrix[i * m + j] += t;
            sol.value += t * cost(mu.point(i), nu.point(j));
        }
        ri -= t;
        rj -= t;
        if (ri <= rj) {
            if (++i < n) ri = mu.weight(i);
        } else {
            if (++j < m) rj = nu.weight(j);
        }
    }
    sol.duality_gap = std::numeric_limits<double>::quiet_NaN();
    return sol;
}

double wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
    if (!(p >= 1.0)) throw DomainError("wasserstein_p: p must be >= 1");
    const auto sol = monotone_coupling(mu, nu, [p](double y, double z) { return std::pow(std::abs(z - y), p); });
    return std::pow(std::max(0.0, sol.value), 1.0 / p);
}

bool check_convex_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol) {
    if (std::abs(mu.mean() - nu.mean()) > tol) return false;
    std::vector<double> knots = mu.points();
    knots.insert(knots.end(), nu.points().begin(), nu.points().end());
    for (double k : knots) {
        const auto hinge = [k](double x) { return std::max(0.0, x - k); };
        if (mu.expect(hinge) > nu.expect(hinge) + tol) return false;
    }
    return true;
}

std::optional<TransportSolution> min_cost_martingale_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                              const PairCost& cost) {
    const int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
    double scale = 0.0;
    for (double y : mu.points())
        for (double z : nu.points()) scale = std::max(scale, std::abs(z - y));
    if (scale == 0.0) scale = 1.0;
    // kernel variables K(i,j) = pi(i,j) / mu_i
    std::vector<int> var_i, var_j;
    std::vector<double> cvals;
    for (int i = 0; i < n; ++i) {
        if (mu.weight(i) <= 0.0) continue;
        for (int j = 0; j < m; ++j) {
            const double c = cost(mu.point(i), nu.point(j));
            if (std::isnan(c)) throw DomainError("min_cost_martingale_coupling: cost is NaN");
            if (c == kInf) continue;
            var_i.push_back(i);
            var_j.push_back(j);
            cvals.push_back(c);
        }
    }
    if (cvals.empty()) return std::nullopt;
    LpProblem lp(2 * n + m, static_cast<int>(cvals.size()));
    for (int k = 0; k < lp.cols; ++k) {
        const int i = var_i[k], j = var_j[k];
        lp.at(i, k) = 1.0;
        lp.at(n + i, k) = (nu.point(j) - mu.point(i)) / scale;
        lp.at(2 * n + j, k) = mu.weight(i);
        lp.c[k] = mu.weight(i) * cvals[k];
    }
    for (int i = 0; i < n; ++i) lp.b[i] = mu.weight(i) > 0.0 ? 1.0 : 0.0;
    for (int j = 0; j < m; ++j) lp.b[2 * n + j] = nu.weight(j);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::optimal) return std::nullopt;
    TransportSolution sol;
    sol.coupling = {mu, nu, std::vector<double>(static_cast<std::size_t>(n) * m, 0.0)};
    for (int k = 0; k < lp.cols; ++k)
        sol.coupling.matrix[static_cast<std::size_t>(var_i[k]) * m + var_j[k]] = mu.weight(var_i[k]) * r.x[k];
    sol.value = r.value;
    sol.u.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (mu.weight(i) > 0.0) sol.u[i] = r.dual[i] / mu.weight(i);
    sol.v.assign(r.dual.begin() + 2 * n, r.dual.end());
    sol.duality_gap = std::abs(r.value - r.dual_value) + std::max(0.0, -r.dual_infeasibility);
    return sol;
}

DiscreteMeasure dilation_measure(const DiscreteMeasure& mu, double theta) {
    if (theta == 0.0) return mu;
    std::vector<double> p, w;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        p.push_back(mu.point(i) - theta);
        w.push_back(0.5 * mu.weight(i));
        p.push_back(mu.point(i) + theta);
        w.push_back(0.5 * mu.weight(i));
    }
    return DiscreteMeasure::from_atoms(std::move(p), std::move(w));
}

}  // namespace riskgen
