#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace riskgen {

struct Grid {
    double xmin = 0.0;
    double dx = 1.0;
    std::size_t n = 0;

    Grid() = default;
    Grid(double xmin_, double xmax_, double dx_);
    double x(std::size_t i) const { return xmin + dx * static_cast<double>(i); }
    double xmax() const { return x(n - 1); }
    bool operator==(const Grid& o) const { return xmin == o.xmin && dx == o.dx && n == o.n; }
};

/**
 * @brief Bounded function sampled on a uniform grid.
 *
 * Off-grid values use linear interpolation, with constant extension beyond
 * the end points.
 */
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Grid grid, std::vector<double> values);
    // bound must dominate max |values|
    GridFunction(Grid grid, std::vector<double> values, double bound);

    static GridFunction sample(const Grid& grid, const std::function<double(double)>& f);
    static GridFunction constant(const Grid& grid, double k);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double x(std::size_t i) const { return grid_.x(i); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double bound() const { return bound_; }

    double operator()(double x) const;

    double sup_norm() const;
    double max_value() const;
    double min_value() const;
    // Lipschitz constant of the interpolant
    double lipschitz() const;
    // max |second difference| / dx^2
    double second_difference_bound() const;
    // midpoint convexity of the samples
    bool convex(double tol = 1e-12) const;

private:
    Grid grid_;
    std::vector<double> values_;
    double bound_ = 0.0;
};

// sup |f - g| over grid nodes with |x| <= radius
double sup_distance(const GridFunction& f, const GridFunction& g, double radius);

}  // namespace riskgen
