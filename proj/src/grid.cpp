#include "riskgen/grid.hpp"

#include <algorithm>
#include <cmath>

#include "riskgen/errors.hpp"

namespace riskgen {

Grid::Grid(double xmin_, double xmax_, double dx_) : xmin(xmin_), dx(dx_) {
    if (!(dx_ > 0.0)) throw ValidationError("grid: dx must be positive");
    if (!(xmax_ > xmin_)) throw ValidationError("grid: xmax must exceed xmin");
    const double cells = (xmax_ - xmin_) / dx_;
    const double r = std::round(cells);
    if (std::abs(cells - r) > 1e-6 * std::max(1.0, cells))
        throw ValidationError("grid: (xmax - xmin) must be a multiple of dx");
    n = static_cast<std::size_t>(r) + 1;
    if (n < 3) throw ValidationError("grid: need at least 3 points");
}

GridFunction::GridFunction(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n) throw ValidationError("grid function: value count does not match grid");
    if (values_.size() < 3) throw ValidationError("grid function: need at least 3 points");
    for (double v : values_)
        if (!std::isfinite(v)) throw ValidationError("grid function: values must be finite");
    bound_ = sup_norm();
}

GridFunction::GridFunction(Grid grid, std::vector<double> values, double bound)
    : GridFunction(grid, std::move(values)) {
    if (bound < bound_) throw ValidationError("grid function: supplied bound is below max |value|");
    bound_ = bound;
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) v[i] = f(grid.x(i));
    return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::constant(const Grid& grid, double k) {
    return GridFunction(grid, std::vector<double>(grid.n, k));
}

double GridFunction::operator()(double x) const {
    const double t = (x - grid_.xmin) / grid_.dx;
    if (t <= 0.0) return values_.front();
    const double last = static_cast<double>(values_.size() - 1);
    if (t >= last) return values_.back();
    const auto i = static_cast<std::size_t>(t);
    const double w = t - static_cast<double>(i);
    if (w == 0.0) return values_[i];
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

double GridFunction::sup_norm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

double GridFunction::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double GridFunction::lipschitz() const {
    double l = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) l = std::max(l, std::abs(values_[i + 1] - values_[i]));
    return l / grid_.dx;
}

double GridFunction::second_difference_bound() const {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < values_.size(); ++i)
        m = std::max(m, std::abs(values_[i + 1] - 2.0 * values_[i] + values_[i - 1]));
    return m / (grid_.dx * grid_.dx);
}

bool GridFunction::convex(double tol) const {
    const double scale = std::max(1.0, sup_norm());
    for (std::size_t i = 1; i + 1 < values_.size(); ++i)
        if (values_[i + 1] - 2.0 * values_[i] + values_[i - 1] < -tol * scale) return false;
    return true;
}

double sup_distance(const GridFunction& f, const GridFunction& g, double radius) {
    if (!(f.grid() == g.grid())) throw ValidationError("sup_distance: grids differ");
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f.x(i)) <= radius + 1e-12) d = std::max(d, std::abs(f[i] - g[i]));
    return d;
}

}  // namespace riskgen
