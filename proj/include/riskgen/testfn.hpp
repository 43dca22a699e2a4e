#pragma once

#include <vector>

#include "riskgen/grid.hpp"

namespace riskgen {

/// Analytic terminal functions with exact first and second derivatives.
class TestFunction {
public:
    enum class Kind { sine, bump, abs_clipped, tabulated };

    // amplitude * sin(frequency * x)
    static TestFunction sine(double frequency, double amplitude = 1.0);
    // height * exp(-(x - center)^2 / (2 width^2))
    static TestFunction bump(double center, double width, double height);
    // min(|x|, clip)
    static TestFunction abs_clipped(double clip);
    // samples on a uniform grid starting at xmin; derivatives of the interpolant
    static TestFunction tabulated(double xmin, double dx, std::vector<double> values);

    Kind kind() const { return kind_; }
    double value(double x) const;
    double gradient(double x) const;
    double hessian(double x) const;
    double lipschitz() const;
    double hessian_bound() const;
    bool smooth() const { return kind_ == Kind::sine || kind_ == Kind::bump; }

    GridFunction on(const Grid& grid) const;

private:
    Kind kind_ = Kind::sine;
    double a_ = 1.0, b_ = 1.0, c_ = 0.0;
    double xmin_ = 0.0, dx_ = 1.0;
    std::vector<double> values_;
};

}  // namespace riskgen
