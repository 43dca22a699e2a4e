#include "riskgen/testfn.hpp"

#include <algorithm>
#include <cmath>

#include "riskgen/errors.hpp"

namespace riskgen {

TestFunction TestFunction::sine(double frequency, double amplitude) {
    TestFunction f;
    f.kind_ = Kind::sine;
    f.a_ = amplitude;
    f.b_ = frequency;
    return f;
}

TestFunction TestFunction::bump(double center, double width, double height) {
    if (!(width > 0.0)) throw ValidationError("bump: width must be positive");
    TestFunction f;
    f.kind_ = Kind::bump;
    f.a_ = height;
    f.b_ = width;
    f.c_ = center;
    return f;
}

TestFunction TestFunction::abs_clipped(double clip) {
    if (!(clip > 0.0)) throw ValidationError("abs_clipped: clip must be positive");
    TestFunction f;
    f.kind_ = Kind::abs_clipped;
    f.a_ = clip;
    return f;
}

TestFunction TestFunction::tabulated(double xmin, double dx, std::vector<double> values) {
    if (!(dx > 0.0)) throw ValidationError("tabulated test function: dx must be positive");
    if (values.size() < 3) throw ValidationError("tabulated test function: need at least 3 values");
    TestFunction f;
    f.kind_ = Kind::tabulated;
    f.xmin_ = xmin;
    f.dx_ = dx;
    f.values_ = std::move(values);
    return f;
}

double TestFunction::value(double x) const {
    switch (kind_) {
        case Kind::sine: return a_ * std::sin(b_ * x);
        case Kind::bump: {
            const double u = (x - c_) / b_;
            return a_ * std::exp(-0.5 * u * u);
        }
        case Kind::abs_clipped: return std::min(std::abs(x), a_);
        case Kind::tabulated: {
            const double t = (x - xmin_) / dx_;
            if (t <= 0.0) return values_.front();
            const double last = static_cast<double>(values_.size() - 1);
            if (t >= last) return values_.back();
            const auto i = static_cast<std::size_t>(t);
            return values_[i] + (t - i) * (values_[i + 1] - values_[i]);
        }
    }
    return 0.0;
}

double TestFunction::gradient(double x) const {
    switch (kind_) {
        case Kind::sine: return a_ * b_ * std::cos(b_ * x);
        case Kind::bump: {
            const double u = (x - c_) / b_;
            return -a_ * u / b_ * std::exp(-0.5 * u * u);
        }
        case Kind::abs_clipped: return std::abs(x) < a_ ? (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) : 0.0;
        case Kind::tabulated: {
            const double t = (x - xmin_) / dx_;
            if (t < 0.0 || t >= static_cast<double>(values_.size() - 1)) return 0.0;
            const auto i = static_cast<std::size_t>(t);
            return (values_[i + 1] - values_[i]) / dx_;
        }
    }
    return 0.0;
}

double TestFunction::hessian(double x) const {
    switch (kind_) {
        case Kind::sine: return -a_ * b_ * b_ * std::sin(b_ * x);
        case Kind::bump: {
            const double u = (x - c_) / b_;
            return a_ * (u * u - 1.0) / (b_ * b_) * std::exp(-0.5 * u * u);
        }
        default: return 0.0;
    }
}

double TestFunction::lipschitz() const {
    switch (kind_) {
        case Kind::sine: return std::abs(a_ * b_);
        case Kind::bump: return std::abs(a_) / b_ * std::exp(-0.5);
        case Kind::abs_clipped: return 1.0;
        case Kind::tabulated: {
            double l = 0.0;
            for (std::size_t i = 0; i + 1 < values_.size(); ++i) l = std::max(l, std::abs(values_[i + 1] - values_[i]));
            return l / dx_;
        }
    }
    return 0.0;
}

double TestFunction::hessian_bound() const {
    switch (kind_) {
        case Kind::sine: return std::abs(a_) * b_ * b_;
        case Kind::bump: return std::abs(a_) / (b_ * b_);
        default: return std::numeric_limits<double>::infinity();
    }
}

GridFunction TestFunction::on(const Grid& grid) const {
    return GridFunction::sample(grid, [this](double x) { return value(x); });
}

}  // namespace riskgen
