#pragma once

#include <string>
#include <utility>
#include <vector>

namespace riskgen {

/// Behaviour of a knot-based cost beyond its last knot.
struct CostTail {
    // +infinity beyond the last knot (ball constraints)
    bool infinite = false;
    // q in c(v) = c_n + s_n (v - v_n) + q (v - v_n)^2, s_n = max(0, last slope)
    double curvature = 1.0;
};

/**
 * @brief Scalar cost c: [0, inf) -> (-inf, inf] used both as transport cost
 *        and as penalty shape.
 *
 * Four kinds: quadratic c(v) = v^2 / (2 gamma), power c(v) = scale * v^p,
 * piecewise-linear through sorted knots, and tabulated on a uniform grid.
 * The last two carry a quadratic (or infinite) tail beyond the last knot.
 */
class CostFunction {
public:
    enum class Kind { quadratic, power, piecewise_linear, tabulated };

    static CostFunction quadratic(double gamma);
    static CostFunction power(double p, double scale = 1.0);
    static CostFunction piecewise_linear(std::vector<std::pair<double, double>> knots,
                                         CostTail tail = {});
    static CostFunction tabulated(double dv, std::vector<double> values, CostTail tail = {});

    Kind kind() const { return kind_; }
    bool closed_form() const { return kind_ == Kind::quadratic || kind_ == Kind::power; }

    double value(double v) const;
    double operator()(double v) const { return value(v); }

    double gamma() const { return gamma_; }
    // exponent and scale of the power representation (quadratic: 2, 1/(2 gamma))
    double exponent() const { return exponent_; }
    double scale() const { return scale_; }

    const std::vector<double>& knot_v() const { return kv_; }
    const std::vector<double>& knot_c() const { return kc_; }
    const CostTail& tail() const { return tail_; }
    double tail_slope() const;

    bool convex() const { return convex_; }
    bool finite_everywhere() const { return closed_form() || !tail_.infinite; }
    // last finite argument (+inf when finite everywhere)
    double domain_end() const;

    std::vector<std::string> invariant_violations() const;
    // throws ValidationError naming the first violated invariant
    void validate() const;

    std::string describe() const;

private:
    CostFunction() = default;
    void finish_knots();
    double tail_value(double v) const;

    Kind kind_ = Kind::quadratic;
    double gamma_ = 1.0;
    double exponent_ = 2.0;
    double scale_ = 0.5;
    std::vector<double> kv_, kc_;
    double dv_ = 0.0;
    CostTail tail_{};
    bool convex_ = true;
};

// c*(w) = sup_{v >= 0} (w v - c(v)); throws DomainError when the sup is +inf
double conjugate(const CostFunction& c, double w);

// smallest maximizer of w v - c(v)
double conjugate_argmax(const CostFunction& c, double w);

// lower convex envelope; closed-form kinds are returned unchanged
CostFunction biconjugate(const CostFunction& c);

/// sup_{v >= 0} (a v^p - c(v)); p = 1 is the ordinary conjugate.
double power_conjugate(const CostFunction& c, double a, double p);

/**
 * @brief sup{v >= 0 : c(v) <= a v^p + offset}, used to truncate search windows.
 *
 * Returns +inf when the set is unbounded. For p = 1 the lower convex envelope
 * is used, which can only enlarge the set. Requires offset >= 0.
 */
double growth_radius(const CostFunction& c, double a, double p, double offset);

}  // namespace riskgen
