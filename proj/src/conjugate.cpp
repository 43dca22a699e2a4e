#include "riskgen/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "riskgen/errors.hpp"
#include "riskgen/optimize.hpp"

namespace riskgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slope(const std::vector<double>& v, const std::vector<double>& c, std::size_t i) {
    return (c[i + 1] - c[i]) / (v[i + 1] - v[i]);
}

// largest v in [lo, inf) with g(v) <= 0, given g(lo) <= 0 and g eventually increasing to +inf
double largest_root(const std::function<double(double)>& g, double lo) {
    double hi = std::max(1.0, 2.0 * std::abs(lo));
    int guard = 0;
    while (!(g(lo + hi) > 0.0 && g(lo + 2.0 * hi) > g(lo + hi))) {
        hi *= 2.0;
        if (++guard > 200) return kInf;
    }
    const int n = 4096;
    double last_nonpos = lo;
    for (int i = n; i >= 0; --i) {
        const double v = lo + hi * i / n;
        if (g(v) <= 0.0) {
            last_nonpos = v;
            break;
        }
    }
    double a = last_nonpos, b = std::min(lo + hi, last_nonpos + hi / n);
    if (g(b) <= 0.0) return b;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        const double m = 0.5 * (a + b);
        (g(m) <= 0.0 ? a : b) = m;
    }
    return a;
}

}  // namespace

CostFunction CostFunction::quadratic(double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("quadratic cost: gamma must be positive");
    CostFunction c;
    c.kind_ = Kind::quadratic;
    c.gamma_ = gamma;
    c.exponent_ = 2.0;
    c.scale_ = 1.0 / (2.0 * gamma);
    return c;
}

CostFunction CostFunction::power(double p, double scale) {
    if (!(p > 1.0)) throw ValidationError("power cost: exponent p must exceed 1");
    if (!(scale > 0.0)) throw ValidationError("power cost: scale must be positive");
    CostFunction c;
    c.kind_ = Kind::power;
    c.exponent_ = p;
    c.scale_ = scale;
    return c;
}

CostFunction CostFunction::piecewise_linear(std::vector<std::pair<double, double>> knots,
                                            CostTail tail) {
    if (knots.size() < 2) throw ValidationError("piecewise-linear cost: need at least two knots");
    CostFunction c;
    c.kind_ = Kind::piecewise_linear;
    c.tail_ = tail;
    for (const auto& [v, cv] : knots) {
        c.kv_.push_back(v);
        c.kc_.push_back(cv);
    }
    c.finish_knots();
    return c;
}

CostFunction CostFunction::tabulated(double dv, std::vector<double> values, CostTail tail) {
    if (!(dv > 0.0)) throw ValidationError("tabulated cost: grid step must be positive");
    if (values.size() < 2) throw ValidationError("tabulated cost: need at least two values");
    CostFunction c;
    c.kind_ = Kind::tabulated;
    c.tail_ = tail;
    c.dv_ = dv;
    c.kc_ = std::move(values);
    c.kv_.resize(c.kc_.size());
    for (std::size_t i = 0; i < c.kv_.size(); ++i) c.kv_[i] = dv * static_cast<double>(i);
    c.finish_knots();
    return c;
}

void CostFunction::finish_knots() {
    if (kv_.front() != 0.0) throw ValidationError("knot-based cost: first knot must be at v = 0");
    for (std::size_t i = 0; i + 1 < kv_.size(); ++i)
        if (!(kv_[i + 1] > kv_[i])) throw ValidationError("knot-based cost: knots must be strictly increasing");
    for (double cv : kc_)
        if (!std::isfinite(cv)) throw ValidationError("knot-based cost: knot values must be finite");
    if (!(tail_.curvature >= 0.0)) throw ValidationError("knot-based cost: tail curvature must be >= 0");
    convex_ = true;
    for (std::size_t i = 0; i + 2 < kv_.size(); ++i) {
        const double s0 = slope(kv_, kc_, i), s1 = slope(kv_, kc_, i + 1);
        if (s1 < s0 - 1e-12 * std::max(1.0, std::abs(s0))) {
            convex_ = false;
            break;
        }
    }
}

double CostFunction::tail_slope() const {
    if (closed_form()) return 0.0;
    return std::max(0.0, slope(kv_, kc_, kv_.size() - 2));
}

double CostFunction::domain_end() const {
    return finite_everywhere() ? kInf : kv_.back();
}

double CostFunction::tail_value(double v) const {
    if (tail_.infinite) return kInf;
    const double d = v - kv_.back();
    return kc_.back() + tail_slope() * d + tail_.curvature * d * d;
}

double CostFunction::value(double v) const {
    if (!(v >= 0.0)) throw DomainError("cost function evaluated at a negative argument");
    if (closed_form()) return scale_ * std::pow(v, exponent_);
    if (v > kv_.back()) return tail_value(v);
    std::size_t i;
    if (kind_ == Kind::tabulated) {
        i = std::min(static_cast<std::size_t>(v / dv_), kv_.size() - 2);
    } else {
        i = static_cast<std::size_t>(std::upper_bound(kv_.begin(), kv_.end(), v) - kv_.begin());
        i = std::min(i == 0 ? 0 : i - 1, kv_.size() - 2);
    }
    const double w = (v - kv_[i]) / (kv_[i + 1] - kv_[i]);
    if (w <= 0.0) return kc_[i];
    if (w >= 1.0) return kc_[i + 1];
    return kc_[i] + w * (kc_[i + 1] - kc_[i]);
}

std::vector<std::string> CostFunction::invariant_violations() const {
    std::vector<std::string> out;
    if (closed_form()) return out;
    for (std::size_t i = 0; i + 1 < kc_.size(); ++i)
        if (kc_[i + 1] < kc_[i]) {
            out.emplace_back("nondecreasing: value decreases after v = " + std::to_string(kv_[i]));
            break;
        }
    if (kc_.front() > 0.0) out.emplace_back("c(0) <= 0: c(0) = " + std::to_string(kc_.front()));
    if (!tail_.infinite && tail_.curvature <= 0.0)
        out.emplace_back("superlinear: linear tail has bounded slope");
    if (out.empty()) {
        const CostFunction cc = biconjugate(*this);
        const auto& v = cc.knot_v();
        const auto& c = cc.knot_c();
        const std::size_t n = v.size();
        if (n >= 3 && c[n - 1] / v[n - 1] < c[n - 2] / v[n - 2] - 1e-12)
            out.emplace_back("superlinear: c(v)/v decreases between the two largest knots");
    }
    return out;
}

void CostFunction::validate() const {
    const auto v = invariant_violations();
    if (!v.empty()) throw ValidationError("cost function invariant violated: " + v.front());
}

std::string CostFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::quadratic: os << "quadratic(gamma=" << gamma_ << ")"; break;
        case Kind::power: os << "power(p=" << exponent_ << ", scale=" << scale_ << ")"; break;
        case Kind::piecewise_linear: os << "piecewise_linear(" << kv_.size() << " knots)"; break;
        case Kind::tabulated: os << "tabulated(" << kv_.size() << " values, dv=" << dv_ << ")"; break;
    }
    if (!closed_form()) {
        if (tail_.infinite) os << "+inf tail";
        else os << "+quadratic tail q=" << tail_.curvature;
    }
    return os.str();
}

double conjugate_argmax(const CostFunction& c, double w) {
    if (c.closed_form()) {
        if (w <= 0.0) return 0.0;
        return std::pow(w / (c.scale() * c.exponent()), 1.0 / (c.exponent() - 1.0));
    }
    const auto& v = c.knot_v();
    const auto& cv = c.knot_c();
    const std::size_t n = v.size();
    const double s = c.tail_slope();
    const double q = c.tail().curvature;
    auto tail_arg = [&]() {
        if (c.tail().infinite || w <= s) return v.back();
        if (q <= 0.0) throw DomainError("conjugate: sup is +inf (cost is not superlinear)");
        return v.back() + (w - s) / (2.0 * q);
    };
    if (c.convex()) {
        // first segment whose slope reaches w
        std::size_t lo = 0, hi = n - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (slope(v, cv, mid) >= w) hi = mid;
            else lo = mid + 1;
        }
        if (lo < n - 1) return v[lo];
        return tail_arg();
    }
    std::size_t best = 0;
    double vbest = w * v[0] - cv[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double val = w * v[i] - cv[i];
        if (val > vbest) {
            vbest = val;
            best = i;
        }
    }
    const double ta = tail_arg();
    if (ta > v.back()) {
        const double tv = w * ta - c.value(ta);
        if (tv > vbest) return ta;
    }
    return v[best];
}

double conjugate(const CostFunction& c, double w) {
    if (c.closed_form()) {
        if (w <= 0.0) return -c.value(0.0);
        const double vs = conjugate_argmax(c, w);
        return w * vs - c.scale() * std::pow(vs, c.exponent());
    }
    const double vs = conjugate_argmax(c, w);
    return w * vs - c.value(vs);
}

CostFunction biconjugate(const CostFunction& c) {
    if (c.closed_form() || c.convex()) return c;
    const auto& v = c.knot_v();
    const auto& cv = c.knot_c();
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < v.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            const double cross = (v[b] - v[a]) * (cv[i] - cv[a]) - (cv[b] - cv[a]) * (v[i] - v[a]);
            if (cross <= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    std::vector<std::pair<double, double>> knots;
    auto hull_slope = [&](std::size_t j) {
        return (cv[hull[j + 1]] - cv[hull[j]]) / (v[hull[j + 1]] - v[hull[j]]);
    };
    const double s = c.tail_slope();
    const double q = c.tail().curvature;
    const std::size_t m = hull.size();
    if (c.tail().infinite || hull_slope(m - 2) <= s || q <= 0.0) {
        for (std::size_t j : hull) knots.emplace_back(v[j], cv[j]);
        return CostFunction::piecewise_linear(std::move(knots), c.tail());
    }
    // tangent from a hull vertex to the quadratic tail
    const double vn = v.back(), cn = cv.back();
    std::size_t j = m - 2;
    double d = 0.0;
    for (;; --j) {
        const double a = v[hull[j]], b = cv[hull[j]];
        const double e = vn - a;
        d = std::max(0.0, -e + std::sqrt(std::max(0.0, e * e + (cn - b - s * e) / q)));
        const double sigma = s + 2.0 * q * d;
        if (j == 0 || sigma >= hull_slope(j - 1)) break;
    }
    for (std::size_t k = 0; k <= j; ++k) knots.emplace_back(v[hull[k]], cv[hull[k]]);
    const double vt = vn + d;
    knots.emplace_back(vt, cn + s * d + q * d * d);
    return CostFunction::piecewise_linear(std::move(knots), c.tail());
}

double power_conjugate(const CostFunction& c, double a, double p) {
    if (p == 1.0) return conjugate(c, a);
    if (!(p > 1.0)) throw DomainError("power_conjugate: exponent must be >= 1");
    if (a <= 0.0) return -c.value(0.0);
    if (c.closed_form()) {
        const double r = c.exponent(), s = c.scale();
        if (r > p) {
            const double vs = std::pow(a * p / (s * r), 1.0 / (r - p));
            return a * std::pow(vs, p) - s * std::pow(vs, r);
        }
        if (r == p && a <= s) return 0.0;
        throw DomainError("power_conjugate: sup is +inf (cost does not dominate a v^p)");
    }
    const auto& v = c.knot_v();
    const auto& cv = c.knot_c();
    double best = -kInf;
    for (std::size_t i = 0; i < v.size(); ++i) best = std::max(best, a * std::pow(v[i], p) - cv[i]);
    if (c.tail().infinite) return best;
    const double vn = v.back(), cn = cv.back(), s = c.tail_slope(), q = c.tail().curvature;
    if (p == 2.0) {
        const double lead = a - q, lin = 2.0 * a * vn - s;
        if (lead > 0.0 || (lead == 0.0 && lin > 0.0))
            throw DomainError("power_conjugate: sup is +inf (tail curvature too small)");
        double d = 0.0;
        if (lead < 0.0) d = std::max(0.0, lin / (-2.0 * lead));
        return std::max(best, a * (vn + d) * (vn + d) - (cn + s * d + q * d * d));
    }
    if (p > 2.0 || q <= 0.0) throw DomainError("power_conjugate: sup is +inf (tail grows slower than a v^p)");
    auto tailobj = [&](double d) { return a * std::pow(vn + d, p) - (cn + s * d + q * d * d); };
    double hi = 1.0;
    while (tailobj(hi) > tailobj(0.0) - 1.0 || tailobj(2.0 * hi) > tailobj(hi)) hi *= 2.0;
    return std::max(best, scan_golden_maximize(tailobj, 0.0, hi, 2000).value);
}

double growth_radius(const CostFunction& c, double a, double p, double offset) {
    if (!(offset >= 0.0)) throw DomainError("growth_radius: offset must be >= 0");
    if (!(p >= 1.0)) throw DomainError("growth_radius: exponent must be >= 1");
    auto g = [&](double v) { return c.value(v) - a * std::pow(v, p) - offset; };
    if (c.closed_form()) {
        const double r = c.exponent(), s = c.scale();
        if (a > 0.0 && (r < p || (r == p && s <= a))) return kInf;
        if (r == p) return std::pow(offset / (s - std::max(a, 0.0)), 1.0 / p);
        return largest_root(g, 0.0);
    }
    const auto& v = c.knot_v();
    const auto& cv = c.knot_c();
    const std::size_t n = v.size();
    if (!c.tail().infinite) {
        const double vn = v.back(), cn = cv.back(), s = c.tail_slope(), q = c.tail().curvature;
        auto gt = [&](double d) { return cn + s * d + q * d * d - a * std::pow(vn + d, p) - offset; };
        if (p > 2.0 && a > 0.0) return kInf;
        if (p == 1.0 || p == 2.0) {
            // g on the tail is the quadratic A d^2 + B d + C
            const double A = (p == 2.0) ? q - a : q;
            const double B = (p == 2.0) ? s - 2.0 * a * vn : s - a;
            const double C = gt(0.0);
            if (A < 0.0 || (A == 0.0 && B < 0.0) || (A == 0.0 && B == 0.0 && C <= 0.0)) return kInf;
            double root = -kInf;
            if (A == 0.0) {
                if (B > 0.0) root = -C / B;
            } else {
                const double disc = B * B - 4.0 * A * C;
                if (disc >= 0.0) root = (-B + std::sqrt(disc)) / (2.0 * A);
            }
            if (root >= 0.0) return vn + root;
            if (C <= 0.0) return vn;
        } else {
            if (q <= 0.0 && a > 0.0) return kInf;
            if (gt(0.0) <= 0.0) return largest_root([&](double x) { return g(x); }, vn);
            // g(vn) > 0: check whether the tail dips below zero again
            double hi = 1.0;
            while (gt(2.0 * hi) <= gt(hi) || gt(hi) <= 0.0) {
                hi *= 2.0;
                if (hi > 1e12) break;
            }
            const int m = 4096;
            for (int i = m; i >= 0; --i) {
                const double d = hi * i / m;
                if (gt(d) <= 0.0) return largest_root([&](double x) { return g(x); }, vn + d);
            }
        }
    }
    if (g(v.back()) <= 0.0) return v.back();
    for (std::size_t i = n - 1; i-- > 0;) {
        if (g(v[i]) <= 0.0) {
            double lo = v[i], hi = v[i + 1];
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) <= 0.0 ? lo : hi) = mid;
            }
            return lo;
        }
    }
    return 0.0;
}

}  // namespace riskgen
