#include "riskgen/onestep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskgen/errors.hpp"
#include "riskgen/lp.hpp"
#include "riskgen/optimize.hpp"

namespace riskgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// s -> phi(s^q) convex; knot-based costs are checked on their knots mapped to s = v^(1/q)
bool convex_in_power(const CostFunction& phi, double q) {
    if (phi.closed_form()) return phi.exponent() * q >= 1.0 - 1e-12;
    std::vector<double> v = phi.knot_v();
    if (!phi.tail().infinite) {
        const double vn = v.back(), step = std::max(vn, 1.0) / 50.0;
        for (int j = 1; j <= 200; ++j) v.push_back(vn + j * step);
    }
    std::vector<double> s, c;
    for (double x : v) {
        s.push_back(std::pow(x, 1.0 / q));
        c.push_back(phi(x));
    }
    // tabulation resolution: the appended tail starts from the last secant slope
    double spacing = 0.0;
    const auto& kv = phi.knot_v();
    for (std::size_t i = 0; i + 1 < kv.size(); ++i) spacing = std::max(spacing, kv[i + 1] - kv[i]);
    const double rel = kv.back() > 0.0 ? 2.0 * spacing / kv.back() : 0.0;
    double prev = -kInf;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double slope = (c[i + 1] - c[i]) / (s[i + 1] - s[i]);
        if (slope < prev - (1e-9 + rel) * (1.0 + std::abs(prev))) return false;
        prev = slope;
    }
    return true;
}

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a.point(i) - b.point(i)) > 1e-12 || std::abs(a.weight(i) - b.weight(i)) > 1e-12) return false;
    return true;
}

std::size_t heaviest(const DiscreteMeasure& mu) {
    std::size_t k = 0;
    for (std::size_t j = 1; j < mu.size(); ++j)
        if (mu.weight(j) > mu.weight(k)) k = j;
    return k;
}

// sum_j mu_j e(j), centred on the heaviest atom so constants are reproduced exactly
template <class E>
double centred_sum(const DiscreteMeasure& mu, std::size_t ref, E&& e) {
    const double r = e(ref);
    if (r == -kInf || r == kInf) return r;
    double s = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) s += mu.weight(j) * (e(j) - r);
    return r + s;
}

// smallest k (<= 512) with every atom on the lattice dx / k
int lattice_refinement(const DiscreteMeasure& mu, double dx, std::vector<long>& offsets) {
    for (int k = 1; k <= 512; ++k) {
        bool ok = true;
        offsets.assign(mu.size(), 0);
        for (std::size_t j = 0; j < mu.size() && ok; ++j) {
            const double u = mu.point(j) / dx * k;
            const double r = std::round(u);
            if (std::abs(u - r) > 1e-7 * std::max(1.0, std::abs(u))) ok = false;
            offsets[j] = static_cast<long>(r);
        }
        if (ok) return k;
    }
    offsets.clear();
    return 0;
}

// x^p with exact fast paths for the common integer exponents
inline double fast_pow(double x, double p) {
    if (p == 2.0) return x * x;
    if (p == 3.0) return x * x * x;
    if (p == 4.0) return (x * x) * (x * x);
    if (p == 1.0) return x;
    if (p == 0.5) return std::sqrt(x);
    return std::pow(x, p);
}

std::pair<long, long> segment_range(const Grid& g, double lo, double hi) {
    const double span = static_cast<double>(g.n) - 2.0;
    const double a = std::clamp(std::floor((lo - g.xmin) / g.dx), 0.0, std::max(span, 0.0));
    const double b = std::clamp(std::floor((hi - g.xmin) / g.dx), -1.0, span);
    return {static_cast<long>(a), static_cast<long>(b)};
}

/// xi0 -> sup_xi (f(xi) - h phi(|xi - xi0| / h)) over the interpolant or over grid nodes.
class OtEnvelope {
public:
    OtEnvelope(const GridFunction& f, const CostFunction& phi, double h, double window, bool nodes)
        : f_(f), phi_(phi), h_(h), U_(window), nodes_(nodes) {
        const Grid& g = f.grid();
        const auto& v = f.values();
        slope_.resize(g.n - 1);
        for (std::size_t i = 0; i + 1 < g.n; ++i) slope_[i] = (v[i + 1] - v[i]) / g.dx;
        if (phi.convex()) {
            ustar_.resize(slope_.size());
            for (std::size_t i = 0; i < slope_.size(); ++i) {
                const double s = slope_[i];
                ustar_[i] = (s == 0.0) ? 0.0 : std::copysign(h * conjugate_argmax(phi, std::abs(s)), s);
            }
        }
    }

    double cost(double u) const { return h_ * phi_(std::abs(u) / h_); }

    double operator()(double xi0) const { return nodes_ ? over_nodes(xi0) : over_interpolant(xi0); }

private:
    double over_nodes(double xi0) const {
        const Grid& g = f_.grid();
        double best = -kInf;
        for (std::size_t k = 0; k < g.n; ++k) best = std::max(best, f_[k] - cost(g.x(k) - xi0));
        return best;
    }

    double over_interpolant(double xi0) const {
        const Grid& g = f_.grid();
        double best = f_(xi0);
        if (!(U_ > 0.0)) return best;
        const auto [i0, i1] = segment_range(g, xi0 - U_, xi0 + U_);
        for (long i = i0; i <= i1; ++i) {
            const double xl = g.x(i), s = slope_[i], vl = f_[i];
            const double a = std::max(xl, xi0 - U_), b = std::min(xl + g.dx, xi0 + U_);
            if (a > b) continue;
            auto eval = [&](double xi) { best = std::max(best, vl + s * (xi - xl) - cost(xi - xi0)); };
            eval(a);
            eval(b);
            if (!ustar_.empty()) {
                eval(std::clamp(xi0 + ustar_[i], a, b));
                continue;
            }
            // non-convex phi: the objective is piecewise concave between knots of phi
            const auto& kv = phi_.knot_v();
            for (double sgn : {1.0, -1.0}) {
                const double va = sgn > 0 ? (a - xi0) / h_ : (xi0 - b) / h_;
                const double vb = sgn > 0 ? (b - xi0) / h_ : (xi0 - a) / h_;
                auto it = std::lower_bound(kv.begin(), kv.end(), std::max(va, 0.0));
                for (; it != kv.end() && *it <= vb; ++it) eval(xi0 + sgn * h_ * *it);
                if (!phi_.tail().infinite) {
                    const double vn = kv.back(), sn = phi_.tail_slope(), q = phi_.tail().curvature;
                    const double w = sgn * s;
                    if (w > sn && q > 0.0) {
                        const double vt = vn + (w - sn) / (2.0 * q);
                        if (vt >= va && vt <= vb) eval(xi0 + sgn * h_ * vt);
                    }
                }
            }
        }
        return best;
    }

    const GridFunction& f_;
    const CostFunction& phi_;
    double h_;
    double U_;
    bool nodes_;
    std::vector<double> slope_;
    std::vector<double> ustar_;
};

/// xi0 -> sup_xi (f(xi) - lambda |xi - xi0|^p) over the interpolant.
class PowerEnvelope {
public:
    PowerEnvelope(const GridFunction& f, double p) : f_(f), p_(p), rp_(1.0 / p), rp1_(1.0 / (p - 1.0)) {
        const Grid& g = f.grid();
        slope_.resize(g.n - 1);
        for (std::size_t i = 0; i + 1 < g.n; ++i) slope_[i] = (f[i + 1] - f[i]) / g.dx;
        L_ = f.lipschitz();
        osc_ = f.max_value() - f.min_value();
        max_ = f.max_value();
    }

    double operator()(double xi0, double lambda) const {
        if (lambda <= 0.0) return max_;
        const Grid& g = f_.grid();
        double best = f_(xi0);
        const double U = std::min(fast_pow(L_ / lambda, rp1_), fast_pow(osc_ / lambda, rp_));
        if (!(U > 0.0)) return best;
        const auto [i0, i1] = segment_range(g, xi0 - U, xi0 + U);
        for (long i = i0; i <= i1; ++i) {
            const double xl = g.x(i), s = slope_[i], vl = f_[i];
            const double a = std::max(xl, xi0 - U), b = std::min(xl + g.dx, xi0 + U);
            if (a > b) continue;
            auto eval = [&](double xi) {
                best = std::max(best, vl + s * (xi - xl) - lambda * fast_pow(std::abs(xi - xi0), p_));
            };
            eval(a);
            eval(b);
            if (s != 0.0)
                eval(std::clamp(xi0 + std::copysign(fast_pow(std::abs(s) / (lambda * p_), rp1_), s), a, b));
        }
        return best;
    }

private:
    const GridFunction& f_;
    double p_, rp_, rp1_;
    std::vector<double> slope_;
    double L_ = 0.0, osc_ = 0.0, max_ = 0.0;
};

double theta_window(const PenaltySpec& spec, double h, const GridFunction& f) {
    return step_window(spec, h, f.lipschitz(), f.max_value() - f.min_value());
}

double ot_window(const PenaltySpec& spec, double h, const GridFunction& f) {
    const double U = step_window(spec, h, f.lipschitz(), f.max_value() - f.min_value());
    if (std::isinf(U)) {
        const Grid& g = f.grid();
        return 2.0 * (g.xmax() - g.xmin) + 1.0;
    }
    return U;
}

void check_nodes(const GridFunction& f, std::size_t first, std::size_t last) {
    if (first > last || last >= f.size()) throw DomainError("apply_I: node range outside the grid");
}

std::vector<double> apply_ot(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                             std::size_t first, std::size_t last, const OneStepOptions& opt,
                             OneStepDiagnostics* diag) {
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    const std::size_t ref = heaviest(mu);
    const double U = ot_window(spec, h, f);
    const OtEnvelope env(f, spec.phi, h, U, opt.inner == InnerSup::nodes);
    std::vector<long> off;
    const int K = model.psi_is_identity() ? lattice_refinement(mu, g.dx, off) : 0;
    if (diag) {
        diag->window = U;
        diag->lattice_refinement = K;
        diag->argmax.clear();
    }
    std::vector<double> out;
    out.reserve(last - first + 1);
    if (K > 0) {
        const double delta = g.dx / K;
        const long kmin = static_cast<long>(first) * K + off.front();
        const long kmax = static_cast<long>(last) * K + off.back();
        std::vector<double> E(kmax - kmin + 1);
        for (long k = kmin; k <= kmax; ++k) E[k - kmin] = env(g.xmin + static_cast<double>(k) * delta);
        for (std::size_t i = first; i <= last; ++i) {
            const long c = static_cast<long>(i) * K - kmin;
            out.push_back(centred_sum(mu, ref, [&](std::size_t j) { return E[c + off[j]]; }));
        }
    } else {
        for (std::size_t i = first; i <= last; ++i) {
            const double xi = model.psi_h(h, g.x(i));
            out.push_back(centred_sum(mu, ref, [&](std::size_t j) { return env(xi + mu.point(j)); }));
        }
    }
    return out;
}

std::vector<double> apply_wasserstein(const PenaltySpec& spec, const ReferenceModel& model, double h,
                                      const GridFunction& f, std::size_t first, std::size_t last,
                                      const OneStepOptions& opt, OneStepDiagnostics* diag) {
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    const std::size_t ref = heaviest(mu);
    const double p = spec.p;
    const double lscale = std::pow(h, p - 1.0);
    const PowerEnvelope env(f, p);
    auto hpsi = [&](double A) {
        try {
            return h * power_conjugate(spec.phi, A, p);
        } catch (const DomainError&) {
            return kInf;
        }
    };
    const int N = std::max(opt.lambda_points, 2);
    std::vector<double> A(N), pen(N);
    for (int k = 0; k < N; ++k) {
        A[k] = opt.lambda_lo * std::pow(opt.lambda_hi / opt.lambda_lo, static_cast<double>(k) / (N - 1));
        pen[k] = hpsi(A[k]);
    }
    const double pen0 = hpsi(0.0);
    if (diag) {
        diag->window = 0.0;
        diag->lattice_refinement = 0;
        diag->argmax.clear();
    }
    std::vector<double> out;
    out.reserve(last - first + 1);
    for (std::size_t i = first; i <= last; ++i) {
        const double xi = model.psi_h(h, g.x(i));
        auto objective = [&](double a, double pa) {
            if (std::isinf(pa)) return kInf;
            const double lam = a / lscale;
            return centred_sum(mu, ref, [&](std::size_t j) { return env(xi + mu.point(j), lam); }) + pa;
        };
        // the objective is convex in lambda, hence unimodal along the grid: scan down from the
        // largest multiplier (narrowest windows) with stride 8, stop at the first strict increase,
        // then fill in the skipped grid points around the coarse minimum
        double best = kInf, best_a = 0.0;
        int kbest = -1;
        auto visit = [&](int k) {
            const double v = objective(A[k], pen[k]);
            if (v < best || (v == best && k < kbest)) {
                best = v;
                best_a = A[k];
                kbest = k;
            }
            return v;
        };
        const int stride = 8;
        bool rising = false;
        for (int k = N - 1; k >= 0; k -= stride) {
            const double before = best;
            if (visit(k) > before) {
                rising = true;
                break;
            }
        }
        if (kbest >= 0) {
            const int c = kbest;
            for (int k = std::max(c - stride + 1, 0); k <= std::min(c + stride - 1, N - 1); ++k)
                if (k != c) visit(k);
        }
        if (!rising || kbest == 0) {
            const double v0 = objective(0.0, pen0);
            if (v0 <= best) {
                best = v0;
                best_a = 0.0;
                kbest = -1;
            }
        }
        if (kbest >= 0) {
            const double lo = std::log(A[std::max(kbest - 1, 0)]), hi = std::log(A[std::min(kbest + 1, N - 1)]);
            const auto r = golden_maximize([&](double la) { return -objective(std::exp(la), hpsi(std::exp(la))); },
                                           lo, hi, 1e-9);
            if (-r.value < best) {
                best = -r.value;
                best_a = std::exp(r.arg);
            }
        }
        if (diag) diag->argmax.push_back(best_a);
        out.push_back(best);
    }
    return out;
}

std::vector<double> apply_martingale(const PenaltySpec& spec, const ReferenceModel& model, double h,
                                     const GridFunction& f, std::size_t first, std::size_t last,
                                     const OneStepOptions& opt, OneStepDiagnostics* diag) {
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    const std::size_t ref = heaviest(mu);
    const double tmax = theta_window(spec, h, f);
    std::vector<long> off;
    int K = model.psi_is_identity() ? lattice_refinement(mu, g.dx, off) : 0;
    const int refine = std::max(opt.theta_refine, 1);
    if (K > 0) {
        const int m = (refine + K - 1) / K;
        for (long& o : off) o *= m;
        K *= m;
    }
    const double delta = g.dx / (K > 0 ? K : refine);
    const long T = std::isinf(tmax) ? static_cast<long>(4 * g.n * (K > 0 ? K : refine))
                                    : static_cast<long>(std::floor(tmax / delta + 1e-9));
    std::vector<double> D;
    for (long t = 0; t <= T; ++t) {
        const double d = dilation_penalty(spec, h, static_cast<double>(t) * delta);
        if (std::isinf(d)) break;
        D.push_back(d);
    }
    const long Tf = static_cast<long>(D.size()) - 1;
    if (diag) {
        diag->window = static_cast<double>(Tf) * delta;
        diag->lattice_refinement = K;
        diag->argmax.clear();
    }
    std::vector<double> out;
    out.reserve(last - first + 1);
    auto scan = [&](auto&& Q) {
        double best = Q(0L), arg = 0.0;
        for (long t = 1; t <= Tf; ++t) {
            const double v = 0.5 * (Q(t) + Q(-t)) - D[t];
            if (v > best) {
                best = v;
                arg = static_cast<double>(t) * delta;
            }
        }
        if (diag) diag->argmax.push_back(arg);
        out.push_back(best);
    };
    if (K > 0) {
        const long qmin = static_cast<long>(first) * K - Tf, qmax = static_cast<long>(last) * K + Tf;
        const long fmin = qmin + off.front(), fmax = qmax + off.back();
        std::vector<double> F(fmax - fmin + 1);
        for (long k = fmin; k <= fmax; ++k) F[k - fmin] = f(g.xmin + static_cast<double>(k) * delta);
        std::vector<double> Q(qmax - qmin + 1);
        for (long k = qmin; k <= qmax; ++k)
            Q[k - qmin] = centred_sum(mu, ref, [&](std::size_t j) { return F[k + off[j] - fmin]; });
        for (std::size_t i = first; i <= last; ++i) {
            const long c = static_cast<long>(i) * K - qmin;
            scan([&](long t) { return Q[c + t]; });
        }
    } else {
        for (std::size_t i = first; i <= last; ++i) {
            const double xi = model.psi_h(h, g.x(i));
            scan([&](long t) {
                const double c = xi + static_cast<double>(t) * delta;
                return centred_sum(mu, ref, [&](std::size_t j) { return f(c + mu.point(j)); });
            });
        }
    }
    return out;
}

}  // namespace

const char* to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::ot: return "ot";
        case PenaltyKind::wasserstein: return "wasserstein";
        case PenaltyKind::mart_wasserstein: return "mart_wasserstein";
        case PenaltyKind::mart_ot: return "mart_ot";
    }
    return "?";
}

PenaltySpec PenaltySpec::ot(CostFunction phi, double h0) { return {PenaltyKind::ot, std::move(phi), 1.0, h0}; }

PenaltySpec PenaltySpec::wasserstein(double p, CostFunction phi, double h0) {
    return {PenaltyKind::wasserstein, std::move(phi), p, h0};
}

PenaltySpec PenaltySpec::mart_wasserstein(double p, CostFunction phi, double h0) {
    return {PenaltyKind::mart_wasserstein, std::move(phi), p, h0};
}

PenaltySpec PenaltySpec::mart_ot(CostFunction phi, double h0) {
    return {PenaltyKind::mart_ot, std::move(phi), 2.0, h0};
}

std::vector<std::string> PenaltySpec::basic_violations() const {
    auto out = phi.invariant_violations();
    if (phi(0.0) != 0.0) out.emplace_back("phi(0) must equal 0");
    if (!(h0 > 0.0)) out.emplace_back("h0 must be positive");
    if (kind == PenaltyKind::wasserstein && !(p > 1.0)) out.emplace_back("wasserstein: p must exceed 1");
    if (kind == PenaltyKind::mart_wasserstein && !(p > 2.0)) out.emplace_back("mart_wasserstein: p must exceed 2");
    return out;
}

std::vector<std::string> PenaltySpec::violations() const {
    auto out = basic_violations();
    if (!out.empty()) return out;
    if (kind == PenaltyKind::wasserstein && !convex_in_power(phi, 1.0 / p))
        out.emplace_back("wasserstein: v -> phi(v^(1/p)) must be convex");
    if (kind == PenaltyKind::mart_wasserstein && !convex_in_power(phi, 2.0 / p))
        out.emplace_back("mart_wasserstein: v -> phi(v^(2/p)) must be convex");
    if (kind == PenaltyKind::mart_ot) {
        const bool superquadratic = phi.closed_form() ? phi.exponent() > 2.0 : phi.tail().infinite;
        if (!superquadratic) out.emplace_back("mart_ot: phi(x) / x^2 must diverge (induced cost not superlinear)");
    }
    return out;
}

void PenaltySpec::validate() const {
    const auto v = violations();
    if (!v.empty()) throw ValidationError(std::string("penalty: ") + v.front());
}

void PenaltySpec::check_horizon(double h) const {
    if (!(h > 0.0)) throw DomainError("step h must be positive");
    if (!(h < h0)) throw HorizonError("step h must be below the validity horizon h0");
}

double PenaltySpec::band_conjugate(double x) const {
    return kind == PenaltyKind::mart_ot ? power_conjugate(phi, x, 2.0) : conjugate(phi, x);
}

double penalty_value(const PenaltySpec& spec, double h, const DiscreteMeasure& mu_h, const DiscreteMeasure& nu) {
    spec.check_horizon(h);
    if (same_measure(mu_h, nu)) return 0.0;
    const CostFunction& phi = spec.phi;
    switch (spec.kind) {
        case PenaltyKind::ot: {
            const PairCost cost = [&](double y, double z) { return h * phi(std::abs(z - y) / h); };
            if (phi.convex() && phi.finite_everywhere() && (mu_h.size() > 60 || nu.size() > 60))
                return monotone_coupling(mu_h, nu, cost).value;
            return std::max(0.0, min_cost_coupling(mu_h, nu, cost).value);
        }
        case PenaltyKind::wasserstein:
            return h * phi(wasserstein_p(mu_h, nu, spec.p) / h);
        case PenaltyKind::mart_wasserstein: {
            const double p = spec.p;
            const auto r = min_cost_martingale_coupling(mu_h, nu,
                                                        [p](double y, double z) { return std::pow(std::abs(z - y), p); });
            if (!r) return kInf;
            const double w = std::pow(std::max(r->value, 0.0), 1.0 / p);
            return h * phi(w * w / (2.0 * h));
        }
        case PenaltyKind::mart_ot: {
            const double s = std::sqrt(2.0 * h);
            const auto r = min_cost_martingale_coupling(
                mu_h, nu, [&](double y, double z) { return h * phi(std::abs(z - y) / s); });
            if (!r) return kInf;
            return std::max(0.0, r->value);
        }
    }
    return kInf;
}

double step_window(const PenaltySpec& spec, double h, double lipschitz, double oscillation) {
    if (!(lipschitz > 0.0) || !(oscillation > 0.0)) return 0.0;
    const auto& phi = spec.phi;
    switch (spec.kind) {
        case PenaltyKind::ot:
        case PenaltyKind::wasserstein:
            return h * std::min(growth_radius(phi, lipschitz, 1.0, 0.0), growth_radius(phi, 0.0, 1.0, oscillation / h));
        case PenaltyKind::mart_wasserstein: {
            double th = std::sqrt(2.0 * h * growth_radius(phi, 0.0, 1.0, oscillation / h));
            if (phi.convex()) {
                // theta -> D(theta) / theta is nondecreasing, so {D(theta) <= L theta} is an interval
                auto inside = [&](double x) { return dilation_penalty(spec, h, x) <= lipschitz * x; };
                double lo = 0.0, hi = std::sqrt(h);
                while (inside(hi) && hi < th) {
                    lo = hi;
                    hi *= 2.0;
                }
                if (!inside(hi)) {
                    for (int k = 0; k < 100 && hi - lo > 1e-12 * hi; ++k) {
                        const double mid = 0.5 * (lo + hi);
                        (inside(mid) ? lo : hi) = mid;
                    }
                    th = std::min(th, hi);
                }
            }
            return th;
        }
        case PenaltyKind::mart_ot: {
            const double s = std::sqrt(2.0 * h);
            return s * std::min(growth_radius(phi, 0.0, 1.0, oscillation / h),
                                growth_radius(phi, lipschitz * s / h, 1.0, 0.0));
        }
    }
    return kInf;
}

double dilation_penalty(const PenaltySpec& spec, double h, double theta) {
    theta = std::abs(theta);
    if (spec.kind == PenaltyKind::mart_wasserstein) return h * spec.phi(theta * theta / (2.0 * h));
    return h * spec.phi(theta / std::sqrt(2.0 * h));
}

DiscreteMeasure reference_law(const ReferenceModel& model, double h, const Grid& grid) {
    return discretize_mu(model, h, grid.dx);
}

std::vector<double> apply_I_nodes(const PenaltySpec& spec, const ReferenceModel& model, double h,
                                  const GridFunction& f, std::size_t first, std::size_t last,
                                  const OneStepOptions& options, OneStepDiagnostics* diag) {
    spec.check_horizon(h);
    spec.validate();
    model.validate();
    check_nodes(f, first, last);
    switch (spec.kind) {
        case PenaltyKind::ot: return apply_ot(spec, model, h, f, first, last, options, diag);
        case PenaltyKind::wasserstein: return apply_wasserstein(spec, model, h, f, first, last, options, diag);
        default: return apply_martingale(spec, model, h, f, first, last, options, diag);
    }
}

GridFunction apply_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                     const OneStepOptions& options, OneStepDiagnostics* diag) {
    auto v = apply_I_nodes(spec, model, h, f, 0, f.size() - 1, options, diag);
    double bound = 0.0;
    for (double x : v) bound = std::max(bound, std::abs(x));
    return GridFunction(f.grid(), std::move(v), bound);
}

GridFunction brute_force_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                           const std::vector<DiscreteMeasure>& candidates) {
    spec.check_horizon(h);
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    if (candidates.empty()) throw ValidationError("brute_force_I: candidate list is empty");
    if (std::none_of(candidates.begin(), candidates.end(), [&](const auto& c) { return same_measure(c, mu); }))
        throw ValidationError("brute_force_I: candidate list must contain mu_h");
    std::vector<double> pen;
    std::vector<std::size_t> refs;
    for (const auto& c : candidates) {
        pen.push_back(penalty_value(spec, h, mu, c));
        refs.push_back(heaviest(c));
    }
    std::vector<double> out(g.n);
    double bound = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double xi = model.psi_h(h, g.x(i));
        double best = -kInf;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (std::isinf(pen[c])) continue;
            const auto& nu = candidates[c];
            best = std::max(best, centred_sum(nu, refs[c], [&](std::size_t j) { return f(xi + nu.point(j)); }) - pen[c]);
        }
        out[i] = best;
        bound = std::max(bound, std::abs(best));
    }
    return GridFunction(g, std::move(out), bound);
}

double ot_marginal_lp_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                        std::size_t node) {
    if (spec.kind != PenaltyKind::ot) throw ValidationError("ot_marginal_lp_I: ot kind required");
    spec.check_horizon(h);
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    const double xi = model.psi_h(h, g.x(node));
    // variables pi(j, k): atom j sends mass to grid node k (finite cost only)
    std::vector<std::pair<std::size_t, std::size_t>> var;
    std::vector<double> gain;
    for (std::size_t j = 0; j < mu.size(); ++j)
        for (std::size_t k = 0; k < g.n; ++k) {
            const double u = g.x(k) - xi - mu.point(j);
            const double c = h * spec.phi(std::abs(u) / h);
            if (std::isinf(c)) continue;
            var.emplace_back(j, k);
            gain.push_back(f[k] - c);
        }
    LpProblem lp(static_cast<int>(mu.size()), static_cast<int>(var.size()));
    for (std::size_t v = 0; v < var.size(); ++v) {
        lp.at(static_cast<int>(var[v].first), static_cast<int>(v)) = 1.0;
        lp.c[v] = -gain[v];
    }
    for (std::size_t j = 0; j < mu.size(); ++j) lp.b[j] = mu.weight(j);
    const auto r = solve_lp(lp);
    if (r.status != LpStatus::optimal) throw DomainError("ot_marginal_lp_I: LP not solved to optimality");
    return -r.value;
}

double kernel_lp_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                   std::size_t node, int targets) {
    if (!spec.martingale()) throw ValidationError("kernel_lp_I: martingale kind required");
    const Grid& g = f.grid();
    const auto mu = reference_law(model, h, g);
    if (mu.size() > 40) throw ValidationError("kernel_lp_I: reference support exceeds 40 points");
    OneStepDiagnostics diag;
    apply_I_nodes(spec, model, h, f, node, node, {}, &diag);
    const double theta_star = diag.argmax.front();
    const double span = std::max({diag.window, theta_star, g.dx});
    const double xi = model.psi_h(h, g.x(node));
    targets = std::max(targets, 3);

    // sup over kernels with barycenter y of sum kappa(z) (f(xi + z) - cost(z - y))
    auto kernel_value = [&](double y, const std::function<double(double)>& cost) {
        std::vector<double> z;
        for (int k = 0; k < targets; ++k) z.push_back(y - span + 2.0 * span * k / (targets - 1));
        z.push_back(y - theta_star);
        z.push_back(y + theta_star);
        std::vector<double> zz, gain;
        for (double t : z) {
            const double c = cost(std::abs(t - y));
            if (std::isinf(c)) continue;
            zz.push_back(t);
            gain.push_back(f(xi + t) - c);
        }
        LpProblem lp(2, static_cast<int>(zz.size()));
        for (std::size_t k = 0; k < zz.size(); ++k) {
            lp.at(0, static_cast<int>(k)) = 1.0;
            lp.at(1, static_cast<int>(k)) = (zz[k] - y) / span;
            lp.c[k] = -gain[k];
        }
        lp.b[0] = 1.0;
        const auto r = solve_lp(lp);
        if (r.status != LpStatus::optimal) throw DomainError("kernel_lp_I: LP not solved to optimality");
        return -r.value;
    };

    if (spec.kind == PenaltyKind::mart_ot) {
        const double s = std::sqrt(2.0 * h);
        double total = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j)
            total += mu.weight(j) * kernel_value(mu.point(j), [&](double d) { return h * spec.phi(d / s); });
        return total;
    }

    // mart_wasserstein: Lagrangian relaxation of the W_p^mart budget, minimized over the multiplier
    const double p = spec.p;
    const double lscale = std::pow(2.0 * h, p / 2.0) / h;
    auto objective = [&](double A) {
        double pen;
        try {
            pen = h * power_conjugate(spec.phi, A, p / 2.0);
        } catch (const DomainError&) {
            return kInf;
        }
        const double lam = A / lscale;
        double total = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j)
            total += mu.weight(j) * kernel_value(mu.point(j), [&](double d) { return lam * std::pow(d, p); });
        return total + pen;
    };
    const int N = 60;
    double best = objective(0.0);
    int kbest = -1;
    std::vector<double> A(N);
    for (int k = 0; k < N; ++k) {
        A[k] = 1e-4 * std::pow(1e8, static_cast<double>(k) / (N - 1));
        const double v = objective(A[k]);
        if (v < best) {
            best = v;
            kbest = k;
        }
    }
    if (kbest >= 0) {
        const auto r = golden_maximize([&](double la) { return -objective(std::exp(la)); },
                                       std::log(A[std::max(kbest - 1, 0)]), std::log(A[std::min(kbest + 1, N - 1)]),
                                       1e-8);
        best = std::min(best, -r.value);
    }
    return best;
}

}  // namespace riskgen
