#include "riskgen/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "riskgen/errors.hpp"
#include "riskgen/optimize.hpp"
#include "riskgen/testfn.hpp"

namespace riskgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

SampledHamiltonian::SampledHamiltonian(double lo, double step, std::vector<double> values)
    : lo_(lo), step_(step), values_(std::move(values)) {
    if (!(step_ > 0.0)) throw ValidationError("hamiltonian: step must be positive");
    if (values_.size() < 2) throw ValidationError("hamiltonian: need at least two samples");
    for (double v : values_)
        if (!std::isfinite(v)) throw ValidationError("hamiltonian: samples must be finite");
}

SampledHamiltonian SampledHamiltonian::sample(const std::function<double(double)>& fn, double lo, double hi,
                                              std::size_t count) {
    if (!(hi > lo) || count < 2) throw ValidationError("hamiltonian: need hi > lo and count >= 2");
    const double step = (hi - lo) / static_cast<double>(count - 1);
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) v[k] = fn(lo + step * static_cast<double>(k));
    return SampledHamiltonian(lo, step, std::move(v));
}

SampledHamiltonian SampledHamiltonian::from_penalty(const PenaltySpec& spec, double lo, double hi,
                                                    std::size_t count) {
    return sample(
        [&](double x) {
            const double v = analytic_limit(spec, x);
            if (std::isinf(v)) throw DomainError("hamiltonian: generator limit is infinite inside the sampled range");
            return v;
        },
        lo, hi, count);
}

double SampledHamiltonian::operator()(double x) const {
    const double s = (x - lo_) / step_;
    const std::size_t last = values_.size() - 1;
    std::size_t i;
    if (s <= 0.0)
        i = 0;
    else if (s >= static_cast<double>(last))
        i = last - 1;
    else
        i = std::min(static_cast<std::size_t>(s), last - 1);
    const double w = s - static_cast<double>(i);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

double SampledHamiltonian::lipschitz() const {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) L = std::max(L, std::abs(values_[i + 1] - values_[i]));
    return L / step_;
}

bool SampledHamiltonian::convex(double tol) const {
    for (std::size_t i = 1; i + 1 < values_.size(); ++i)
        if (values_[i + 1] - 2.0 * values_[i] + values_[i - 1] < -tol * (1.0 + std::abs(values_[i]))) return false;
    return true;
}

bool SampledHamiltonian::nondecreasing(double tol) const {
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
        if (values_[i + 1] < values_[i] - tol) return false;
    return true;
}

namespace {

// central differences are monotone for the first-order term only while s0 dominates the Hamiltonian slope
bool central_first_order(const HjbProblem& p) {
    return p.model.s0() > 0.0 && p.hamiltonian.lipschitz() * p.terminal.grid().dx <= p.model.s0();
}

double jump_rate(const ReferenceModel& m) {
    if (const auto* c = std::get_if<CompoundPoissonIncrements>(&m.increments)) return c->rate;
    return 0.0;
}

void check_problem(const HjbProblem& p) {
    if (!(p.t > 0.0)) throw DomainError("hjb_solve: horizon must be positive");
    if (std::holds_alternative<ScaledFixedIncrements>(p.model.increments))
        throw ValidationError("hjb_solve: reference model must be Gaussian or compound Poisson");
    p.model.validate();
    if (p.terminal.size() < 3) throw ValidationError("hjb_solve: terminal needs at least three nodes");
    if (!p.hamiltonian.convex(1e-9)) throw ValidationError("hjb_solve: Hamiltonian samples are not convex");
    if (p.order == GeneratorOrder::second && !p.hamiltonian.nondecreasing(1e-12))
        throw ValidationError("hjb_solve: second-order Hamiltonian must be nondecreasing");
}

}  // namespace

double hjb_rate(const HjbProblem& p) {
    const Grid& g = p.terminal.grid();
    const double dx = g.dx, s0 = p.model.s0(), lip = p.hamiltonian.lipschitz();
    double rate = p.model.drift.sup_abs(g.xmin, g.xmax()) / dx + jump_rate(p.model);
    if (p.order == GeneratorOrder::second) return rate + (s0 + 2.0 * lip) / (dx * dx);
    return rate + s0 / (dx * dx) + (central_first_order(p) ? 1.0 : 2.0) * lip / dx;
}

GridFunction hjb_solve(const HjbProblem& p) {
    check_problem(p);
    const Grid& g = p.terminal.grid();
    const std::size_t n = g.n;
    const double dx = g.dx, s0 = p.model.s0();
    const double rate = hjb_rate(p);
    double dtau = p.dtau;
    long steps;
    if (dtau > 0.0) {
        if (dtau * rate > 0.9) {
            std::ostringstream msg;
            msg << "hjb_solve: CFL violated, dtau * rate = " << dtau * rate << " > 0.9";
            throw ValidationError(msg.str());
        }
        steps = std::lround(p.t / dtau);
        if (std::abs(steps * dtau - p.t) > 1e-9 * p.t) throw ValidationError("hjb_solve: dtau must divide t");
    } else {
        steps = static_cast<long>(std::ceil(p.t * rate / 0.9));
        steps = std::max(steps, 1L);
        dtau = p.t / static_cast<double>(steps);
    }

    std::vector<double> F(n);
    for (std::size_t i = 0; i < n; ++i) F[i] = p.model.drift(g.x(i));

    // jump quadrature: node i, atom j -> interpolation index and weight (constant extension)
    const double lam = jump_rate(p.model);
    std::vector<std::size_t> jidx;
    std::vector<double> jfrac, jw;
    std::size_t natoms = 0;
    if (const auto* c = std::get_if<CompoundPoissonIncrements>(&p.model.increments)) {
        natoms = c->jumps.size();
        jidx.resize(n * natoms);
        jfrac.resize(n * natoms);
        jw = c->jumps.weights();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < natoms; ++j) {
                const double s = std::clamp((g.x(i) + c->jumps.point(j) - g.xmin) / dx, 0.0,
                                            static_cast<double>(n - 1));
                const std::size_t k = std::min(static_cast<std::size_t>(s), n - 2);
                jidx[i * natoms + j] = k;
                jfrac[i * natoms + j] = s - static_cast<double>(k);
            }
    }

    const bool central = central_first_order(p);
    const auto& H = p.hamiltonian;
    // Engquist-Osher split around the minimiser of g when central differences are not monotone
    double mstar = 0.0;
    if (p.order == GeneratorOrder::first && !central)
        mstar = golden_maximize([&](double m) { return -H(m); }, H.lo(), H.hi(), 1e-12).arg;

    std::vector<double> u = p.terminal.values(), next(n);
    for (long s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            // Neumann: ghost nodes copy the end values
            const double ul = u[i == 0 ? 0 : i - 1], uc = u[i], ur = u[i + 1 < n ? i + 1 : n - 1];
            double d = 0.5 * s0 * (ur - 2.0 * uc + ul) / (dx * dx);
            if (F[i] > 0.0)
                d += F[i] * (ur - uc) / dx;
            else
                d += F[i] * (uc - ul) / dx;
            if (natoms > 0) {
                double e = 0.0;
                for (std::size_t j = 0; j < natoms; ++j) {
                    const std::size_t k = jidx[i * natoms + j];
                    const double w = jfrac[i * natoms + j];
                    e += jw[j] * (u[k] + w * (u[k + 1] - u[k]));
                }
                d += lam * (e - uc);
            }
            if (p.order == GeneratorOrder::second) {
                d += H((ur - 2.0 * uc + ul) / (dx * dx));
            } else if (central) {
                d += H((ur - ul) / (2.0 * dx));
            } else {
                const double pm = (uc - ul) / dx, pp = (ur - uc) / dx;
                d += H(std::max(pp, mstar)) + H(std::min(pm, mstar)) - H(mstar);
            }
            next[i] = uc + dtau * d;
        }
        u.swap(next);
    }
    return GridFunction(g, std::move(u));
}

GridFunction entropic_oracle(double s0, double gamma, double t, const GridFunction& f) {
    if (!(s0 > 0.0) || !(gamma > 0.0) || !(t > 0.0))
        throw DomainError("entropic_oracle: s0, gamma and t must be positive");
    constexpr double dz = 1e-3, zmax = 8.0;
    const long K = std::lround(zmax / dz);
    std::vector<double> z, w;
    double total = 0.0;
    for (long k = -K; k <= K; ++k) {
        const double zk = dz * static_cast<double>(k);
        const double wk = normal_sf(zk - 0.5 * dz) - normal_sf(zk + 0.5 * dz);
        z.push_back(zk);
        w.push_back(wk);
        total += wk;
    }
    const double sd = std::sqrt(s0 * t), k = gamma / s0;
    std::vector<double> out(f.size()), vals(z.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double top = -kInf;
        for (std::size_t j = 0; j < z.size(); ++j) {
            vals[j] = f(f.x(i) + sd * z[j]);
            top = std::max(top, vals[j]);
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) acc += w[j] * std::exp(k * (vals[j] - top));
        out[i] = top + std::log(acc / total) / k;
    }
    return GridFunction(f.grid(), std::move(out));
}

GridFunction entropic_oracle(const ReferenceModel& model, double gamma, double t, const GridFunction& f) {
    if (!model.gaussian()) throw ValidationError("entropic_oracle: Gaussian reference model required");
    if (!model.drift.is_zero()) throw ValidationError("entropic_oracle: drift must be zero");
    return entropic_oracle(model.s0(), gamma, t, f);
}

EntropicGate entropic_gate() {
    EntropicGate gate;
    const Grid g(-8, 8, 0.02);
    struct Case {
        double s0, gamma, t;
        TestFunction f;
    };
    const Case cases[] = {{1.0, 1.0, 0.5, TestFunction::sine(1.0)}, {0.5, 2.0, 0.25, TestFunction::bump(0.0, 0.5, 1.0)}};
    gate.pass = true;
    for (const auto& c : cases) {
        const auto f = c.f.on(g);
        ReferenceModel m;
        m.increments = GaussianIncrements{c.s0};
        const double M = 2.0 * c.f.lipschitz() + 1.0;
        HjbProblem prob;
        prob.hamiltonian = SampledHamiltonian::sample([&](double x) { return 0.5 * c.gamma * x * x; }, -M, M, 801);
        prob.model = m;
        prob.terminal = f;
        prob.t = c.t;
        const double err = sup_distance(entropic_oracle(m, c.gamma, c.t, f), hjb_solve(prob), 2.0);
        gate.scenarios.push_back({c.s0, c.gamma, c.t, err});
        if (!(err <= gate.tolerance)) gate.pass = false;
    }
    return gate;
}

namespace {

// r[j + J] = E clamp((sigma Z - j dx) / dx, 0, 1) for |j| <= J
std::vector<double> ramp_weights(double sigma, double dx, long J) {
    auto psi = [&](double c) {  // E (sigma Z - c)^+
        const double d = c / sigma;
        return sigma * normal_pdf(d) - c * normal_sf(d);
    };
    std::vector<double> r(2 * J + 1);
    for (long j = -J; j <= J; ++j) {
        const double c = static_cast<double>(j) * dx;
        r[j + J] = std::clamp((psi(c) - psi(c + dx)) / dx, 0.0, 1.0);
    }
    return r;
}

long ramp_span(double sigma, double dx) { return static_cast<long>(std::ceil(9.0 * sigma / dx)) + 1; }

double heat_at(const std::vector<double>& f, std::size_t i, const std::vector<double>& r, long J) {
    const long n = static_cast<long>(f.size());
    const long ii = static_cast<long>(i);
    const long k0 = std::max(ii - J, 0L), k1 = std::min(ii + J, n - 2);
    double v = f[k0];
    for (long k = k0; k <= k1; ++k) v += (f[k + 1] - f[k]) * r[k - ii + J];
    return v;
}

}  // namespace

std::vector<double> heat_values(const GridFunction& f, double variance) {
    if (variance < 0.0) throw DomainError("heat_values: variance must be nonnegative");
    if (variance == 0.0 || f.size() < 2) return f.values();
    const double sigma = std::sqrt(variance), dx = f.grid().dx;
    const long J = ramp_span(sigma, dx);
    const auto r = ramp_weights(sigma, dx, J);
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = heat_at(f.values(), i, r, J);
    return out;
}

VarianceScan variance_scan_oracle(double s0, const CostFunction& phi, double t, const GridFunction& f,
                                  const VarianceScanOptions& options) {
    if (!(t > 0.0) || !(s0 >= 0.0)) throw DomainError("variance_scan_oracle: need t > 0 and s0 >= 0");
    if (!f.convex(1e-12)) throw ValidationError("variance_scan_oracle: terminal is not convex on its window");
    if (options.points < 2) throw ValidationError("variance_scan_oracle: need at least 2 scan points");
    const double osc = f.max_value() - f.min_value();
    // t phi(v) > osc can never pay off
    const double v_max = osc > 0.0 ? growth_radius(phi, 0.0, 1.0, osc / t) : 0.0;
    if (std::isinf(v_max)) throw DomainError("variance_scan_oracle: phi does not bound the variance control");
    const double dx = f.grid().dx;
    const auto& fv = f.values();

    VarianceScan out;
    out.v_max = v_max;
    out.argmax.assign(f.size(), 0.0);
    std::vector<double> value = heat_values(f, s0 * t);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f.x(i)) <= options.radius + 1e-12) active.push_back(i);
    if (v_max <= 0.0 || active.empty()) {
        out.value = GridFunction(f.grid(), std::move(value));
        return out;
    }

    auto objective = [&](std::size_t i, double v) {
        const double var = (s0 + 2.0 * v) * t;
        const double pen = t * phi(v);
        if (std::isinf(pen)) return -kInf;
        if (var <= 0.0) return fv[i] - pen;
        const double sigma = std::sqrt(var);
        const long J = ramp_span(sigma, dx);
        return heat_at(fv, i, ramp_weights(sigma, dx, J), J) - pen;
    };

    const int N = options.points;
    std::vector<double> vs(N + 1);
    std::vector<double> best(active.size(), -kInf);
    std::vector<int> kbest(active.size(), 0);
    for (int k = 0; k <= N; ++k) {
        vs[k] = v_max * k / N;
        const double var = (s0 + 2.0 * vs[k]) * t;
        const double pen = t * phi(vs[k]);
        if (std::isinf(pen)) continue;
        std::vector<double> r;
        long J = 0;
        if (var > 0.0) {
            J = ramp_span(std::sqrt(var), dx);
            r = ramp_weights(std::sqrt(var), dx, J);
        }
        for (std::size_t a = 0; a < active.size(); ++a) {
            const std::size_t i = active[a];
            const double v = (var > 0.0 ? heat_at(fv, i, r, J) : fv[i]) - pen;
            if (v > best[a]) {
                best[a] = v;
                kbest[a] = k;
            }
        }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t i = active[a];
        const int k = kbest[a];
        const double lo = vs[std::max(k - 1, 0)], hi = vs[std::min(k + 1, N)];
        double arg = vs[k], val = best[a];
        if (hi > lo) {
            const auto e = golden_maximize([&](double v) { return objective(i, v); }, lo, hi, 1e-10 * (1.0 + v_max));
            if (e.value > val) {
                val = e.value;
                arg = e.arg;
            }
        }
        value[i] = val;
        out.argmax[i] = arg;
    }
    out.value = GridFunction(f.grid(), std::move(value));
    return out;
}

MonteCarloEstimate mc_drift_lower_bound(const ReferenceModel& model, const CostFunction& phi, double t,
                                        const GridFunction& f, const std::vector<GridFunction>& controls,
                                        const MonteCarloOptions& options) {
    if (!options.seed) throw ValidationError("mc_drift_lower_bound: seed is required");
    if (options.paths < 10000) throw ValidationError("mc_drift_lower_bound: paths must be at least 1e4");
    if (options.steps < 50) throw ValidationError("mc_drift_lower_bound: Euler step count must be at least 50");
    if (controls.empty()) throw ValidationError("mc_drift_lower_bound: at least one control is required");
    if (!(t > 0.0)) throw DomainError("mc_drift_lower_bound: horizon must be positive");
    if (std::holds_alternative<ScaledFixedIncrements>(model.increments))
        throw ValidationError("mc_drift_lower_bound: reference model must be Gaussian or compound Poisson");
    model.validate();

    const int S = options.steps;
    const double dt = t / S, sd = std::sqrt(model.s0() * dt);
    const auto* cp = std::get_if<CompoundPoissonIncrements>(&model.increments);
    const std::size_t P = options.points.size(), C = controls.size();

    // running cost of each control is a function of the state only; tabulate it on the control grid
    std::vector<GridFunction> cost;
    for (const auto& c : controls) {
        std::vector<double> v(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) v[i] = phi(std::abs(c[i]));
        cost.emplace_back(c.grid(), std::move(v));
    }
    // Welford accumulators
    std::vector<double> mean(P * C, 0.0), m2(P * C, 0.0);
    std::vector<double> z(S), jump(S);
    const std::uint64_t seed = *options.seed;
    for (std::size_t path = 0; path < options.paths; ++path) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        for (int s = 0; s < S; ++s) z[s] = normal(rng);
        if (cp) {
            std::poisson_distribution<int> count(cp->rate * dt);
            std::discrete_distribution<std::size_t> pick(cp->jumps.weights().begin(), cp->jumps.weights().end());
            for (int s = 0; s < S; ++s) {
                jump[s] = 0.0;
                for (int k = count(rng); k > 0; --k) jump[s] += cp->jumps.point(pick(rng));
            }
        }
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t c = 0; c < C; ++c) {
                double x = options.points[p], run = 0.0;
                for (int s = 0; s < S; ++s) {
                    run += cost[c](x) * dt;
                    x += (controls[c](x) + model.drift(x)) * dt + sd * z[s] + (cp ? jump[s] : 0.0);
                }
                const double y = f(x) - run;
                const double d = y - mean[p * C + c];
                mean[p * C + c] += d / static_cast<double>(path + 1);
                m2[p * C + c] += d * (y - mean[p * C + c]);
            }
    }

    MonteCarloEstimate out;
    out.points = options.points;
    const double np = static_cast<double>(options.paths);
    std::optional<std::size_t> zero;
    for (std::size_t c = 0; c < C; ++c)
        if (controls[c].max_value() == 0.0 && controls[c].min_value() == 0.0) {
            zero = c;
            break;
        }
    for (std::size_t p = 0; p < P; ++p) {
        std::size_t b = 0;
        for (std::size_t c = 1; c < C; ++c)
            if (mean[p * C + c] > mean[p * C + b]) b = c;
        const double var = m2[p * C + b] / (np - 1.0);
        out.value.push_back(mean[p * C + b]);
        out.std_error.push_back(std::sqrt(var / np));
        out.best_control.push_back(b);
        if (zero) out.zero_value.push_back(mean[p * C + *zero]);
    }
    return out;
}

}  // namespace riskgen
