#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "riskgen/conjugate.hpp"
#include "riskgen/genlab.hpp"
#include "riskgen/grid.hpp"
#include "riskgen/onestep.hpp"
#include "riskgen/reference.hpp"

namespace riskgen {

/// Hamiltonian sampled on a uniform argument grid; linear in between and beyond the ends.
class SampledHamiltonian {
public:
    SampledHamiltonian() = default;
    SampledHamiltonian(double lo, double step, std::vector<double> values);

    static SampledHamiltonian sample(const std::function<double(double)>& fn, double lo, double hi, std::size_t count);
    // analytic generator limit of the penalty on [lo, hi]; DomainError where it is infinite
    static SampledHamiltonian from_penalty(const PenaltySpec& spec, double lo, double hi, std::size_t count);

    double operator()(double x) const;
    double lipschitz() const;
    bool convex(double tol = 1e-12) const;
    bool nondecreasing(double tol = 1e-12) const;
    double lo() const { return lo_; }
    double hi() const { return lo_ + step_ * static_cast<double>(values_.size() - 1); }

private:
    double lo_ = 0.0, step_ = 1.0;
    std::vector<double> values_;
};

struct HjbProblem {
    GeneratorOrder order = GeneratorOrder::first;
    // g on an m-grid (first order) or G on an a-grid (second order)
    SampledHamiltonian hamiltonian;
    ReferenceModel model;
    GridFunction terminal;
    double t = 0.0;
    // 0 selects t / ceil(t * rate / 0.9)
    double dtau = 0.0;
};

// explicit-scheme rate: dtau * rate <= 1 keeps every stencil weight nonnegative
double hjb_rate(const HjbProblem& problem);

// u_tau = (s0/2) u_xx + F u_x + jump term + g(u_x) or G(u_xx), u(0) = terminal; returns u(t)
GridFunction hjb_solve(const HjbProblem& problem);

// (s0/gamma) log E exp((gamma/s0) f(x + sqrt(s0 t) Z)), Z standard normal quantized on [-8, 8] with step 1e-3
GridFunction entropic_oracle(double s0, double gamma, double t, const GridFunction& f);
// rejects models that are not Gaussian with zero drift
GridFunction entropic_oracle(const ReferenceModel& model, double gamma, double t, const GridFunction& f);

struct GateScenario {
    double s0 = 1.0;
    double gamma = 1.0;
    double t = 0.5;
    // sup |entropic - hjb| on |x| <= 2
    double error = 0.0;
};

struct EntropicGate {
    std::vector<GateScenario> scenarios;
    double tolerance = 1e-2;
    bool pass = false;
};

// two fixed scenarios (sine and bump terminals) compared against the first-order HJB solver
EntropicGate entropic_gate();

// E f(x + sigma Z) for the piecewise-linear interpolant of f (constant extension), exact up to erfc
std::vector<double> heat_values(const GridFunction& f, double variance);

struct VarianceScanOptions {
    int points = 400;
    // nodes with |x| > radius carry the v = 0 (plain heat) value and argmax 0
    double radius = std::numeric_limits<double>::infinity();
};

struct VarianceScan {
    GridFunction value;
    // maximizing constant variance control per node
    std::vector<double> argmax;
    double v_max = 0.0;
};

// max over constant v >= 0 of heat(f, (s0 + 2v) t)(x) - t phi(v); f must be convex on the grid
VarianceScan variance_scan_oracle(double s0, const CostFunction& phi, double t, const GridFunction& f,
                                  const VarianceScanOptions& options = {});

struct MonteCarloOptions {
    std::size_t paths = 10000;
    int steps = 50;
    // required
    std::optional<std::uint64_t> seed;
    std::vector<double> points;
};

struct MonteCarloEstimate {
    std::vector<double> points;
    // best control's mean of f(X_t) - int phi(|beta|) ds, per point
    std::vector<double> value;
    std::vector<double> std_error;
    std::vector<std::size_t> best_control;
    // zero-control mean per point when a control is identically zero, else empty
    std::vector<double> zero_value;
};

/**
 * @brief Monte Carlo values of Markov feedback drift controls.
 *
 * Each control beta(x) is sampled on a grid. Paths use Euler-Maruyama, plus
 * Poisson jump counts per step for compound-Poisson models. All controls and
 * points share the same noise.
 */
MonteCarloEstimate mc_drift_lower_bound(const ReferenceModel& model, const CostFunction& phi, double t,
                                        const GridFunction& f, const std::vector<GridFunction>& controls,
                                        const MonteCarloOptions& options);

}  // namespace riskgen
