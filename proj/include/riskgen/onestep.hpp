#pragma once

#include <string>
#include <vector>

#include "riskgen/conjugate.hpp"
#include "riskgen/grid.hpp"
#include "riskgen/measures.hpp"
#include "riskgen/reference.hpp"

namespace riskgen {

enum class PenaltyKind { ot, wasserstein, mart_wasserstein, mart_ot };

const char* to_string(PenaltyKind kind);

/**
 * @brief One of the four transport penalty families with validity horizon h0.
 *
 * ot:               h phi(|z - y| / h) integrated against an optimal coupling
 * wasserstein:      h phi(W_p(mu_h, nu) / h)
 * mart_wasserstein: h phi(W_p^mart(mu_h, nu)^2 / (2h)), +inf without a martingale coupling
 * mart_ot:          h phi(|z - y| / sqrt(2h)) against an optimal martingale coupling
 */
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::ot;
    CostFunction phi = CostFunction::quadratic(1.0);
    double p = 2.0;
    double h0 = 1.0;

    static PenaltySpec ot(CostFunction phi, double h0 = 1.0);
    static PenaltySpec wasserstein(double p, CostFunction phi, double h0 = 1.0);
    static PenaltySpec mart_wasserstein(double p, CostFunction phi, double h0 = 1.0);
    static PenaltySpec mart_ot(CostFunction phi, double h0 = 1.0);

    bool martingale() const { return kind == PenaltyKind::mart_wasserstein || kind == PenaltyKind::mart_ot; }

    // phi(0) = 0 and the cost-function invariants
    std::vector<std::string> basic_violations() const;
    // basic checks plus superlinearity of the induced cost and the convexity hypotheses
    std::vector<std::string> violations() const;
    void validate() const;
    // HorizonError unless 0 < h < h0
    void check_horizon(double h) const;

    // c*(L) for first-order kinds and mart_wasserstein; sup_x (M x^2 - phi(x)) for mart_ot
    double band_conjugate(double slope_or_curvature) const;
};

double penalty_value(const PenaltySpec& spec, double h, const DiscreteMeasure& mu_h, const DiscreteMeasure& nu);

enum class InnerSup {
    // sup over the piecewise-linear interpolant (production path)
    interpolant,
    // sup over grid nodes only
    nodes
};

struct OneStepOptions {
    InnerSup inner = InnerSup::interpolant;
    int lambda_points = 200;
    double lambda_lo = 1e-4;
    double lambda_hi = 1e4;
    // theta grid step is at most dx / theta_refine
    int theta_refine = 4;
};

struct OneStepDiagnostics {
    // wasserstein: optimal scaled multiplier A = lambda h^(p-1); martingale kinds: optimal theta
    std::vector<double> argmax;
    // half-width of the inner search window
    double window = 0.0;
    // lattice refinement used for memoization (0 when evaluated directly)
    int lattice_refinement = 0;
};

// (I_h f)(x) = sup_nu (int f(psi_h(x) + z) nu(dz) - alpha_h(nu)) on every grid node
GridFunction apply_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                     const OneStepOptions& options = {}, OneStepDiagnostics* diag = nullptr);

// same, restricted to nodes first..last (inclusive)
std::vector<double> apply_I_nodes(const PenaltySpec& spec, const ReferenceModel& model, double h,
                                  const GridFunction& f, std::size_t first, std::size_t last,
                                  const OneStepOptions& options = {}, OneStepDiagnostics* diag = nullptr);

// finite-candidate lower bound; candidates are increment laws and must contain mu_h
GridFunction brute_force_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                           const std::vector<DiscreteMeasure>& candidates);

// ot kind: joint LP over couplings with first marginal mu_h and targets on grid nodes
double ot_marginal_lp_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                        std::size_t node);

// martingale kinds: per-source-point kernel LPs on a uniform target grid (mu_h support <= 40)
double kernel_lp_I(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                   std::size_t node, int targets = 81);

// the increment law used by apply_I (lattice-aligned for Gaussian models)
DiscreteMeasure reference_law(const ReferenceModel& model, double h, const Grid& grid);

// largest shift (first-order kinds) or dilation theta (martingale kinds) that can beat the reference law
// for an L-Lipschitz f with the given oscillation; +inf when no bound is available
double step_window(const PenaltySpec& spec, double h, double lipschitz, double oscillation);

// dilation-family penalty alpha_h(mu_h * B^theta)
double dilation_penalty(const PenaltySpec& spec, double h, double theta);

}  // namespace riskgen
