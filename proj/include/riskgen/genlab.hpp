#pragma once

#include <vector>

#include "riskgen/grid.hpp"
#include "riskgen/onestep.hpp"
#include "riskgen/reference.hpp"

namespace riskgen {

enum class GeneratorOrder { first, second };

/// g_h / h (first order) or G_h / h (second order) tabulated over a list of steps.
struct GeneratorEstimate {
    GeneratorOrder order = GeneratorOrder::first;
    std::vector<double> h;
    // m-grid or a-grid
    std::vector<double> args;
    // scaled[k][j] = g_{h_k}(args[j]) / h_k
    std::vector<std::vector<double>> scaled;
    // closed-form limit per argument (+inf where the limit is infinite); empty when unknown
    std::vector<double> analytic;
    // cauchy[k] = max_j |scaled[k][j] - scaled[k-1][j]|, cauchy[0] = 0
    std::vector<double> cauchy;
    // slopes of the last row nondecreasing within 1e-8
    bool convex = true;
    // last row nondecreasing (second order only)
    bool monotone = true;
};

// sup over shifts b of m b - alpha_h(mu_h shifted by b); first-order kinds only
double compute_g_h(const PenaltySpec& spec, const ReferenceModel& model, double h, double m);

// sup over theta >= 0 of a theta^2 / 2 - alpha_h(mu_h * B^theta); martingale kinds only
double compute_G_h(const PenaltySpec& spec, const ReferenceModel& model, double h, double a);

// phi*(m), phi*(|m|), phi*(a+) or sup_x (a x^2 - phi(x)); +inf when the sup diverges
double analytic_limit(const PenaltySpec& spec, double arg);

// sup over nodes |x| <= R of |I_h f - P_h f - g_h(f')| / h
double generator_residual_first(const PenaltySpec& spec, const ReferenceModel& model, double h, const GridFunction& f,
                                const GridFunction& gradient, double R);

// sup over nodes |x| <= R of |I_h f - P_h f - G_h(f'')| / h
double generator_residual_second(const PenaltySpec& spec, const ReferenceModel& model, double h,
                                 const GridFunction& f, const GridFunction& hessian, double R);

GeneratorEstimate limit_profile(const PenaltySpec& spec, const ReferenceModel& model, const std::vector<double>& h,
                                const std::vector<double>& args);

}  // namespace riskgen
