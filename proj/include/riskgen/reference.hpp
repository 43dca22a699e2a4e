#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riskgen/grid.hpp"
#include "riskgen/measures.hpp"

namespace riskgen {

/// Lipschitz drift F: zero, linear F(x) = slope x, or a tabulated interpolant.
class Drift {
public:
    enum class Kind { zero, linear, tabulated };

    static Drift zero() { return Drift(); }
    static Drift linear(double slope);
    static Drift tabulated(GridFunction table);

    Kind kind() const { return kind_; }
    double operator()(double x) const;
    double lipschitz() const;
    // sup |F| over [lo, hi]
    double sup_abs(double lo, double hi) const;
    bool is_zero() const { return kind_ == Kind::zero || (kind_ == Kind::linear && slope_ == 0.0); }

private:
    Kind kind_ = Kind::zero;
    double slope_ = 0.0;
    std::optional<GridFunction> table_;
};

struct GaussianIncrements {
    double s0 = 1.0;
};

// driftless compound Poisson increments with rate lambda and jump law
struct CompoundPoissonIncrements {
    double rate = 1.0;
    DiscreteMeasure jumps;
};

// mu_h = base scaled by h
struct ScaledFixedIncrements {
    DiscreteMeasure base;
};

using IncrementFamily = std::variant<GaussianIncrements, CompoundPoissonIncrements, ScaledFixedIncrements>;

enum class PsiScheme { identity, euler };

struct Truncation {
    // half-width of the Gaussian window in standard deviations
    double half_width = 6.0;
    // quantization step in standard deviations
    double relative_step = 0.02;
};

struct ReferenceModel {
    Drift drift;
    IncrementFamily increments = GaussianIncrements{};
    PsiScheme psi = PsiScheme::identity;
    Truncation truncation;

    double psi_h(double h, double x) const;
    bool psi_is_identity() const { return psi == PsiScheme::identity || drift.is_zero(); }
    bool gaussian() const { return std::holds_alternative<GaussianIncrements>(increments); }
    // diffusion coefficient s0 (0 for pure-jump and scaled-fixed families)
    double s0() const;
    // throws ValidationError on inconsistent settings
    void validate() const;
};

/**
 * @brief Quantized increment law mu_h.
 *
 * When `lattice` > 0 the Gaussian step is shrunk to lattice / k for the
 * smallest integer k not exceeding the nominal step, so that atoms sit on a
 * refinement of the spatial grid.
 */
DiscreteMeasure discretize_mu(const ReferenceModel& model, double h, double lattice = 0.0);

// (P_h f)(x) = sum_y f(psi_h(x) + y) mu_h({y})
GridFunction apply_P(const ReferenceModel& model, double h, const GridFunction& f);
GridFunction apply_P(const DiscreteMeasure& mu, const ReferenceModel& model, double h, const GridFunction& f);

struct ConditionRow {
    double h = 0.0;
    double m_quotient = 0.0;
    std::vector<double> tail_quotients;
    double mass_outside = 0.0;
    double d_violation = 0.0;
};

struct ConditionVerdict {
    bool pass = false;
    std::string note;
};

struct ConditionReport {
    std::vector<double> tail_levels;
    double mass_radius = 0.0;
    std::vector<ConditionRow> rows;
    ConditionVerdict a, m, t, d;
    std::string label = "numerical evidence";
};

struct ConditionOptions {
    std::vector<double> tail_levels{1.0, 2.0, 5.0};
    double mass_radius = 0.1;
    // offsets |u| <= d_offset and sample points in [-d_range, d_range] for the Euler check
    double d_offset = 0.5;
    double d_range = 5.0;
    double slack = 0.1;
};

ConditionReport validate_conditions(const ReferenceModel& model, const std::vector<double>& h_list,
                                    const ConditionOptions& options = {});

}  // namespace riskgen
