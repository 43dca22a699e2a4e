#include "riskgen/reference.hpp"

#include <algorithm>
#include <cmath>

#include "riskgen/errors.hpp"

namespace riskgen {

Drift Drift::linear(double slope) {
    Drift d;
    d.kind_ = Kind::linear;
    d.slope_ = slope;
    return d;
}

Drift Drift::tabulated(GridFunction table) {
    Drift d;
    d.kind_ = Kind::tabulated;
    d.table_ = std::move(table);
    return d;
}

double Drift::operator()(double x) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::linear: return slope_ * x;
        case Kind::tabulated: return (*table_)(x);
    }
    return 0.0;
}

double Drift::lipschitz() const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::linear: return std::abs(slope_);
        case Kind::tabulated: return table_->lipschitz();
    }
    return 0.0;
}

double Drift::sup_abs(double lo, double hi) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::linear: return std::abs(slope_) * std::max(std::abs(lo), std::abs(hi));
        case Kind::tabulated: {
            double s = std::max(std::abs((*table_)(lo)), std::abs((*table_)(hi)));
            for (std::size_t i = 0; i < table_->size(); ++i)
                if (table_->x(i) >= lo && table_->x(i) <= hi) s = std::max(s, std::abs((*table_)[i]));
            return s;
        }
    }
    return 0.0;
}

double ReferenceModel::psi_h(double h, double x) const {
    if (psi == PsiScheme::identity) return x;
    return x + h * drift(x);
}

double ReferenceModel::s0() const {
    if (const auto* g = std::get_if<GaussianIncrements>(&increments)) return g->s0;
    return 0.0;
}

void ReferenceModel::validate() const {
    if (psi == PsiScheme::identity && !drift.is_zero())
        throw ValidationError("model: identity psi scheme requires zero drift (use euler)");
    if (const auto* g = std::get_if<GaussianIncrements>(&increments)) {
        if (!(g->s0 > 0.0)) throw ValidationError("model: gaussian s0 must be positive");
    } else if (const auto* c = std::get_if<CompoundPoissonIncrements>(&increments)) {
        if (!(c->rate > 0.0)) throw ValidationError("model: compound Poisson rate must be positive");
    }
    if (!(truncation.half_width > 0.0)) throw ValidationError("model: truncation half_width must be positive");
    if (!(truncation.relative_step > 0.0)) throw ValidationError("model: truncation relative_step must be positive");
}

namespace {

// N(0,1) mass of [a, b] with 0 <= a <= b
double normal_mass_right(double a, double b) {
    const double r = 1.0 / std::sqrt(2.0);
    return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
}

DiscreteMeasure gaussian_mu(const GaussianIncrements& g, const Truncation& tr, double h, double lattice) {
    const double sigma = std::sqrt(g.s0 * h);
    double step = tr.relative_step * sigma;
    if (lattice > 0.0) step = lattice / std::ceil(lattice / step - 1e-9);
    const double window = tr.half_width * sigma;
    const auto J = static_cast<long>(std::floor(window / step + 1e-9));
    if (J < 1) throw ValidationError("discretize_mu: truncation window narrower than one quantization step");
    std::vector<double> mass(J + 1);
    mass[0] = 2.0 * normal_mass_right(0.0, 0.5 * step / sigma);
    for (long j = 1; j <= J; ++j)
        mass[j] = normal_mass_right((j - 0.5) * step / sigma, (j + 0.5) * step / sigma);
    double total = mass[0];
    for (long j = 1; j <= J; ++j) total += 2.0 * mass[j];
    std::vector<double> p, w;
    p.reserve(2 * J + 1);
    w.reserve(2 * J + 1);
    for (long j = -J; j <= J; ++j) {
        p.push_back(static_cast<double>(j) * step);
        w.push_back(mass[std::abs(j)] / total);
    }
    double s = 0.0;
    for (double x : w) s += x;
    w[J] += 1.0 - s;
    return DiscreteMeasure(std::move(p), std::move(w));
}

DiscreteMeasure compound_poisson_mu(const CompoundPoissonIncrements& c, double h) {
    const double lh = c.rate * h;
    std::vector<double> p, w;
    DiscreteMeasure power = DiscreteMeasure::dirac(0.0);
    double pk = std::exp(-lh);
    double used = 0.0;
    std::size_t last_block = 0;
    for (int k = 0; k <= 4; ++k) {
        if (k > 0) {
            power = convolve(power, c.jumps);
            pk *= lh / k;
        }
        last_block = p.size();
        for (std::size_t i = 0; i < power.size(); ++i) {
            p.push_back(power.point(i));
            w.push_back(pk * power.weight(i));
            used += pk * power.weight(i);
        }
    }
    // remainder (five or more jumps) goes to the farthest atom of the k = 4 block
    std::size_t far = last_block;
    for (std::size_t i = last_block; i < p.size(); ++i)
        if (std::abs(p[i]) >= std::abs(p[far])) far = i;
    w[far] += 1.0 - used;
    return DiscreteMeasure::from_atoms(std::move(p), std::move(w));
}

}  // namespace

DiscreteMeasure discretize_mu(const ReferenceModel& model, double h, double lattice) {
    if (!(h > 0.0)) throw DomainError("discretize_mu: h must be positive");
    if (const auto* g = std::get_if<GaussianIncrements>(&model.increments))
        return gaussian_mu(*g, model.truncation, h, lattice);
    if (const auto* c = std::get_if<CompoundPoissonIncrements>(&model.increments)) return compound_poisson_mu(*c, h);
    const auto& s = std::get<ScaledFixedIncrements>(model.increments);
    return s.base.scaled(h);
}

GridFunction apply_P(const DiscreteMeasure& mu, const ReferenceModel& model, double h, const GridFunction& f) {
    const Grid& g = f.grid();
    std::size_t heavy = 0;
    for (std::size_t j = 1; j < mu.size(); ++j)
        if (mu.weight(j) > mu.weight(heavy)) heavy = j;
    std::vector<double> out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double xi = model.psi_h(h, g.x(i));
        // centred on one atom so that constants are reproduced exactly
        const double ref = f(xi + mu.point(heavy));
        double s = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j) s += mu.weight(j) * (f(xi + mu.point(j)) - ref);
        out[i] = ref + s;
    }
    return GridFunction(g, std::move(out), std::max(f.bound(), 0.0));
}

GridFunction apply_P(const ReferenceModel& model, double h, const GridFunction& f) {
    return apply_P(discretize_mu(model, h, f.grid().dx), model, h, f);
}

namespace {

bool nonincreasing(const std::vector<double>& v, double slack) {
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
        if (v[k + 1] > (1.0 + slack) * v[k] + 1e-12) return false;
    return true;
}

}  // namespace

ConditionReport validate_conditions(const ReferenceModel& model, const std::vector<double>& h_list,
                                    const ConditionOptions& opt) {
    for (std::size_t k = 0; k + 1 < h_list.size(); ++k)
        if (!(h_list[k + 1] < h_list[k])) throw ValidationError("validate_conditions: h list must be decreasing");
    ConditionReport rep;
    rep.tail_levels = opt.tail_levels;
    rep.mass_radius = opt.mass_radius;
    const double omega = model.drift.lipschitz();
    for (double h : h_list) {
        const DiscreteMeasure mu = discretize_mu(model, h);
        ConditionRow row;
        row.h = h;
        double sq = 0.0, first = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j) {
            const double y = mu.point(j), w = mu.weight(j);
            sq += w * std::min(1.0, y * y);
            if (std::abs(y) <= 1.0) first += w * y;
            if (std::abs(y) > opt.mass_radius) row.mass_outside += w;
        }
        row.m_quotient = (sq + std::abs(first)) / h;
        for (double M : opt.tail_levels) {
            double t = 0.0;
            for (std::size_t j = 0; j < mu.size(); ++j)
                if (std::abs(mu.point(j)) > M) t += mu.weight(j);
            row.tail_quotients.push_back(t / h);
        }
        const int nx = 101, nu = 20;
        for (int a = 0; a < nx; ++a) {
            const double x = -opt.d_range + 2.0 * opt.d_range * a / (nx - 1);
            for (int b = -nu; b <= nu; ++b) {
                const double u = opt.d_offset * b / nu;
                const double lhs = std::abs(model.psi_h(h, x + u) - model.psi_h(h, x) - u) / h;
                row.d_violation = std::max(row.d_violation, lhs - omega * std::abs(u));
            }
        }
        rep.rows.push_back(std::move(row));
    }

    std::vector<double> masses, mq;
    for (const auto& r : rep.rows) {
        masses.push_back(r.mass_outside);
        mq.push_back(r.m_quotient);
    }
    const bool shrinking = masses.empty() || masses.back() <= masses.front() + 1e-15;
    rep.a.pass = nonincreasing(masses, opt.slack) && shrinking;
    rep.a.note = "mass outside |y| <= " + std::to_string(opt.mass_radius) + (rep.a.pass ? " shrinks" : " does not shrink") +
                 " as h decreases";
    bool finite = true;
    for (double q : mq) finite = finite && std::isfinite(q);
    rep.m.pass = finite && nonincreasing(mq, opt.slack);
    rep.m.note = rep.m.pass ? "(M)-quotient bounded along the h list" : "(M)-quotient grows as h decreases";
    rep.t.pass = false;
    for (std::size_t l = 0; l < opt.tail_levels.size(); ++l) {
        std::vector<double> tq;
        for (const auto& r : rep.rows) tq.push_back(r.tail_quotients[l]);
        if (nonincreasing(tq, opt.slack) && std::all_of(tq.begin(), tq.end(), [](double v) { return std::isfinite(v); })) {
            rep.t.pass = true;
            rep.t.note = "tail quotient at M = " + std::to_string(opt.tail_levels[l]) + " nonincreasing";
            break;
        }
    }
    if (!rep.t.pass) rep.t.note = "no tail level with nonincreasing quotient";
    double dmax = 0.0;
    for (const auto& r : rep.rows) dmax = std::max(dmax, r.d_violation);
    rep.d.pass = dmax <= 1e-9;
    rep.d.note = "max excess of |psi(x+u)-psi(x)-u|/h over omega |u|: " + std::to_string(dmax);
    return rep;
}

}  // namespace riskgen
