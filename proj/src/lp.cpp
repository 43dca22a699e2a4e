#include "riskgen/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskgen {

namespace {

class Simplex {
public:
    Simplex(const LpProblem& p, const LpOptions& o) : m_(p.rows), n_(p.cols), a_(p.a), b_(p.b), opt_(o) {
        sign_.assign(m_, 1.0);
        for (int i = 0; i < m_; ++i)
            if (b_[i] < 0.0) {
                sign_[i] = -1.0;
                b_[i] = -b_[i];
                for (int j = 0; j < n_; ++j) a_[idx(i, j)] = -a_[idx(i, j)];
            }
        basis_.resize(m_);
        is_basic_.assign(n_ + m_, false);
        for (int i = 0; i < m_; ++i) {
            basis_[i] = n_ + i;
            is_basic_[n_ + i] = true;
        }
        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) binv_[idx2(i, i)] = 1.0;
        xb_ = b_;
    }

    LpResult run(const std::vector<double>& c) {
        LpResult res;
        double bnorm = 0.0;
        for (double v : b_) bnorm += std::abs(v);

        std::vector<double> c1(n_ + m_, 0.0);
        for (int i = 0; i < m_; ++i) c1[n_ + i] = 1.0;
        if (phase(c1, res.iterations) != LpStatus::optimal) throw std::logic_error("phase one unbounded");
        double infeas = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_) infeas += xb_[i];
        if (infeas > opt_.feasibility_tol * (1.0 + bnorm)) {
            res.status = LpStatus::infeasible;
            return res;
        }
        drive_out_artificials();

        std::vector<double> c2(n_ + m_, 0.0);
        std::copy(c.begin(), c.end(), c2.begin());
        res.status = phase(c2, res.iterations);
        if (res.status != LpStatus::optimal) return res;

        res.x.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, xb_[i]);
        res.value = 0.0;
        for (int j = 0; j < n_; ++j) res.value += c[j] * res.x[j];
        auto y = duals(c2);
        res.dual.resize(m_);
        res.dual_value = 0.0;
        for (int i = 0; i < m_; ++i) {
            res.dual[i] = sign_[i] * y[i];
            res.dual_value += y[i] * b_[i];
        }
        res.dual_infeasibility = 0.0;
        for (int j = 0; j < n_; ++j)
            res.dual_infeasibility = std::min(res.dual_infeasibility, reduced_cost(c2, y, j));
        return res;
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
    std::size_t idx2(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }

    double column_entry(int i, int j) const { return j < n_ ? a_[idx(i, j)] : (j - n_ == i ? 1.0 : 0.0); }

    std::vector<double> duals(const std::vector<double>& c) const {
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const double cb = c[basis_[i]];
            if (cb == 0.0) continue;
            for (int k = 0; k < m_; ++k) y[k] += cb * binv_[idx2(i, k)];
        }
        return y;
    }

    double reduced_cost(const std::vector<double>& c, const std::vector<double>& y, int j) const {
        double d = c[j];
        for (int k = 0; k < m_; ++k) d -= y[k] * a_[idx(k, j)];
        return d;
    }

    void ftran(int j, std::vector<double>& alpha) const {
        alpha.assign(m_, 0.0);
        if (j >= n_) {
            for (int i = 0; i < m_; ++i) alpha[i] = binv_[idx2(i, j - n_)];
            return;
        }
        for (int k = 0; k < m_; ++k) {
            const double akj = a_[idx(k, j)];
            if (akj == 0.0) continue;
            for (int i = 0; i < m_; ++i) alpha[i] += binv_[idx2(i, k)] * akj;
        }
    }

    void pivot(int r, int j, const std::vector<double>& alpha) {
        const double piv = alpha[r];
        for (int k = 0; k < m_; ++k) binv_[idx2(r, k)] /= piv;
        xb_[r] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r || alpha[i] == 0.0) continue;
            const double f = alpha[i];
            for (int k = 0; k < m_; ++k) binv_[idx2(i, k)] -= f * binv_[idx2(r, k)];
            xb_[i] -= f * xb_[r];
        }
        is_basic_[basis_[r]] = false;
        basis_[r] = j;
        is_basic_[j] = true;
        if (++since_refactor_ >= 64) refactor();
    }

    void refactor() {
        since_refactor_ = 0;
        std::vector<double> bm(static_cast<std::size_t>(m_) * m_), inv(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i)
            for (int k = 0; k < m_; ++k) bm[idx2(i, k)] = column_entry(i, basis_[k]);
        for (int i = 0; i < m_; ++i) inv[idx2(i, i)] = 1.0;
        for (int col = 0; col < m_; ++col) {
            int p = col;
            for (int i = col + 1; i < m_; ++i)
                if (std::abs(bm[idx2(i, col)]) > std::abs(bm[idx2(p, col)])) p = i;
            if (std::abs(bm[idx2(p, col)]) < 1e-300) return;  // keep the product-form inverse
            if (p != col)
                for (int k = 0; k < m_; ++k) {
                    std::swap(bm[idx2(p, k)], bm[idx2(col, k)]);
                    std::swap(inv[idx2(p, k)], inv[idx2(col, k)]);
                }
            const double d = bm[idx2(col, col)];
            for (int k = 0; k < m_; ++k) {
                bm[idx2(col, k)] /= d;
                inv[idx2(col, k)] /= d;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == col) continue;
                const double f = bm[idx2(i, col)];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    bm[idx2(i, k)] -= f * bm[idx2(col, k)];
                    inv[idx2(i, k)] -= f * inv[idx2(col, k)];
                }
            }
        }
        binv_ = std::move(inv);
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            for (int k = 0; k < m_; ++k) s += binv_[idx2(i, k)] * b_[k];
            xb_[i] = s;
        }
    }

    LpStatus phase(const std::vector<double>& c, int& iterations) {
        double cscale = 1.0;
        for (double v : c) cscale = std::max(cscale, std::abs(v));
        const double dtol = 1e-11 * cscale;
        std::vector<double> alpha;
        for (;;) {
            if (iterations >= opt_.max_iterations) throw std::runtime_error("simplex iteration limit reached");
            const auto y = duals(c);
            int enter = -1;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j]) continue;
                if (reduced_cost(c, y, j) < -dtol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::optimal;
            ftran(enter, alpha);
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                double ratio;
                if (basis_[i] >= n_ && std::abs(alpha[i]) > opt_.pivot_tol && xb_[i] <= opt_.pivot_tol) {
                    ratio = 0.0;  // zero-level artificial must leave rather than grow
                } else if (alpha[i] > opt_.pivot_tol) {
                    ratio = std::max(0.0, xb_[i]) / alpha[i];
                } else {
                    continue;
                }
                if (leave < 0 || ratio < best - 1e-14 ||
                    (ratio <= best + 1e-14 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            pivot(leave, enter, alpha);
            ++iterations;
        }
    }

    void drive_out_artificials() {
        std::vector<double> alpha;
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < n_) continue;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j]) continue;
                double v = 0.0;
                for (int k = 0; k < m_; ++k) v += binv_[idx2(r, k)] * a_[idx(k, j)];
                if (std::abs(v) > 1e-9) {
                    ftran(j, alpha);
                    pivot(r, j, alpha);
                    break;
                }
            }
        }
    }

    int m_, n_;
    std::vector<double> a_, b_;
    LpOptions opt_;
    std::vector<double> sign_;
    std::vector<int> basis_;
    std::vector<bool> is_basic_;
    std::vector<double> binv_;
    std::vector<double> xb_;
    int since_refactor_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
    if (problem.rows <= 0 || problem.cols <= 0) throw std::invalid_argument("solve_lp: empty problem");
    Simplex s(problem, options);
    return s.run(problem.c);
}

}  // namespace riskgen
