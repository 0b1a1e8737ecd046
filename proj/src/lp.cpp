#include "sbp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbp::lp {

namespace {

constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr double kStepTol = 1e-12;
constexpr double kTieTol = 1e-9;

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper };

// Internal form: A x = b over structural variables plus one slack per row
// (bounds encode the relation) plus one artificial per row for phase 1.
class Simplex {
public:
    Simplex(const LinearProgram& lp, const LpOptions& opts) : opts_(opts) {
        m_ = lp.num_rows();
        nx_ = lp.num_vars();
        n_ = nx_ + m_ + m_;

        a_.assign(static_cast<std::size_t>(m_) * n_, 0.0);
        b_.resize(m_);
        lo_.assign(n_, 0.0);
        up_.assign(n_, kInf);
        cost_.assign(n_, 0.0);

        for (int j = 0; j < nx_; ++j) {
            cost_[j] = lp.objective[j];
            lo_[j] = lp.lower.empty() ? 0.0 : lp.lower[j];
            up_[j] = lp.upper.empty() ? kInf : lp.upper[j];
            if (lo_[j] > up_[j] + 1e-12) contradictory_bounds_ = true;
        }

        for (int i = 0; i < m_; ++i) {
            const Constraint& row = lp.constraints[i];
            if (static_cast<int>(row.coeffs.size()) != nx_)
                throw std::invalid_argument("solve_lp: row width mismatch");
            for (int j = 0; j < nx_; ++j) at(i, j) = row.coeffs[j];
            b_[i] = row.rhs;
            int s = nx_ + i;
            at(i, s) = 1.0;
            switch (row.rel) {
                case Relation::LessEq: lo_[s] = 0.0; up_[s] = kInf; break;
                case Relation::GreaterEq: lo_[s] = -kInf; up_[s] = 0.0; break;
                case Relation::Equal: lo_[s] = 0.0; up_[s] = 0.0; break;
            }
        }

        max_iter_ = opts.max_iterations > 0 ? opts.max_iterations : 5000 + 40 * (m_ + n_);
    }

    LpSolution run() {
        LpSolution sol;
        sol.iteration_limit = max_iter_;
        if (contradictory_bounds_) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }

        init_basis();

        // Phase 1: drive the artificial sum to zero.
        cur_cost_.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i) cur_cost_[nx_ + m_ + i] = 1.0;
        LpStatus st = iterate(sol);
        if (st != LpStatus::Optimal) {
            // A bounded-below phase-1 objective cannot be unbounded.
            sol.status = st;
            return sol;
        }
        if (artificial_sum() > 1e-7) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }

        // Pin artificials at zero; basic-at-zero artificials are harmless.
        for (int i = 0; i < m_; ++i) {
            int t = nx_ + m_ + i;
            lo_[t] = 0.0;
            up_[t] = 0.0;
            if (vstate_[t] != VarState::Basic) vstate_[t] = VarState::AtLower;
        }

        cur_cost_ = cost_;
        st = iterate(sol);
        sol.status = st;
        if (st == LpStatus::Optimal) extract(sol);
        return sol;
    }

private:
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    double bound_value(int j) const {
        if (vstate_[j] == VarState::AtLower) return std::isfinite(lo_[j]) ? lo_[j] : 0.0;
        return std::isfinite(up_[j]) ? up_[j] : 0.0;
    }

    void init_basis() {
        vstate_.assign(n_, VarState::AtLower);
        for (int j = 0; j < n_; ++j)
            if (!std::isfinite(lo_[j])) vstate_[j] = VarState::AtUpper;

        basis_.assign(m_, -1);
        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        xb_.assign(m_, 0.0);

        for (int i = 0; i < m_; ++i) {
            double r = b_[i];
            for (int j = 0; j < nx_; ++j) {
                double v = bound_value(j);
                if (v != 0.0) r -= at(i, j) * v;
            }
            int s = nx_ + i;
            int t = nx_ + m_ + i;
            if (r >= lo_[s] - 0.0 && r <= up_[s] + 0.0) {
                // The slack alone balances the row.
                basis_[i] = s;
                vstate_[s] = VarState::Basic;
                xb_[i] = r;
                binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;
                lo_[t] = up_[t] = 0.0;  // artificial never needed
                at(i, t) = 1.0;
            } else {
                double sv = std::clamp(r, lo_[s], up_[s]);  // nearest finite bound
                vstate_[s] = (sv == lo_[s]) ? VarState::AtLower : VarState::AtUpper;
                double resid = r - sv;
                double sgn = resid >= 0.0 ? 1.0 : -1.0;
                at(i, t) = sgn;
                basis_[i] = t;
                vstate_[t] = VarState::Basic;
                xb_[i] = std::abs(resid);
                binv_[static_cast<std::size_t>(i) * m_ + i] = sgn;
            }
        }
    }

    double artificial_sum() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= nx_ + m_) s += std::abs(xb_[i]);
        return s;
    }

    void btran(const std::vector<double>& c, std::vector<double>& y) const {
        y.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double ci = c[basis_[i]];
            if (ci == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) y[k] += ci * row[k];
        }
    }

    void ftran(int col, std::vector<double>& w) const {
        w.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            double av = at(k, col);
            if (av == 0.0) continue;
            for (int i = 0; i < m_; ++i) w[i] += binv_[static_cast<std::size_t>(i) * m_ + k] * av;
        }
    }

    void refactorize() {
        // Gauss-Jordan inversion of the current basis matrix.
        std::vector<double> mat(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int c = 0; c < m_; ++c)
            for (int i = 0; i < m_; ++i) mat[static_cast<std::size_t>(i) * m_ + c] = at(i, basis_[c]);
        std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
        for (int col = 0; col < m_; ++col) {
            int piv = -1;
            double best = 0.0;
            for (int i = col; i < m_; ++i) {
                double v = std::abs(mat[static_cast<std::size_t>(i) * m_ + col]);
                if (v > best) { best = v; piv = i; }
            }
            if (piv < 0 || best < 1e-13) return;  // singular; keep the updated inverse
            if (piv != col) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(mat[static_cast<std::size_t>(piv) * m_ + k],
                              mat[static_cast<std::size_t>(col) * m_ + k]);
                    std::swap(inv[static_cast<std::size_t>(piv) * m_ + k],
                              inv[static_cast<std::size_t>(col) * m_ + k]);
                }
            }
            double d = mat[static_cast<std::size_t>(col) * m_ + col];
            for (int k = 0; k < m_; ++k) {
                mat[static_cast<std::size_t>(col) * m_ + k] /= d;
                inv[static_cast<std::size_t>(col) * m_ + k] /= d;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == col) continue;
                double f = mat[static_cast<std::size_t>(i) * m_ + col];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    mat[static_cast<std::size_t>(i) * m_ + k] -= f * mat[static_cast<std::size_t>(col) * m_ + k];
                    inv[static_cast<std::size_t>(i) * m_ + k] -= f * inv[static_cast<std::size_t>(col) * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        recompute_xb();
    }

    void recompute_xb() {
        std::vector<double> rhs(m_);
        for (int i = 0; i < m_; ++i) {
            double r = b_[i];
            for (int j = 0; j < n_; ++j) {
                if (vstate_[j] == VarState::Basic) continue;
                double v = bound_value(j);
                if (v != 0.0) r -= at(i, j) * v;
            }
            rhs[i] = r;
        }
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = &binv_[static_cast<std::size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) s += row[k] * rhs[k];
            xb_[i] = s;
        }
    }

    LpStatus iterate(LpSolution& sol) {
        std::vector<double> y, w;
        int stall = 0;
        bool bland = false;

        while (true) {
            if (sol.iterations >= max_iter_) return LpStatus::IterationLimit;
            ++sol.iterations;
            if (sol.iterations % opts_.refactor_every == 0) refactorize();

            btran(cur_cost_, y);

            // Pricing: Dantzig by default, Bland (lowest index) after a stall.
            int q = -1;
            double best = 0.0;
            for (int j = 0; j < n_; ++j) {
                if (vstate_[j] == VarState::Basic || lo_[j] == up_[j]) continue;
                double d = cur_cost_[j];
                for (int i = 0; i < m_; ++i) {
                    double av = at(i, j);
                    if (av != 0.0) d -= y[i] * av;
                }
                double viol = 0.0;
                if (vstate_[j] == VarState::AtLower && d < -kDualTol) viol = -d;
                else if (vstate_[j] == VarState::AtUpper && d > kDualTol) viol = d;
                if (viol > 0.0) {
                    if (bland) { q = j; break; }
                    if (viol > best) { best = viol; q = j; }
                }
            }
            if (q < 0) return LpStatus::Optimal;

            double dir = (vstate_[q] == VarState::AtLower) ? 1.0 : -1.0;
            ftran(q, w);

            // Ratio test, pass 1: smallest blocking step among basics.
            double trow = kInf;
            for (int i = 0; i < m_; ++i) {
                double delta = -dir * w[i];  // change of basic i per unit step
                if (delta > kPivotTol) {
                    if (std::isfinite(up_[basis_[i]]))
                        trow = std::min(trow, std::max(0.0, (up_[basis_[i]] - xb_[i]) / delta));
                } else if (delta < -kPivotTol) {
                    if (std::isfinite(lo_[basis_[i]]))
                        trow = std::min(trow, std::max(0.0, (xb_[i] - lo_[basis_[i]]) / (-delta)));
                }
            }

            double range = up_[q] - lo_[q];  // entering's own travel
            if (!std::isfinite(trow) && !std::isfinite(range)) return LpStatus::Unbounded;

            if (range <= trow + kTieTol) {
                // Bound flip, no basis change.
                for (int i = 0; i < m_; ++i) xb_[i] -= dir * w[i] * range;
                vstate_[q] = (vstate_[q] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
                if (range <= kStepTol) { if (++stall >= opts_.bland_stall_limit) bland = true; }
                else { stall = 0; bland = false; }
                continue;
            }

            // Pass 2: pick the leaving row among ties.
            int leave = -1;
            bool leave_to_upper = false;
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                double delta = -dir * w[i];
                double t;
                bool to_upper;
                if (delta > kPivotTol && std::isfinite(up_[basis_[i]])) {
                    t = std::max(0.0, (up_[basis_[i]] - xb_[i]) / delta);
                    to_upper = true;
                } else if (delta < -kPivotTol && std::isfinite(lo_[basis_[i]])) {
                    t = std::max(0.0, (xb_[i] - lo_[basis_[i]]) / (-delta));
                    to_upper = false;
                } else {
                    continue;
                }
                if (t > trow + kTieTol) continue;
                bool take;
                if (leave < 0) take = true;
                else if (bland) take = basis_[i] < basis_[leave];
                else take = std::abs(w[i]) > best_pivot;
                if (take) {
                    leave = i;
                    leave_to_upper = to_upper;
                    best_pivot = std::abs(w[i]);
                }
            }
            if (leave < 0) return LpStatus::Unbounded;  // only infinite blockers

            if (trow <= kStepTol) { if (++stall >= opts_.bland_stall_limit) bland = true; }
            else { stall = 0; bland = false; }

            // Apply the step and swap basis.
            double enter_val = bound_value(q) + dir * trow;
            for (int i = 0; i < m_; ++i) xb_[i] -= dir * w[i] * trow;

            int out = basis_[leave];
            vstate_[out] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
            basis_[leave] = q;
            vstate_[q] = VarState::Basic;
            xb_[leave] = enter_val;

            double piv = w[leave];
            double* prow = &binv_[static_cast<std::size_t>(leave) * m_];
            for (int k = 0; k < m_; ++k) prow[k] /= piv;
            for (int i = 0; i < m_; ++i) {
                if (i == leave) continue;
                double f = w[i];
                if (f == 0.0) continue;
                double* row = &binv_[static_cast<std::size_t>(i) * m_];
                for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
            }
        }
    }

    void extract(LpSolution& sol) {
        sol.primal.assign(nx_, 0.0);
        for (int j = 0; j < nx_; ++j)
            if (vstate_[j] != VarState::Basic) sol.primal[j] = bound_value(j);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < nx_) sol.primal[basis_[i]] = xb_[i];

        sol.objective_value = 0.0;
        for (int j = 0; j < nx_; ++j) sol.objective_value += cost_[j] * sol.primal[j];

        btran(cost_, sol.dual);
    }

    LpOptions opts_;
    int m_ = 0, nx_ = 0, n_ = 0;
    std::vector<double> a_, b_, lo_, up_, cost_, cur_cost_;
    std::vector<double> binv_, xb_;
    std::vector<int> basis_;
    std::vector<VarState> vstate_;
    bool contradictory_bounds_ = false;
    int max_iter_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts) {
    if (lp.num_rows() == 0) {
        // No rows: each variable sits at its cheaper bound.
        LpSolution sol;
        sol.primal.assign(lp.num_vars(), 0.0);
        for (int j = 0; j < lp.num_vars(); ++j) {
            double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
            double up = lp.upper.empty() ? kInf : lp.upper[j];
            double c = lp.objective[j];
            double v = c >= 0 ? lo : up;
            if (!std::isfinite(v)) {
                sol.status = LpStatus::Unbounded;
                return sol;
            }
            sol.primal[j] = v;
            sol.objective_value += c * v;
        }
        sol.status = LpStatus::Optimal;
        return sol;
    }
    Simplex s(lp, opts);
    return s.run();
}

}  // namespace sbp::lp
