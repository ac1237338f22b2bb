// src/simplex.cpp
// Bounded-variable revised primal simplex. Equality rows and infeasible
// inequality rows start with artificial columns (phase 1 minimizes their
// sum); afterwards artificials are fixed at zero and phase 2 runs on the
// true costs. A caller-supplied starting basis skips the artificial phase:
// if it is dual feasible, dual simplex pivots remove the bound violations
// (few, for a shortest-path tree with a handful of reused peaks); whatever is
// left goes through a composite phase 1 (minimizing the sum of violations)
// and phase 2. Pricing is Dantzig's rule with a switch to Bland's rule after
// a long run of degenerate pivots. The basis is factorized with Eigen's
// SparseLU and updated in product form between refactorizations.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "nmrpath/simplex.hpp"

namespace nmrpath {

namespace {

enum class State : std::uint8_t { Basic, Lower, Upper };
enum class Phase { Artificial, Composite, Optimize };

using Column = std::vector<std::pair<int, double>>;

struct SingularBasis {};

class Simplex {
public:
    Simplex(const LinearProgram& lp, const SimplexOptions& opts, const WarmStart* start)
        : lp_(lp), opts_(opts) {
        m_ = static_cast<int>(lp.rows.size());
        n_struct_ = static_cast<int>(lp.num_vars());
        cols_.resize(static_cast<std::size_t>(n_struct_));
        for (int i = 0; i < m_; ++i)
            for (const auto& [v, a] : lp.rows[static_cast<std::size_t>(i)].coefs)
                if (a != 0.0) cols_[static_cast<std::size_t>(v)].emplace_back(i, a);
        lo_ = lp.lower;
        up_ = lp.upper;
        cost2_ = lp.cost;
        b_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) b_[static_cast<std::size_t>(i)] = lp.rows[static_cast<std::size_t>(i)].rhs;

        crash_ = start && !start->basis.empty();
        state_.assign(static_cast<std::size_t>(n_struct_), State::Lower);
        x_ = lo_;
        for (int j = 0; j < n_struct_; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (start && uj < start->x.size() && up_[uj] < kInfinity &&
                std::abs(start->x[uj] - up_[uj]) < std::abs(start->x[uj] - lo_[uj])) {
                state_[uj] = State::Upper;
                x_[uj] = up_[uj];
            }
        }
        basis_.assign(static_cast<std::size_t>(m_), -1);
        if (crash_)
            crash_basis(start->basis);
        else
            slack_basis();
        is_artificial_.assign(cols_.size(), false);
        for (int a : artificial_) is_artificial_[static_cast<std::size_t>(a)] = true;
        pos_.assign(cols_.size(), -1);
        for (int i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
    }

    LpSolution run() {
        LpSolution sol;
        std::vector<double> c2(cols_.size(), 0.0);
        std::copy(cost2_.begin(), cost2_.end(), c2.begin());
        refactor();
        if (crash_) {
            if (dual_feasible(c2) && dual_iterate(c2) == LpStatus::IterLimit) return finish(sol, LpStatus::IterLimit);
            const LpStatus s = iterate(c2, Phase::Composite);
            if (s != LpStatus::Optimal) return finish(sol, s);
        } else if (!artificial_.empty()) {
            const LpStatus s = iterate(phase1_costs(), Phase::Artificial);
            if (s == LpStatus::IterLimit) return finish(sol, s);
            double infeas = 0.0;
            for (int a : artificial_) infeas += x_[static_cast<std::size_t>(a)];
            if (infeas > 1e-7) return finish(sol, LpStatus::Infeasible);
            for (int a : artificial_) {
                up_[static_cast<std::size_t>(a)] = 0.0;
                if (state_[static_cast<std::size_t>(a)] != State::Basic) {
                    state_[static_cast<std::size_t>(a)] = State::Lower;
                    x_[static_cast<std::size_t>(a)] = 0.0;
                }
            }
        }
        return finish(sol, iterate(c2, Phase::Optimize));
    }

private:
    // Slacks where the starting point leaves them nonnegative, artificials
    // (phase 1 drives them to zero) everywhere else.
    void slack_basis() {
        std::vector<double> r = b_;
        for (int j = 0; j < n_struct_; ++j)
            for (const auto& [i, a] : cols_[static_cast<std::size_t>(j)]) r[static_cast<std::size_t>(i)] -= a * x_[static_cast<std::size_t>(j)];
        for (int i = 0; i < m_; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const Sense s = lp_.rows[ui].sense;
            if (s != Sense::Eq) {
                const double sign = s == Sense::Le ? 1.0 : -1.0;
                const int v = add_column({{i, sign}}, 0.0, 0.0, kInfinity);
                if (sign * r[ui] >= 0.0) {
                    make_basic(v, i, sign * r[ui]);
                    continue;
                }
            }
            const double sign = r[ui] >= 0.0 ? 1.0 : -1.0;
            const int a = add_column({{i, sign}}, 0.0, 0.0, kInfinity);
            artificial_.push_back(a);
            make_basic(a, i, std::abs(r[ui]));
        }
    }

    // Given (row, var) pairs first; then each row's slack, or an artificial
    // fixed at zero for uncovered equality rows. Basic values come from the
    // first refactorization and may violate bounds.
    void crash_basis(const std::vector<std::pair<int, int>>& pairs) {
        for (const auto& [row, var] : pairs) {
            if (row < 0 || row >= m_ || var < 0 || var >= n_struct_) continue;
            if (basis_[static_cast<std::size_t>(row)] >= 0 || state_[static_cast<std::size_t>(var)] == State::Basic) continue;
            make_basic(var, row, 0.0);
        }
        for (int i = 0; i < m_; ++i) {
            const Sense s = lp_.rows[static_cast<std::size_t>(i)].sense;
            const bool free_row = basis_[static_cast<std::size_t>(i)] < 0;
            if (s != Sense::Eq) {
                const int v = add_column({{i, s == Sense::Le ? 1.0 : -1.0}}, 0.0, 0.0, kInfinity);
                if (free_row) make_basic(v, i, 0.0);
            } else if (free_row) {
                const int a = add_column({{i, 1.0}}, 0.0, 0.0, 0.0);
                artificial_.push_back(a);
                make_basic(a, i, 0.0);
            }
        }
    }

    std::vector<double> phase1_costs() const {
        std::vector<double> c(cols_.size(), 0.0);
        for (int a : artificial_) c[static_cast<std::size_t>(a)] = 1.0;
        return c;
    }

    // Bounds as seen by the ratio test. In the composite phase a basic
    // variable outside its bounds may move freely away from the violated side
    // and stops at the bound it is violating.
    double lower_of(std::size_t v, Phase phase) const {
        if (phase == Phase::Composite && x_[v] > up_[v] + opts_.feasibility_tol) return up_[v];
        if (phase == Phase::Composite && x_[v] < lo_[v] - opts_.feasibility_tol) return -kInfinity;
        return lo_[v];
    }
    double upper_of(std::size_t v, Phase phase) const {
        if (phase == Phase::Composite && x_[v] < lo_[v] - opts_.feasibility_tol) return lo_[v];
        if (phase == Phase::Composite && x_[v] > up_[v] + opts_.feasibility_tol) return kInfinity;
        return up_[v];
    }

    int add_column(Column c, double cost, double lo, double up) {
        cols_.push_back(std::move(c));
        cost2_.push_back(cost);
        lo_.push_back(lo);
        up_.push_back(up);
        x_.push_back(lo);
        state_.push_back(State::Lower);
        return static_cast<int>(cols_.size()) - 1;
    }

    void make_basic(int v, int row, double value) {
        basis_[static_cast<std::size_t>(row)] = v;
        state_[static_cast<std::size_t>(v)] = State::Basic;
        x_[static_cast<std::size_t>(v)] = value;
    }

    void refactor() {
        etas_.clear();
        if (m_ == 0) return;
        std::vector<Eigen::Triplet<double>> trip;
        for (int p = 0; p < m_; ++p)
            for (const auto& [i, a] : cols_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])]) trip.emplace_back(i, p, a);
        Eigen::SparseMatrix<double> B(m_, m_);
        B.setFromTriplets(trip.begin(), trip.end());
        B.makeCompressed();
        lu_.analyzePattern(B);
        lu_.factorize(B);
        if (lu_.info() != Eigen::Success) throw SingularBasis{};

        // Recompute basic values from the nonbasic ones to shed drift.
        Eigen::VectorXd rhs(m_);
        for (int i = 0; i < m_; ++i) rhs[i] = b_[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            if (state_[j] == State::Basic || x_[j] == 0.0) continue;
            for (const auto& [i, a] : cols_[j]) rhs[i] -= a * x_[j];
        }
        Eigen::VectorXd xb = lu_.solve(rhs);
        for (int p = 0; p < m_; ++p) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])] = xb[p];
    }

    // w = B^{-1} a
    Eigen::VectorXd ftran(const Column& a) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
        for (const auto& [i, c] : a) v[i] = c;
        v = lu_.solve(v);
        for (const auto& e : etas_) {
            const double vr = v[e.r] / e.pivot;
            if (vr != 0.0)
                for (const auto& [i, w] : e.col) v[i] -= w * vr;
            v[e.r] = vr;
        }
        return v;
    }

    // y^T = c_B^T B^{-1}
    Eigen::VectorXd btran(Eigen::VectorXd z) {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = z[it->r];
            for (const auto& [i, w] : it->col) s -= z[i] * w;
            z[it->r] = s / it->pivot;
        }
        return lu_.transpose().solve(z);
    }

    double reduced_cost(const std::vector<double>& c, const Eigen::VectorXd& y, std::size_t j) const {
        double d = c[j];
        for (const auto& [i, a] : cols_[j]) d -= y[i] * a;
        return d;
    }

    LpStatus iterate(const std::vector<double>& true_costs, Phase phase) {
        std::size_t degenerate = 0;
        bool bland = false;
        std::vector<double> composite;
        for (;;) {
            if (phase == Phase::Artificial) {
                double infeas = 0.0;
                for (int a : artificial_) infeas += x_[static_cast<std::size_t>(a)];
                if (infeas <= opts_.feasibility_tol) return LpStatus::Optimal;
            }
            if (phase == Phase::Composite) {
                composite.assign(cols_.size(), 0.0);
                bool any = false;
                for (int p = 0; p < m_; ++p) {
                    const auto v = static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)]);
                    if (x_[v] < lo_[v] - opts_.feasibility_tol) composite[v] = -1.0;
                    if (x_[v] > up_[v] + opts_.feasibility_tol) composite[v] = 1.0;
                    any = any || composite[v] != 0.0;
                }
                if (!any) return LpStatus::Optimal;
            }
            const std::vector<double>& c = phase == Phase::Composite ? composite : true_costs;
            if (iterations_ >= opts_.iteration_limit) return LpStatus::IterLimit;
            if (etas_.size() >= opts_.refactor_every) refactor();

            Eigen::VectorXd cb(m_);
            for (int p = 0; p < m_; ++p) cb[p] = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])];
            const Eigen::VectorXd y = m_ > 0 ? btran(cb) : Eigen::VectorXd();

            // Pricing.
            int q = -1;
            double best = 0.0, dq = 0.0;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                const State s = state_[j];
                if (s == State::Basic || lo_[j] == up_[j]) continue;
                const double d = reduced_cost(c, y, j);
                const double gain = s == State::Lower ? -d : d;
                if (gain <= opts_.optimality_tol) continue;
                if (bland) {
                    q = static_cast<int>(j);
                    dq = d;
                    break;
                }
                if (gain > best) {
                    best = gain;
                    q = static_cast<int>(j);
                    dq = d;
                }
            }
            if (q < 0) return phase == Phase::Composite ? LpStatus::Infeasible : LpStatus::Optimal;
            const auto uq = static_cast<std::size_t>(q);
            const double dir = state_[uq] == State::Lower ? 1.0 : -1.0;
            (void)dq;

            const Eigen::VectorXd w = m_ > 0 ? ftran(cols_[uq]) : Eigen::VectorXd();

            // Harris two-pass ratio test. Basic p moves by -dir * w[p] per unit step.
            double tmax = std::numeric_limits<double>::infinity();
            for (int p = 0; p < m_; ++p) {
                const double wp = w[p];
                if (std::abs(wp) <= opts_.pivot_tol) continue;
                const auto v = static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)]);
                const double delta = -dir * wp;
                const double lo = lower_of(v, phase), up = upper_of(v, phase);
                double room;
                if (delta < 0.0 && lo > -kInfinity)
                    room = (x_[v] - lo + opts_.feasibility_tol) / -delta;
                else if (delta > 0.0 && up < kInfinity)
                    room = (up - x_[v] + opts_.feasibility_tol) / delta;
                else
                    continue;
                tmax = std::min(tmax, room);
            }
            int leave = -1;
            double t = std::numeric_limits<double>::infinity();
            double best_pivot = 0.0, leave_value = 0.0;
            for (int p = 0; p < m_; ++p) {
                const double wp = w[p];
                if (std::abs(wp) <= opts_.pivot_tol) continue;
                const auto v = static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)]);
                const double delta = -dir * wp;
                const double lo = lower_of(v, phase), up = upper_of(v, phase);
                double ratio;
                if (delta < 0.0 && lo > -kInfinity)
                    ratio = (x_[v] - lo) / -delta;
                else if (delta > 0.0 && up < kInfinity)
                    ratio = (up - x_[v]) / delta;
                else
                    continue;
                if (ratio > tmax) continue;
                bool take;
                if (bland)
                    take = leave < 0 || ratio < t - 1e-12 ||
                           (ratio <= t + 1e-12 && basis_[static_cast<std::size_t>(p)] < basis_[static_cast<std::size_t>(leave)]);
                else
                    take = std::abs(wp) > best_pivot;
                if (take) {
                    leave = p;
                    t = ratio;
                    best_pivot = std::abs(wp);
                    leave_value = delta < 0.0 ? lo : up;
                }
            }
            if (leave >= 0) t = std::max(t, 0.0);

            const double span = up_[uq] - lo_[uq];
            const bool flip = span < kInfinity && span <= t;
            if (!flip && leave < 0) return LpStatus::Unbounded;
            if (flip) t = span;
            ++iterations_;

            if (t <= 1e-12) {
                if (++degenerate >= opts_.bland_after) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }

            for (int p = 0; p < m_; ++p)
                if (w[p] != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])] -= dir * t * w[p];
            if (flip) {
                state_[uq] = dir > 0 ? State::Upper : State::Lower;
                x_[uq] = dir > 0 ? up_[uq] : lo_[uq];
                continue;
            }
            x_[uq] += dir * t;

            swap_in(q, leave, leave_value, w);
        }
    }

    // Basic position `leave` exits at `value`; q takes its place.
    void swap_in(int q, int leave, double value, const Eigen::VectorXd& w) {
        const auto out = static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)]);
        state_[out] = value == lo_[out] ? State::Lower : State::Upper;
        x_[out] = value;
        pos_[out] = -1;
        if (is_artificial_[out]) up_[out] = 0.0;  // never re-enters
        basis_[static_cast<std::size_t>(leave)] = q;
        pos_[static_cast<std::size_t>(q)] = leave;
        state_[static_cast<std::size_t>(q)] = State::Basic;

        Eta e;
        e.r = leave;
        e.pivot = w[leave];
        for (int p = 0; p < m_; ++p)
            if (p != leave && w[p] != 0.0) e.col.emplace_back(p, w[p]);
        etas_.push_back(std::move(e));
    }

    Eigen::VectorXd duals(const std::vector<double>& c) {
        Eigen::VectorXd cb(m_);
        for (int p = 0; p < m_; ++p) cb[p] = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])];
        return m_ > 0 ? btran(cb) : Eigen::VectorXd();
    }

    bool dual_feasible(const std::vector<double>& c) {
        const Eigen::VectorXd y = duals(c);
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            if (state_[j] == State::Basic || lo_[j] == up_[j]) continue;
            const double d = reduced_cost(c, y, j);
            if (state_[j] == State::Lower && (d < -opts_.optimality_tol || (lo_[j] == -kInfinity && d > opts_.optimality_tol)))
                return false;
            if (state_[j] == State::Upper && d > opts_.optimality_tol) return false;
        }
        return true;
    }

    // Bounded dual simplex: the most violated basic variable leaves at the
    // bound it violates; the entering column keeps the reduced costs sign
    // feasible. Stops when the basis is primal feasible, or when a violated
    // row has no entering candidate (the LP is infeasible; the composite
    // phase that follows confirms it).
    LpStatus dual_iterate(const std::vector<double>& c) {
        for (;;) {
            if (iterations_ >= opts_.iteration_limit) return LpStatus::IterLimit;
            if (etas_.size() >= opts_.refactor_every) refactor();

            int r = -1;
            double worst = opts_.feasibility_tol;
            for (int p = 0; p < m_; ++p) {
                const auto v = static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)]);
                const double viol = std::max(lo_[v] - x_[v], x_[v] - up_[v]);
                if (viol > worst) {
                    worst = viol;
                    r = p;
                }
            }
            if (r < 0) return LpStatus::Optimal;
            const auto vr = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
            const bool raise = x_[vr] < lo_[vr];

            Eigen::VectorXd er = Eigen::VectorXd::Zero(m_);
            er[r] = 1.0;
            const Eigen::VectorXd rho = btran(er);
            const Eigen::VectorXd y = duals(c);

            // x_r = beta - sum alpha_j x_j, so raising x_r needs a column with
            // alpha < 0 moving up or alpha > 0 moving down.
            int q = -1;
            double best = std::numeric_limits<double>::infinity(), alpha_q = 0.0;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (state_[j] == State::Basic || lo_[j] == up_[j]) continue;
                double alpha = 0.0;
                for (const auto& [i, a] : cols_[j]) alpha += rho[i] * a;
                if (std::abs(alpha) <= opts_.pivot_tol) continue;
                const bool up_move = state_[j] == State::Lower;
                if (raise != (up_move == (alpha < 0.0))) continue;
                const double ratio = std::abs(reduced_cost(c, y, j)) / std::abs(alpha);
                if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && std::abs(alpha) > std::abs(alpha_q))) {
                    best = ratio;
                    q = static_cast<int>(j);
                    alpha_q = alpha;
                }
            }
            if (q < 0) return LpStatus::Infeasible;

            const auto uq = static_cast<std::size_t>(q);
            const Eigen::VectorXd w = ftran(cols_[uq]);
            const double bound = raise ? lo_[vr] : up_[vr];
            const double step = (x_[vr] - bound) / w[r];
            for (int p = 0; p < m_; ++p)
                if (w[p] != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])] -= step * w[p];
            x_[uq] += step;
            ++iterations_;
            swap_in(q, r, bound, w);
        }
    }

    LpSolution& finish(LpSolution& sol, LpStatus status) {
        sol.status = status;
        sol.iterations = iterations_;
        sol.x.assign(x_.begin(), x_.begin() + n_struct_);
        for (int j = 0; j < n_struct_; ++j) {
            auto& v = sol.x[static_cast<std::size_t>(j)];
            v = std::clamp(v, lo_[static_cast<std::size_t>(j)], up_[static_cast<std::size_t>(j)]);
        }
        sol.objective = 0.0;
        for (int j = 0; j < n_struct_; ++j) sol.objective += cost2_[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
        if (status == LpStatus::Optimal) {
            Eigen::VectorXd cb(m_);
            for (int p = 0; p < m_; ++p) {
                const auto v = static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)]);
                cb[p] = v < cost2_.size() ? cost2_[v] : 0.0;
            }
            const Eigen::VectorXd y = m_ > 0 ? btran(cb) : Eigen::VectorXd();
            sol.duals.assign(y.data(), y.data() + y.size());
            sol.reduced_costs.resize(static_cast<std::size_t>(n_struct_));
            for (int j = 0; j < n_struct_; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                sol.reduced_costs[uj] = state_[uj] == State::Basic ? 0.0 : reduced_cost(cost2_, y, uj);
            }
        }
        return sol;
    }

    struct Eta {
        int r = 0;
        double pivot = 1.0;
        std::vector<std::pair<int, double>> col;
    };

    const LinearProgram& lp_;
    SimplexOptions opts_;
    int m_ = 0, n_struct_ = 0;
    std::vector<Column> cols_;
    std::vector<double> lo_, up_, cost2_, x_, b_;
    bool crash_ = false;
    std::vector<State> state_;
    std::vector<int> basis_, pos_, artificial_;
    std::vector<bool> is_artificial_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
    std::size_t iterations_ = 0;
};

}  // namespace

LpSolution solve_simplex(const LinearProgram& lp, const SimplexOptions& opts, const WarmStart* start) {
    lp.check();
    try {
        Simplex s(lp, opts, start);
        return s.run();
    } catch (const SingularBasis&) {
        if (!start || start->basis.empty()) throw Error(ErrorCode::InvalidArgument, "singular simplex basis");
    }
    WarmStart plain{start->x, {}};
    return solve_simplex(lp, opts, &plain);
}

LpSolution solve_lp(const LinearProgram& lp) {
    BundledBackend b;
    return b.solve(lp);
}

LpSolution BundledBackend::solve(const LinearProgram& lp, const WarmStart* start) {
    auto sol = solve_simplex(lp, opts_, start);
    sol.integrality = integrality_of(lp, sol.x, 1e-6);
    return sol;
}

}  // namespace nmrpath
