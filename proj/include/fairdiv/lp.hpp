#pragma once

// Dense exact-rational linear programming.
//
// Two-phase primal simplex with Bland's rule over GMP rationals, for
// maximization with row senses <=, >=, = and per-variable bounds [lo, hi]
// (hi may be absent). Pivoting is deterministic, so identical programs yield
// identical solutions. Every Optimal solve returns a basic (vertex) solution
// together with exact row duals, and re-derives primal feasibility, dual
// feasibility, complementary slackness and strong duality from the original
// data before returning; a failure of any of these invariants throws
// InternalError rather than returning silently wrong multipliers.

#include <optional>
#include <string>
#include <vector>

#include "fairdiv/errors.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv::lp {

enum class Sense { LessEq, GreaterEq, Eq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpRow {
  std::vector<Rational> coeffs;
  Sense sense = Sense::LessEq;
  Rational rhs;
};

struct LinearProgram {
  int num_vars = 0;
  std::vector<Rational> objective;             // maximized; empty = all zero
  std::vector<LpRow> rows;
  std::vector<Rational> lower;                 // empty = all zero
  std::vector<std::optional<Rational>> upper;  // empty/absent = +inf

  void add_row(std::vector<Rational> coeffs, Sense sense, Rational rhs) {
    rows.push_back(LpRow{std::move(coeffs), sense, std::move(rhs)});
  }
  Rational lower_of(int j) const { return lower.empty() ? Rational(0) : lower[j]; }
  std::optional<Rational> upper_of(int j) const {
    return upper.empty() ? std::nullopt : upper[j];
  }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Rational objective;
  std::vector<Rational> primal;
  // One multiplier per input row, in input orientation: <= rows have y >= 0,
  // >= rows have y <= 0, = rows are free.
  std::vector<Rational> duals;
  // c_j - y.A_j over the input rows only. Exactly zero for every variable
  // strictly between its bounds; equals the multiplier of the upper bound
  // (>= 0) at an upper bound and is <= 0 at a lower bound.
  std::vector<Rational> reduced_costs;
  // Value of the dual objective; equals `objective` exactly on Optimal.
  Rational dual_objective;
};

namespace detail {

class Simplex {
 public:
  explicit Simplex(const LinearProgram& prog) : prog_(prog) {
    nv_ = prog.num_vars;
    lo_.resize(nv_);
    for (int j = 0; j < nv_; ++j) lo_[j] = prog.lower_of(j);

    // Work in u-space, u = x - lo >= 0. Finite upper bounds become rows.
    for (std::size_t r = 0; r < prog.rows.size(); ++r) {
      const LpRow& row = prog.rows[r];
      if (static_cast<int>(row.coeffs.size()) != nv_)
        throw ValidationError("lp row has wrong coefficient count");
      Rational rhs = row.rhs;
      for (int j = 0; j < nv_; ++j) rhs -= row.coeffs[j] * lo_[j];
      add_work_row(row.coeffs, row.sense, rhs);
    }
    ub_row_of_.assign(nv_, -1);
    for (int j = 0; j < nv_; ++j) {
      auto hi = prog.upper_of(j);
      if (!hi) continue;
      if (*hi < lo_[j]) throw ValidationError("lp bounds lo > hi");
      std::vector<Rational> coeffs(nv_, Rational(0));
      coeffs[j] = 1;
      ub_row_of_[j] = static_cast<int>(work_sense_.size());
      add_work_row(coeffs, Sense::LessEq, *hi - lo_[j]);
    }
    build_tableau();
  }

  LpSolution run(bool feasibility_only) {
    LpSolution sol;
    if (!phase_one()) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    if (feasibility_only) {
      sol.status = LpStatus::Optimal;
      return sol;
    }
    purge_artificials();
    if (!phase_two()) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    extract(sol);
    verify(sol);
    return sol;
  }

 private:
  const LinearProgram& prog_;
  int nv_ = 0;
  std::vector<Rational> lo_;
  std::vector<int> ub_row_of_;  // work-row index of each variable's upper bound, -1 if none

  // Work rows: user rows then upper-bound rows, rhs made nonnegative.
  std::vector<std::vector<Rational>> work_a_;
  std::vector<Sense> work_sense_;
  std::vector<Rational> work_rhs_;
  std::vector<char> work_flipped_;

  // Tableau state.
  int ncols_ = 0;
  int first_artificial_ = 0;               // columns >= this are artificial
  std::vector<std::vector<Rational>> tab_;  // live rows x ncols_
  std::vector<Rational> rhs_;
  std::vector<int> basis_;
  std::vector<int> row_origin_;  // live row -> work row
  std::vector<char> row_dead_;   // per work row, dropped as redundant
  std::vector<int> slack_col_;   // per work row, -1 if none
  std::vector<int> art_col_;     // per work row, -1 if none
  std::vector<Rational> d_;      // reduced-cost row for the current phase

  void add_work_row(const std::vector<Rational>& coeffs, Sense sense, Rational rhs) {
    if (rhs < 0) {
      std::vector<Rational> neg(coeffs.size());
      for (std::size_t j = 0; j < coeffs.size(); ++j) neg[j] = -coeffs[j];
      work_a_.push_back(std::move(neg));
      work_sense_.push_back(sense == Sense::LessEq   ? Sense::GreaterEq
                            : sense == Sense::GreaterEq ? Sense::LessEq
                                                        : Sense::Eq);
      work_rhs_.push_back(-rhs);
      work_flipped_.push_back(1);
    } else {
      work_a_.push_back(coeffs);
      work_sense_.push_back(sense);
      work_rhs_.push_back(rhs);
      work_flipped_.push_back(0);
    }
  }

  void build_tableau() {
    const int nrows = static_cast<int>(work_a_.size());
    slack_col_.assign(nrows, -1);
    art_col_.assign(nrows, -1);
    row_dead_.assign(nrows, 0);
    int col = nv_;
    for (int r = 0; r < nrows; ++r)
      if (work_sense_[r] != Sense::Eq) slack_col_[r] = col++;
    first_artificial_ = col;
    for (int r = 0; r < nrows; ++r)
      if (work_sense_[r] != Sense::LessEq) art_col_[r] = col++;
    ncols_ = col;

    tab_.assign(nrows, std::vector<Rational>(ncols_, Rational(0)));
    rhs_.resize(nrows);
    basis_.resize(nrows);
    row_origin_.resize(nrows);
    for (int r = 0; r < nrows; ++r) {
      for (int j = 0; j < nv_; ++j) tab_[r][j] = work_a_[r][j];
      if (slack_col_[r] >= 0)
        tab_[r][slack_col_[r]] = work_sense_[r] == Sense::LessEq ? 1 : -1;
      if (art_col_[r] >= 0) tab_[r][art_col_[r]] = 1;
      rhs_[r] = work_rhs_[r];
      basis_[r] = art_col_[r] >= 0 ? art_col_[r] : slack_col_[r];
      row_origin_[r] = r;
    }
  }

  bool is_artificial(int col) const { return col >= first_artificial_; }

  void build_cost_row(const std::vector<Rational>& c) {
    d_ = c;
    for (std::size_t r = 0; r < tab_.size(); ++r) {
      const Rational& cb = c[basis_[r]];
      if (cb == 0) continue;
      for (int j = 0; j < ncols_; ++j)
        if (tab_[r][j] != 0) d_[j] -= cb * tab_[r][j];
    }
  }

  void pivot(int row, int col) {
    const Rational piv = tab_[row][col];
    if (piv == 0) throw InternalError("lp pivot on zero element");
    for (int j = 0; j < ncols_; ++j) tab_[row][j] /= piv;
    rhs_[row] /= piv;
    tab_[row][col] = 1;
    for (std::size_t r = 0; r < tab_.size(); ++r) {
      if (static_cast<int>(r) == row) continue;
      const Rational f = tab_[r][col];
      if (f == 0) continue;
      for (int j = 0; j < ncols_; ++j)
        if (tab_[row][j] != 0) tab_[r][j] -= f * tab_[row][j];
      tab_[r][col] = 0;
      rhs_[r] -= f * rhs_[row];
    }
    const Rational f = d_[col];
    if (f != 0) {
      for (int j = 0; j < ncols_; ++j)
        if (tab_[row][j] != 0) d_[j] -= f * tab_[row][j];
      d_[col] = 0;
    }
    basis_[row] = col;
  }

  // Bland: entering = lowest-index improving column, leaving = min ratio with
  // lowest basis index on ties. Returns false on an unbounded direction.
  bool simplex_loop() {
    for (;;) {
      int entering = -1;
      for (int j = 0; j < first_artificial_; ++j) {
        if (d_[j] > 0) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;
      int leaving = -1;
      Rational best_ratio;
      for (std::size_t r = 0; r < tab_.size(); ++r) {
        if (tab_[r][entering] <= 0) continue;
        Rational ratio = rhs_[r] / tab_[r][entering];
        if (leaving < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[leaving])) {
          leaving = static_cast<int>(r);
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
  }

  bool phase_one() {
    bool any_art = false;
    std::vector<Rational> c1(ncols_, Rational(0));
    for (int j = first_artificial_; j < ncols_; ++j) {
      c1[j] = -1;
      any_art = true;
    }
    if (!any_art) return true;
    build_cost_row(c1);
    if (!simplex_loop()) throw InternalError("lp phase one unbounded");
    Rational infeasibility = 0;
    for (std::size_t r = 0; r < tab_.size(); ++r)
      if (is_artificial(basis_[r])) infeasibility += rhs_[r];
    return infeasibility == 0;
  }

  void purge_artificials() {
    for (std::size_t r = 0; r < tab_.size();) {
      if (!is_artificial(basis_[r])) {
        ++r;
        continue;
      }
      int col = -1;
      for (int j = 0; j < first_artificial_; ++j)
        if (tab_[r][j] != 0) {
          col = j;
          break;
        }
      if (col >= 0) {
        d_.assign(ncols_, Rational(0));  // placeholder; rebuilt for phase two
        pivot(static_cast<int>(r), col);
        ++r;
      } else {
        // Redundant row: all original columns eliminated.
        row_dead_[row_origin_[r]] = 1;
        tab_.erase(tab_.begin() + r);
        rhs_.erase(rhs_.begin() + r);
        basis_.erase(basis_.begin() + r);
        row_origin_.erase(row_origin_.begin() + r);
      }
    }
  }

  bool phase_two() {
    std::vector<Rational> c2(ncols_, Rational(0));
    for (int j = 0; j < nv_ && j < static_cast<int>(prog_.objective.size()); ++j)
      c2[j] = prog_.objective[j];
    build_cost_row(c2);
    return simplex_loop();
  }

  void extract(LpSolution& sol) const {
    sol.status = LpStatus::Optimal;
    sol.primal.assign(nv_, Rational(0));
    for (std::size_t r = 0; r < tab_.size(); ++r)
      if (basis_[r] < nv_) sol.primal[basis_[r]] = rhs_[r];
    for (int j = 0; j < nv_; ++j) sol.primal[j] += lo_[j];

    sol.objective = 0;
    for (int j = 0; j < nv_ && j < static_cast<int>(prog_.objective.size()); ++j)
      sol.objective += prog_.objective[j] * sol.primal[j];

    // Row duals, read off the identity columns of the final cost row.
    const int nwork = static_cast<int>(work_a_.size());
    std::vector<Rational> work_dual(nwork, Rational(0));
    for (int t = 0; t < nwork; ++t) {
      if (row_dead_[t]) continue;
      Rational y;
      if (art_col_[t] >= 0)
        y = -d_[art_col_[t]];
      else if (work_sense_[t] == Sense::LessEq)
        y = -d_[slack_col_[t]];
      else
        y = d_[slack_col_[t]];
      work_dual[t] = work_flipped_[t] ? -y : y;
    }
    const int nuser = static_cast<int>(prog_.rows.size());
    sol.duals.assign(work_dual.begin(), work_dual.begin() + nuser);

    sol.reduced_costs.assign(nv_, Rational(0));
    for (int j = 0; j < nv_; ++j) {
      Rational rc = j < static_cast<int>(prog_.objective.size()) ? prog_.objective[j]
                                                                 : Rational(0);
      for (int t = 0; t < nuser; ++t)
        if (sol.duals[t] != 0 && prog_.rows[t].coeffs[j] != 0)
          rc -= sol.duals[t] * prog_.rows[t].coeffs[j];
      sol.reduced_costs[j] = rc;
    }

    sol.dual_objective = 0;
    for (int t = 0; t < nuser; ++t) sol.dual_objective += sol.duals[t] * prog_.rows[t].rhs;
    for (int j = 0; j < nv_; ++j) {
      Rational rc_full = sol.reduced_costs[j];
      if (ub_row_of_[j] >= 0) {
        const Rational y_ub =
            work_flipped_[ub_row_of_[j]] ? -work_dual[ub_row_of_[j]] : work_dual[ub_row_of_[j]];
        sol.dual_objective += y_ub * *prog_.upper_of(j);
        rc_full -= y_ub;
      }
      sol.dual_objective += rc_full * lo_[j];
    }
  }

  void verify(const LpSolution& sol) const {
    const int nuser = static_cast<int>(prog_.rows.size());
    for (int j = 0; j < nv_; ++j) {
      if (sol.primal[j] < lo_[j]) throw InternalError("lp self-check: lower bound violated");
      auto hi = prog_.upper_of(j);
      if (hi && sol.primal[j] > *hi) throw InternalError("lp self-check: upper bound violated");
    }
    std::vector<Rational> ub_dual(nv_, Rational(0));
    for (int t = 0; t < nuser; ++t) {
      const LpRow& row = prog_.rows[t];
      Rational lhs = 0;
      for (int j = 0; j < nv_; ++j) lhs += row.coeffs[j] * sol.primal[j];
      const bool tight = lhs == row.rhs;
      switch (row.sense) {
        case Sense::LessEq:
          if (lhs > row.rhs) throw InternalError("lp self-check: <= row violated");
          if (sol.duals[t] < 0) throw InternalError("lp self-check: <= dual negative");
          break;
        case Sense::GreaterEq:
          if (lhs < row.rhs) throw InternalError("lp self-check: >= row violated");
          if (sol.duals[t] > 0) throw InternalError("lp self-check: >= dual positive");
          break;
        case Sense::Eq:
          if (!tight) throw InternalError("lp self-check: = row violated");
          break;
      }
      if (!tight && sol.duals[t] != 0)
        throw InternalError("lp self-check: slack row with nonzero dual");
    }
    for (int j = 0; j < nv_; ++j) {
      if (ub_row_of_[j] < 0) continue;
      // Re-derive the bound multiplier the same way extract() does.
      const int t = ub_row_of_[j];
      Rational y;
      if (work_sense_[t] == Sense::LessEq)
        y = -d_[slack_col_[t]];
      else
        y = d_[slack_col_[t]];
      if (row_dead_[t]) y = 0;
      ub_dual[j] = y;  // u_j <= cap rows are never flipped (rhs >= 0 after shift)
      if (ub_dual[j] < 0) throw InternalError("lp self-check: bound dual negative");
      if (sol.primal[j] != *prog_.upper_of(j) && ub_dual[j] != 0)
        throw InternalError("lp self-check: slack bound with nonzero dual");
    }
    for (int j = 0; j < nv_; ++j) {
      const Rational rc_full = sol.reduced_costs[j] - ub_dual[j];
      if (rc_full > 0) throw InternalError("lp self-check: dual infeasible column");
      if (sol.primal[j] > lo_[j] && rc_full != 0)
        throw InternalError("lp self-check: complementary slackness violated");
    }
    if (sol.objective != sol.dual_objective)
      throw InternalError("lp self-check: duality gap");
  }
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& prog) {
  return detail::Simplex(prog).run(false);
}

inline bool check_feasibility(const LinearProgram& prog) {
  return detail::Simplex(prog).run(true).status == LpStatus::Optimal;
}

}  // namespace fairdiv::lp
