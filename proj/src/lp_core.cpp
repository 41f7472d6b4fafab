#include "stsp/lp.hpp"

#include <algorithm>
#include <cmath>

#include "stsp/common.hpp"

namespace stsp {

namespace {

constexpr double kPivTol = 1e-9;    // smallest pivot magnitude accepted into the basis
constexpr double kRatioTol = 1e-9;  // |w_i| below this never blocks the ratio test
constexpr double kStepTol = 1e-12;  // steps below this count as degenerate (stall)
constexpr int kRefactorEvery = 100;
constexpr long long kStallLimit = 1000;  // degenerate pivots before Bland's rule

}  // namespace

LpSolver::LpSolver(const MilpModel& model) {
  n_ = model.n_vars();
  obj_sign_ = model.objective_sense() == ObjSense::kMax ? -1.0 : 1.0;
  cols_.resize(n_);
  lower_.reserve(n_);
  upper_.reserve(n_);
  for (int j = 0; j < n_; ++j) {
    lower_.push_back(model.variable(j).lower);
    upper_.push_back(model.variable(j).upper);
  }
  cost_.assign(n_, 0.0);
  for (const RowEntry& e : model.objective()) cost_[e.var] = obj_sign_ * e.coef;
  at_upper_.assign(n_, 0);
  basic_pos_.assign(n_, -1);
  x_.assign(n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    // A column with only an upper bound rests there; free columns rest at 0.
    if (lower_[j] <= -kInf && upper_[j] < kInf) at_upper_[j] = 1;
  }
  for (const Constraint& c : model.constraints()) add_row(c);
}

void LpSolver::add_row(const Constraint& row) {
  // Entries are merged per variable: B assembly and column walks assume at
  // most one coefficient per (row, var) pair.
  std::vector<RowEntry> entries = row.row;
  std::sort(entries.begin(), entries.end(),
            [](const RowEntry& a, const RowEntry& b) { return a.var < b.var; });
  std::size_t out = 0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].var < 0 || entries[k].var >= n_) {
      throw Error("row '" + row.name + "' references unknown variable index " +
                  std::to_string(entries[k].var));
    }
    if (out > 0 && entries[out - 1].var == entries[k].var) {
      entries[out - 1].coef += entries[k].coef;
    } else {
      entries[out++] = entries[k];
    }
  }
  entries.resize(out);
  int i = m_++;
  for (const RowEntry& e : entries) {
    if (e.coef != 0.0) cols_[e.var].push_back({i, e.coef});
  }
  b_.push_back(row.rhs);
  // a'x + s = b; the slack's bounds encode the sense.
  double lo = 0.0, hi = 0.0;
  switch (row.sense) {
    case RowSense::kLe:
      lo = 0.0;
      hi = kInf;
      break;
    case RowSense::kGe:
      lo = -kInf;
      hi = 0.0;
      break;
    case RowSense::kEq:
      lo = 0.0;
      hi = 0.0;
      break;
  }
  lower_.push_back(lo);
  upper_.push_back(hi);
  cost_.push_back(0.0);
  at_upper_.push_back(row.sense == RowSense::kGe ? 1 : 0);
  x_.push_back(0.0);
  basis_.push_back(n_ + i);
  basic_pos_.push_back(i);
  factor_dirty_ = true;
}

void LpSolver::set_var_bounds(int var, double lower, double upper) {
  lower_[var] = lower;
  upper_[var] = upper;
  if (!is_basic(var)) {
    if (at_upper_[var] && upper >= kInf) at_upper_[var] = 0;
    if (!at_upper_[var] && lower <= -kInf && upper < kInf) at_upper_[var] = 1;
  }
}

SimplexState LpSolver::state() const { return {basis_, at_upper_}; }

void LpSolver::install_state(const SimplexState& s) {
  if (static_cast<int>(s.basis.size()) != m_ ||
      s.at_upper.size() != static_cast<std::size_t>(n_ + m_)) {
    throw Error("simplex state does not match the model shape");
  }
  std::vector<int> pos(n_ + m_, -1);
  for (int i = 0; i < m_; ++i) {
    int j = s.basis[i];
    if (j < 0 || j >= n_ + m_ || pos[j] >= 0) throw Error("simplex state basis is not a basis");
    pos[j] = i;
  }
  basis_ = s.basis;
  basic_pos_ = std::move(pos);
  at_upper_ = s.at_upper;
  factor_dirty_ = true;
}

double LpSolver::resting_value(int j) const {
  if (at_upper_[j]) return upper_[j];
  if (lower_[j] > -kInf) return lower_[j];
  return 0.0;
}

Eigen::VectorXd LpSolver::column_dense(int j) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
  if (j < n_) {
    for (const ColEntry& e : cols_[j]) a[e.row] = e.coef;
  } else {
    a[j - n_] = 1.0;
  }
  return a;
}

double LpSolver::column_dot(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return y[j - n_];
  double s = 0.0;
  for (const ColEntry& e : cols_[j]) s += e.coef * y[e.row];
  return s;
}

bool LpSolver::refactorize() {
  etas_.clear();
  factor_dirty_ = false;
  if (m_ == 0) return true;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < m_; ++i) {
    int j = basis_[i];
    if (j < n_) {
      for (const ColEntry& e : cols_[j]) B(e.row, i) = e.coef;
    } else {
      B(j - n_, i) = 1.0;
    }
  }
  lu_.compute(B);
  const auto& packed = lu_.matrixLU();
  for (int i = 0; i < m_; ++i) {
    if (std::abs(packed(i, i)) < 1e-12) return false;
  }
  return true;
}

void LpSolver::ftran(Eigen::VectorXd& y) const {
  if (m_ == 0) return;
  y = lu_.solve(y);
  for (const Eta& e : etas_) {
    double zr = y[e.row] / e.w[e.row];
    if (zr != 0.0) y -= zr * e.w;
    y[e.row] = zr;
  }
}

void LpSolver::btran(Eigen::VectorXd& y) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double dot = it->w.dot(y);
    y[it->row] = (y[it->row] - (dot - it->w[it->row] * y[it->row])) / it->w[it->row];
  }
  y = lu_.transpose().solve(y);
}

void LpSolver::compute_basic_values() {
  for (int j = 0; j < n_ + m_; ++j) {
    if (!is_basic(j)) x_[j] = resting_value(j);
  }
  Eigen::VectorXd rhs(m_);
  for (int i = 0; i < m_; ++i) rhs[i] = b_[i];
  for (int j = 0; j < n_ + m_; ++j) {
    if (is_basic(j) || x_[j] == 0.0) continue;
    if (j < n_) {
      for (const ColEntry& e : cols_[j]) rhs[e.row] -= e.coef * x_[j];
    } else {
      rhs[j - n_] -= x_[j];
    }
  }
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[basis_[i]] = rhs[i];
}

LpSolution LpSolver::solve() {
  LpSolution out;
  out.x.assign(n_, 0.0);
  out.duals.assign(m_, 0.0);

  auto fail = [&](LpStatus status) {
    out.status = status;
    for (int j = 0; j < n_; ++j) out.x[j] = x_.empty() ? 0.0 : x_[j];
    return out;
  };

  if (factor_dirty_ || static_cast<int>(etas_.size()) >= kRefactorEvery) {
    if (!refactorize()) return fail(LpStatus::kNumericalFailure);
  }
  compute_basic_values();

  bool bland = false;
  long long stall = 0;
  long long local_iters = 0;
  bool retried_this_iter = false;

  for (;;) {
    if (++local_iters > iteration_limit_) return fail(LpStatus::kIterLimit);
    ++iterations_;

    // Composite phase pick: signed unit costs while any basic is out of
    // bounds, the real objective once primal-feasible.
    bool phase1 = false;
    Eigen::VectorXd cb = Eigen::VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      int p = basis_[i];
      if (x_[p] < lower_[p] - kEpsFeas) {
        cb[i] = -1.0;
        phase1 = true;
      } else if (x_[p] > upper_[p] + kEpsFeas) {
        cb[i] = 1.0;
        phase1 = true;
      }
    }
    if (!phase1) {
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    }
    Eigen::VectorXd pi = cb;
    btran(pi);

    int q = -1;
    int dir = 0;
    double best_score = kEpsOpt;
    for (int j = 0; j < n_ + m_; ++j) {
      if (is_basic(j)) continue;
      if (lower_[j] == upper_[j]) continue;  // fixed, can never move
      double dj = (phase1 ? 0.0 : cost_[j]) - column_dot(j, pi);
      bool free_col = lower_[j] <= -kInf && upper_[j] >= kInf;
      int cand = 0;
      if ((free_col || !at_upper_[j]) && dj < -kEpsOpt) {
        cand = 1;
      } else if ((free_col || at_upper_[j]) && dj > kEpsOpt) {
        cand = -1;
      }
      if (cand == 0) continue;
      if (bland) {  // lowest eligible index, ends any degenerate cycle
        q = j;
        dir = cand;
        break;
      }
      if (std::abs(dj) > best_score) {
        q = j;
        dir = cand;
        best_score = std::abs(dj);
      }
    }

    if (q < 0) {
      if (!phase1) break;  // optimal
      // Rule out drift-induced phantom violations before giving up.
      if (!retried_this_iter) {
        if (!refactorize()) return fail(LpStatus::kNumericalFailure);
        compute_basic_values();
        retried_this_iter = true;
        continue;
      }
      return fail(LpStatus::kInfeasible);
    }

    Eigen::VectorXd w = column_dense(q);
    ftran(w);

    // Ratio test. Feasible basics block at the bound they move toward;
    // out-of-bounds basics block where they regain feasibility, so a step
    // repairs at most one violation exactly. Ties go to the lowest column.
    double t_best = kInf;
    int r_best = -1;
    bool leave_at_upper = false;
    for (int i = 0; i < m_; ++i) {
      double wi = w[i];
      if (std::abs(wi) < kRatioTol) continue;
      int p = basis_[i];
      double v = x_[p];
      double delta = -dir * wi;  // change of x_p per unit step
      double t = kInf;
      bool side_upper = false;
      if (phase1 && v < lower_[p] - kEpsFeas) {
        if (delta > 0) t = (lower_[p] - v) / delta;
      } else if (phase1 && v > upper_[p] + kEpsFeas) {
        if (delta < 0) {
          t = (upper_[p] - v) / delta;
          side_upper = true;
        }
      } else if (delta > 0 && upper_[p] < kInf) {
        t = (upper_[p] - v) / delta;
        side_upper = true;
      } else if (delta < 0 && lower_[p] > -kInf) {
        t = (lower_[p] - v) / delta;
      }
      if (t >= kInf) continue;
      t = std::max(t, 0.0);
      if (t < t_best - kStepTol || (t < t_best + kStepTol && r_best >= 0 && p < basis_[r_best])) {
        t_best = t;
        r_best = i;
        leave_at_upper = side_upper;
      }
    }

    double span = (lower_[q] > -kInf && upper_[q] < kInf) ? upper_[q] - lower_[q] : kInf;
    if (span < kInf && span <= t_best + kStepTol) {
      // Bound flip: the entering column hits its far bound first.
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * span * w[i];
      at_upper_[q] ^= 1;
      x_[q] = resting_value(q);
      stall = span > kStepTol ? 0 : stall + 1;
      if (stall > kStallLimit) bland = true;
      retried_this_iter = false;
      continue;
    }

    if (t_best >= kInf) {
      if (phase1) return fail(LpStatus::kNumericalFailure);
      return fail(LpStatus::kUnbounded);
    }

    if (std::abs(w[r_best]) < kPivTol) {
      // Too unstable to pivot on; rebuild the factorization once and retry.
      if (retried_this_iter) return fail(LpStatus::kNumericalFailure);
      if (!refactorize()) return fail(LpStatus::kNumericalFailure);
      compute_basic_values();
      retried_this_iter = true;
      continue;
    }
    retried_this_iter = false;

    int p = basis_[r_best];
    x_[q] += dir * t_best;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * t_best * w[i];
    x_[p] = leave_at_upper ? upper_[p] : lower_[p];
    at_upper_[p] = leave_at_upper ? 1 : 0;
    basis_[r_best] = q;
    basic_pos_[q] = r_best;
    basic_pos_[p] = -1;
    etas_.push_back({r_best, w});
    if (static_cast<int>(etas_.size()) >= kRefactorEvery) {
      if (!refactorize()) return fail(LpStatus::kNumericalFailure);
      compute_basic_values();
    }

    stall = t_best > kStepTol ? 0 : stall + 1;
    if (stall > kStallLimit) bland = true;
  }

  out.status = LpStatus::kOptimal;
  for (int j = 0; j < n_; ++j) out.x[j] = x_[j];
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  out.objective = obj_sign_ * obj;
  if (m_ > 0) {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    btran(cb);
    for (int i = 0; i < m_; ++i) out.duals[i] = obj_sign_ * cb[i];
  }
  return out;
}

std::pair<LpSolution, SimplexState> solve_lp(const MilpModel& model, const SimplexState* warm) {
  LpSolver solver(model);
  if (warm != nullptr) solver.install_state(*warm);
  LpSolution sol = solver.solve();
  return {std::move(sol), solver.state()};
}

std::pair<LpSolution, SimplexState> reoptimize_with_rows(const MilpModel& model,
                                                         const SimplexState& warm,
                                                         const std::vector<Constraint>& rows) {
  LpSolver solver(model);
  solver.install_state(warm);
  for (const Constraint& row : rows) solver.add_row(row);
  LpSolution sol = solver.solve();
  return {std::move(sol), solver.state()};
}

}  // namespace stsp
