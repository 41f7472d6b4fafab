#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "stsp/milp.hpp"

namespace stsp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit, kNumericalFailure };

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> x;      // one entry per model variable
  std::vector<double> duals;  // one entry per row, in the model's objective sense
};

// Warm-start snapshot: which column is basic in each row, and at which bound
// every nonbasic column rests. Columns n..n+m-1 are the row slacks.
struct SimplexState {
  std::vector<int> basis;
  std::vector<unsigned char> at_upper;
};

// Bounded-variable primal simplex over a dense LU of the basis, with
// product-form eta updates between refactorizations. Phase 1 runs composite
// (signed unit costs on out-of-bound basics, no artificial variables), so a
// warm basis that went primal-infeasible after added rows or tightened
// bounds is repaired in place.
class LpSolver {
 public:
  explicit LpSolver(const MilpModel& model);

  // Branching override; integrality of the model is ignored throughout.
  void set_var_bounds(int var, double lower, double upper);
  // Appends a cut over existing variables; its slack enters the basis.
  void add_row(const Constraint& row);

  // Solves from the current state (cold start = all-slack basis).
  LpSolution solve();

  SimplexState state() const;
  void install_state(const SimplexState& s);

  int n_vars() const { return n_; }
  int n_rows() const { return m_; }
  long long iterations() const { return iterations_; }
  void set_iteration_limit(long long limit) { iteration_limit_ = limit; }

 private:
  struct ColEntry {
    int row;
    double coef;
  };
  struct Eta {
    int row;
    Eigen::VectorXd w;  // basis-inverse image of the entering column
  };

  double resting_value(int j) const;
  bool is_basic(int j) const { return basic_pos_[j] >= 0; }
  Eigen::VectorXd column_dense(int j) const;
  double column_dot(int j, const Eigen::VectorXd& y) const;

  bool refactorize();
  void ftran(Eigen::VectorXd& y) const;
  void btran(Eigen::VectorXd& y) const;
  void compute_basic_values();

  int n_ = 0;  // structural columns
  int m_ = 0;  // rows; the slack of row i is column n_ + i
  std::vector<std::vector<ColEntry>> cols_;  // structural columns only
  std::vector<double> lower_, upper_;        // per column (structural + slack)
  std::vector<double> cost_;                 // internal min-sense objective
  std::vector<double> b_;
  double obj_sign_ = 1.0;  // -1 when the model maximizes

  std::vector<int> basis_;        // row -> basic column
  std::vector<int> basic_pos_;    // column -> row or -1
  std::vector<unsigned char> at_upper_;
  std::vector<double> x_;         // current value per column

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;
  bool factor_dirty_ = true;

  long long iterations_ = 0;
  long long iteration_limit_ = 1000000;
};

// One-shot interface: relaxes the model and solves, optionally warm-started.
std::pair<LpSolution, SimplexState> solve_lp(const MilpModel& model,
                                             const SimplexState* warm = nullptr);

// Equivalent to a cold solve of the model augmented by `rows`, but reuses the
// basis reached previously on `model` (captured in `warm`).
std::pair<LpSolution, SimplexState> reoptimize_with_rows(const MilpModel& model,
                                                         const SimplexState& warm,
                                                         const std::vector<Constraint>& rows);

}  // namespace stsp
