#pragma once

#include <functional>
#include <vector>

#include "stsp/instance.hpp"
#include "stsp/lp.hpp"
#include "stsp/milp.hpp"

namespace stsp {

enum class MilpStatus { kOptimal, kInfeasible, kBudgetExhausted };

struct MilpSolution {
  MilpStatus status = MilpStatus::kBudgetExhausted;
  // Incumbent; x is empty and objective meaningless unless has_incumbent.
  bool has_incumbent = false;
  std::vector<double> x;
  double objective = 0.0;
  // Best dual bound in the model's sense (lower for min, upper for max);
  // equals the objective when status is optimal.
  double bound = 0.0;
  long long node_count = 0;
  int cuts_added = 0;
};

// Maps a fractional primal point (one value per model variable) to violated
// rows that every integer-feasible point satisfies; empty when none exist.
using SeparationCallback =
    std::function<std::vector<Constraint>(const std::vector<double>&)>;

struct BnbLimits {
  long long max_nodes = 2000000;
  double time_limit_seconds = 0.0;  // 0 disables the clock
};

// Depth-first dives (rounding down first) with best-bound backtracking over
// one shared, cut-augmented LP; branching happens through bound overrides.
// Integral LP points are separated before they may become incumbents.
MilpSolution solve_milp(const MilpModel& model, const SeparationCallback& sep = nullptr,
                        const BnbLimits& limits = {});

// Relaxation value after separating `sep` to a fixpoint (no branching).
struct CutLpResult {
  LpSolution sol;
  int cuts_added = 0;
  std::vector<Constraint> cuts;
};
CutLpResult solve_lp_with_cuts(const MilpModel& model, const SeparationCallback& sep);

// Minimum-cut separation of x(delta(S)) >= 2 over depot-free node sets that
// contain a tour-required node. `x` is the full primal vector of a model
// with one x_u_v variable per active edge; one max-flow per required node,
// duplicate cuts merged.
std::vector<Constraint> separate_connectivity(const Instance& inst, const MilpModel& model,
                                              const std::vector<double>& x);

}  // namespace stsp
