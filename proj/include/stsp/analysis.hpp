#pragma once

// Numerical audits of what the flow models imply for the edge variables, and
// relaxation-bound comparisons across formulations. Projected LP points must
// satisfy the inequality families proved for their model; bound orderings
// with a proof are asserted, while orderings that are only conjectured are
// recorded as findings and never enforced.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stsp/bnb.hpp"
#include "stsp/common.hpp"
#include "stsp/formulations.hpp"
#include "stsp/instance.hpp"
#include "stsp/milp.hpp"

namespace stsp {

// Outcome of one projected-point audit. When `feasible` is false the point
// violates the model's own LP rows or bounds (worst violation in
// `max_residual`) and no inequalities were enumerated.
struct ProjectionReport {
  bool feasible = true;
  double max_residual = 0.0;  // worst violation of rows and variable bounds
  int checked = 0;            // inequalities enumerated
  double worst_slack = kInf;  // min of lhs - rhs over checked inequalities
  std::string worst_label;    // subset (and level) attaining worst_slack
};

// Largest violation of the model's rows and variable bounds at `point`.
double lp_residual(const MilpModel& model, const std::vector<double>& point);

// Audits a point of the single-flow relaxation: the projected edge values
// must satisfy x(delta(S)) >= 2|S n V_R| / (n_R - 1) for every depot-free S
// meeting the required set. `point` is indexed like the model build_scf
// returns. Subset enumeration; at most 10 active nodes.
ProjectionReport check_flow_projection(const Instance& inst, const std::vector<double>& point);

// Audits a point of the rank-tightened flow relaxation against the leveled
// family: for each S and every level k between the smallest and largest rank
// adjacent to S, (n_R - k - 1) x(delta(S)) + 2 sum max(0, k - r_i) x_e over
// boundary edges with outside endpoint i is at least 2|S n V_R|. The
// single-level corollary with k fixed at the smallest adjacent rank is
// folded into the same scan.
ProjectionReport check_ranked_flow_projection(const Instance& inst,
                                              const std::vector<double>& point);

// Audits a point of the multi-flow relaxation: the projected edge values
// must satisfy every connectivity cut x(delta(S)) >= 2.
ProjectionReport check_multiflow_projection(const Instance& inst,
                                            const std::vector<double>& point);

// Audits a point of the budgeted single-flow relaxation (sop-scf): for every
// depot-free S meeting the required set, the budget times x(delta(S)) covers
// the cost of all edge uses touching S. At most 8 active nodes.
ProjectionReport check_budget_projection(const Instance& inst, const std::vector<double>& point);

// `count` feasible points of the model's LP relaxation: optimal vertices of
// random bounded objectives, mixed pairwise by random convex weights.
// Requires a feasible relaxation with finite optima in random directions.
std::vector<std::vector<double>> sample_lp_points(const MilpModel& model, std::mt19937& rng,
                                                  int count);

// One formulation's row in a bound comparison. `milp` is meaningful only
// when `milp_optimal` is set; a solver that ran out of budget leaves the
// entry marked untested rather than failing the report.
struct BoundEntry {
  FormulationTag tag = FormulationTag::kClassicalCut;
  double lp = 0.0;
  double milp = 0.0;
  bool milp_optimal = false;
  int n_vars = 0;
  int n_constraints = 0;
  long long nodes = 0;
  int cuts = 0;
};

// Machine-readable outcome for one conjectured relationship on one instance.
// Verdict is "holds", "violated", or "untested" (operands not computed).
struct Finding {
  std::string conjecture;
  std::uint64_t instance = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string verdict;
};

struct BoundReport {
  std::uint64_t instance = 0;
  // Relaxation value with the full connectivity family enforced, obtained by
  // separating cuts to a fixpoint at the root. This is the reference bound
  // the flow and stage relaxations are compared against.
  double cut_lp = 0.0;
  std::vector<BoundEntry> entries;
  std::vector<Finding> findings;
};

// LP and MILP values for the requested tags plus the cut relaxation.
// Asserts the proved orderings (single-flow below its tightened variant and
// the cut bound, cut bound below multi-flow, each LP below its integer
// optimum, integer optima pairwise equal) and throws on any violation.
// Conjectured orderings are recorded in `findings` for every run.
BoundReport compare_bounds(const Instance& inst, const std::vector<FormulationTag>& tags,
                           const BnbLimits& limits = {});

// One finding serialized as a single-line JSON object, for findings files
// with one record per line.
std::string finding_line(const Finding& finding);

}  // namespace stsp
