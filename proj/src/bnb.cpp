#include "stsp/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stsp/common.hpp"
#include "stsp/maxflow.hpp"

namespace stsp {

namespace {

// Node cutoff for pruning against the incumbent. Sits well below every
// reported-objective tolerance so a strictly better integer point is never
// fathomed away.
constexpr double kNodeCutoff = 1e-9;

// Branching state is a set of bound overrides on integer variables; the LP
// itself is shared across the whole tree, so cuts added anywhere stay valid
// everywhere (they are satisfied by every integer-feasible point).
struct Node {
  std::map<int, std::pair<double, double>> ov;
  double parent_bound = -kInf;  // min-sense relaxation value of the parent
  long long seq = 0;
};

// Best bound first, then oldest first. parent_bound of the root is the -inf
// sentinel, which also serves as the "nothing proven yet" dual bound.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.parent_bound != b.parent_bound) return a.parent_bound > b.parent_bound;
    return a.seq > b.seq;
  }
};

}  // namespace

MilpSolution solve_milp(const MilpModel& model, const SeparationCallback& sep,
                        const BnbLimits& limits) {
  // All comparisons run min-sense; `sign` maps back to the model's sense.
  const double sign = model.objective_sense() == ObjSense::kMax ? -1.0 : 1.0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto out_of_time = [&] {
    if (limits.time_limit_seconds <= 0) return false;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
           limits.time_limit_seconds;
  };

  std::vector<int> int_vars;
  for (int j = 0; j < model.n_vars(); ++j) {
    if (model.variable(j).kind != VarKind::kContinuous) int_vars.push_back(j);
  }

  LpSolver solver(model);
  MilpSolution out;

  bool have_inc = false;
  double inc_z = kInf;   // incumbent, min-sense
  double inc_obj = 0.0;  // incumbent, model sense
  std::vector<double> inc_x;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> heap;
  std::optional<Node> cur = Node{};
  long long seq_counter = 0;
  bool aborted = false;

  const auto apply_node = [&](const Node& node) {
    for (int j : int_vars) {
      auto it = node.ov.find(j);
      if (it == node.ov.end()) {
        solver.set_var_bounds(j, model.variable(j).lower, model.variable(j).upper);
      } else {
        solver.set_var_bounds(j, it->second.first, it->second.second);
      }
    }
  };

  while (cur || !heap.empty()) {
    if (!cur) {
      Node top = heap.top();
      heap.pop();
      // Fathomed by an incumbent found since the node was queued.
      if (have_inc && top.parent_bound >= inc_z - kNodeCutoff) continue;
      cur = std::move(top);
    }
    if (out.node_count >= limits.max_nodes || out_of_time()) {
      aborted = true;
      break;
    }
    ++out.node_count;
    apply_node(*cur);

    int branch_var = -1;
    double zlp = 0.0;
    std::vector<double> xlp;
    while (true) {
      LpSolution sol = solver.solve();
      if (sol.status == LpStatus::kInfeasible) break;
      if (sol.status == LpStatus::kUnbounded) throw Error("milp relaxation unbounded");
      if (sol.status != LpStatus::kOptimal) {
        log_msg(LogLevel::kError, "node %lld: relaxation did not converge, stopping early",
                out.node_count);
        aborted = true;
        break;
      }
      zlp = sign * sol.objective;
      if (have_inc && zlp >= inc_z - kNodeCutoff) break;

      // Most fractional integer variable, ties to the lowest index.
      branch_var = -1;
      double best_score = kEpsInt;
      for (int j : int_vars) {
        double f = sol.x[j] - std::floor(sol.x[j]);
        double score = std::min(f, 1.0 - f);
        if (score > best_score) {
          best_score = score;
          branch_var = j;
        }
      }

      if (branch_var < 0) {
        // Integral point. Lazy rows are exact constraints, not mere
        // strengthening, so the point may only become an incumbent once
        // separation returns empty-handed.
        if (sep) {
          std::vector<Constraint> cuts = sep(sol.x);
          if (!cuts.empty()) {
            for (const Constraint& c : cuts) solver.add_row(c);
            out.cuts_added += static_cast<int>(cuts.size());
            continue;
          }
        }
        std::vector<double> xr = sol.x;
        for (int j : int_vars) xr[j] = static_cast<double>(std::llround(xr[j]));
        double obj = 0.0;
        for (const RowEntry& e : model.objective()) obj += e.coef * xr[e.var];
        double z = sign * obj;
        if (!have_inc || z < inc_z) {
          have_inc = true;
          inc_z = z;
          inc_obj = obj;
          inc_x = std::move(xr);
        }
        break;
      }

      // Fractional point: separate exhaustively at the root, and elsewhere
      // only while no incumbent exists or the gap is already small; deep in
      // the tree branching outpaces cutting.
      const bool is_root = cur->seq == 0;
      const bool near_done = have_inc && inc_z - zlp <= 0.1 * (1.0 + std::fabs(inc_z));
      if (sep && (is_root || !have_inc || near_done)) {
        std::vector<Constraint> cuts = sep(sol.x);
        if (!cuts.empty()) {
          for (const Constraint& c : cuts) solver.add_row(c);
          out.cuts_added += static_cast<int>(cuts.size());
          continue;
        }
      }
      xlp = std::move(sol.x);
      break;
    }
    if (aborted) break;

    if (branch_var < 0 || xlp.empty()) {
      // Infeasible, bound-pruned, or integral: nothing below this node.
      cur.reset();
      continue;
    }

    double lo = model.variable(branch_var).lower;
    double hi = model.variable(branch_var).upper;
    if (auto it = cur->ov.find(branch_var); it != cur->ov.end()) {
      lo = it->second.first;
      hi = it->second.second;
    }
    const double split = std::floor(xlp[branch_var]);

    if (split + 1.0 <= hi + kEpsFeas) {
      Node up;
      up.ov = cur->ov;
      up.ov[branch_var] = {split + 1.0, hi};
      up.parent_bound = zlp;
      up.seq = ++seq_counter;
      heap.push(std::move(up));
    }
    if (split >= lo - kEpsFeas) {
      // Dive on the floor side; the ceiling child waits under best-bound.
      Node down;
      down.ov = std::move(cur->ov);
      down.ov[branch_var] = {lo, split};
      down.parent_bound = zlp;
      down.seq = ++seq_counter;
      cur = std::move(down);
    } else {
      cur.reset();
    }
  }

  if (aborted) {
    double bound_z = have_inc ? inc_z : kInf;
    if (cur) bound_z = std::min(bound_z, cur->parent_bound);
    while (!heap.empty()) {
      bound_z = std::min(bound_z, heap.top().parent_bound);
      heap.pop();
    }
    out.status = MilpStatus::kBudgetExhausted;
    out.bound = sign * bound_z;
  } else if (have_inc) {
    out.status = MilpStatus::kOptimal;
    out.bound = inc_obj;
  } else {
    out.status = MilpStatus::kInfeasible;
    out.bound = sign * kInf;
  }
  if (have_inc) {
    out.has_incumbent = true;
    out.x = std::move(inc_x);
    out.objective = inc_obj;
  }
  return out;
}

CutLpResult solve_lp_with_cuts(const MilpModel& model, const SeparationCallback& sep) {
  LpSolver solver(model);
  CutLpResult res;
  // Terminates: a returned cut is violated by at least kEpsCut, while the
  // re-solved LP satisfies every installed row to kEpsFeas < kEpsCut, so no
  // cut is ever emitted twice and the ground set is finite.
  while (true) {
    res.sol = solver.solve();
    if (res.sol.status != LpStatus::kOptimal || !sep) return res;
    std::vector<Constraint> cuts = sep(res.sol.x);
    if (cuts.empty()) return res;
    for (Constraint& c : cuts) {
      solver.add_row(c);
      res.cuts.push_back(std::move(c));
    }
    res.cuts_added = static_cast<int>(res.cuts.size());
  }
}

std::vector<Constraint> separate_connectivity(const Instance& inst, const MilpModel& model,
                                              const std::vector<double>& x) {
  struct ActiveEdge {
    int u, v, var;
    double val;
  };
  std::vector<ActiveEdge> edges;
  const std::vector<Edge>& all = inst.edges();
  for (int e = 0; e < static_cast<int>(all.size()); ++e) {
    if (!inst.edge_active(e)) continue;
    int var = model.var_index("x_" + std::to_string(all[e].u) + "_" + std::to_string(all[e].v));
    // Tiny negatives are LP roundoff; capacities must not be negative.
    edges.push_back({all[e].u, all[e].v, var, std::max(0.0, x[var])});
  }

  std::vector<Constraint> cuts;
  std::set<std::vector<int>> seen;
  for (int k : inst.tour_required()) {
    if (k == 1) continue;
    // Capacity x_e/2 per direction makes the min cut x(delta(S))/2, so the
    // degree-two requirement fails exactly when the flow is below 1.
    FlowNetwork net(inst.node_count());
    for (const ActiveEdge& ae : edges) net.add_edge(ae.u, ae.v, ae.val / 2.0, ae.val / 2.0);
    if (2.0 * net.max_flow(1, k) >= 2.0 - kEpsCut) continue;

    std::vector<char> side = net.source_side();
    std::vector<int> nodes;  // the sink side: separated from the depot
    for (int v = 1; v <= inst.node_count(); ++v) {
      if (!side[v] && inst.node_active(v)) nodes.push_back(v);
    }
    if (!seen.insert(nodes).second) continue;

    std::vector<char> in_s(inst.node_count() + 1, 0);
    for (int v : nodes) in_s[v] = 1;
    Constraint c;
    c.name = "cut";
    for (int v : nodes) c.name += "_" + std::to_string(v);
    for (const ActiveEdge& ae : edges) {
      if (in_s[ae.u] != in_s[ae.v]) c.row.push_back({ae.var, 1.0});
    }
    std::sort(c.row.begin(), c.row.end(),
              [](const RowEntry& a, const RowEntry& b) { return a.var < b.var; });
    c.sense = RowSense::kGe;
    c.rhs = 2.0;
    cuts.push_back(std::move(c));
  }
  return cuts;
}

}  // namespace stsp
