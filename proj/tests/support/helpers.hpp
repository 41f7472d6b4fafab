#pragma once

// Test-side oracles and instance fabricators. Everything here is written
// independently of the library internals it checks: Bellman-Ford instead of
// Dijkstra, exhaustive path enumeration instead of ranked relaxation.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "stsp/instance.hpp"
#include "stsp/milp.hpp"

namespace testsup {

// Raw-engine uniform draw; std distributions are implementation-defined and
// would make seeded expectations non-portable.
inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
}

inline std::vector<double> bellman_ford(const stsp::Instance& inst, int source,
                                        stsp::EdgeWeight weight) {
  const int n = inst.node_count();
  std::vector<double> dist(n + 1, stsp::kUnreachable);
  dist[source] = 0.0;
  auto entry_cost = [&](const stsp::Edge& e, int head) {
    switch (weight) {
      case stsp::EdgeWeight::kCost:
        return e.cost;
      case stsp::EdgeWeight::kTime:
        return *e.time;
      case stsp::EdgeWeight::kRequiredCount:
        return head != 1 && inst.is_tour_required(head) ? 1.0 : 0.0;
    }
    return 0.0;
  };
  for (int round = 0; round < n; ++round) {
    bool changed = false;
    for (size_t e = 0; e < inst.edges().size(); ++e) {
      if (!inst.edge_active(static_cast<int>(e))) continue;
      const stsp::Edge& edge = inst.edges()[e];
      for (auto [a, b] : {std::pair{edge.u, edge.v}, std::pair{edge.v, edge.u}}) {
        if (dist[a] >= stsp::kUnreachable) continue;
        double nd = dist[a] + entry_cost(edge, b);
        if (nd < dist[b]) {
          dist[b] = nd;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return dist;
}

// Minimum count of non-depot required nodes (target included when required)
// over all simple depot->target paths. Exponential; keep n small.
inline int exhaustive_rank(const stsp::Instance& inst, int target) {
  int best = 1 << 20;
  std::vector<char> used(inst.node_count() + 1, 0);
  used[1] = 1;
  auto count_of = [&](int v) { return v != 1 && inst.is_tour_required(v) ? 1 : 0; };
  auto dfs = [&](auto&& self, int at, int count) -> void {
    if (at == target) {
      best = std::min(best, count);
      return;
    }
    for (int e : inst.adjacency()[at]) {
      const stsp::Edge& edge = inst.edges()[e];
      int next = edge.u == at ? edge.v : edge.u;
      if (used[next]) continue;
      used[next] = 1;
      self(self, next, count + count_of(next));
      used[next] = 0;
    }
  };
  dfs(dfs, 1, 0);
  return best;
}

// Connected random instance: spanning tree plus extra random edges, integer
// costs in 1..9, `n_required` required nodes drawn from 2..n plus the depot
// when `depot_required`. Emits instance-grammar text so the parser stays the
// single construction path.
inline std::string random_instance_text(std::mt19937& rng, int n, int m, int n_required,
                                        bool depot_required = true) {
  std::set<std::pair<int, int>> picked;
  std::string text = "nodes " + std::to_string(n) + "\n";
  for (int v = 2; v <= n; ++v) {
    int u = uniform_int(rng, 1, v - 1);
    picked.insert({u, v});
  }
  int max_edges = n * (n - 1) / 2;
  while (static_cast<int>(picked.size()) < std::min(m, max_edges)) {
    int u = uniform_int(rng, 1, n);
    int v = uniform_int(rng, 1, n);
    if (u == v) continue;
    picked.insert({std::min(u, v), std::max(u, v)});
  }
  for (auto [u, v] : picked) {
    text += "edge " + std::to_string(u) + " " + std::to_string(v) + " " +
            std::to_string(uniform_int(rng, 1, 9)) + "\n";
  }
  std::vector<int> pool;
  for (int v = 2; v <= n; ++v) pool.push_back(v);
  for (size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[uniform_int(rng, 0, static_cast<int>(i) - 1)]);
  }
  std::vector<int> req;
  if (depot_required) req.push_back(1);
  for (int i = 0; i < n_required && i < static_cast<int>(pool.size()); ++i) {
    req.push_back(pool[i]);
  }
  std::sort(req.begin(), req.end());
  text += "required";
  for (int v : req) text += " " + std::to_string(v);
  text += "\n";
  return text;
}

inline const char* kPathInstance =
    "nodes 3\n"
    "required 1 3\n"
    "edge 1 2 1\n"
    "edge 2 3 1\n";

// Four-node time-window example: unit costs and times, hard windows at the
// three customers, depot horizon 10. Service times stay zero here; the
// separate kWindowInstanceSlowService variant carries unit service times.
inline const char* kWindowInstance =
    "nodes 4\n"
    "required 2 3 4\n"
    "edge 1 2 1 1\n"
    "edge 1 3 1 1\n"
    "edge 2 4 1 1\n"
    "window 2 1 1\n"
    "window 3 3 3\n"
    "window 4 6 6\n"
    "horizon 10\n";

inline const char* kWindowInstanceSlowService =
    "nodes 4\n"
    "required 2 3 4\n"
    "edge 1 2 1 1\n"
    "edge 1 3 1 1\n"
    "edge 2 4 1 1\n"
    "service 2 1\n"
    "service 3 1\n"
    "service 4 1\n"
    "window 2 1 1\n"
    "window 3 3 3\n"
    "window 4 6 6\n"
    "horizon 10\n";

// Small random LP with a bound-shape zoo (boxes, half-lines, free and fixed
// columns) and integer data, so reference comparisons stay clean. Rows are
// anchored to a random in-bounds point, which keeps most draws feasible;
// roughly a quarter of the rows push against the anchor instead, so the
// infeasible and unbounded statuses still show up across a seeded batch.
inline stsp::MilpModel random_lp_model(std::mt19937& rng, int max_vars = 30,
                                       int max_rows = 30) {
  stsp::MilpModel m;
  const int n = uniform_int(rng, 1, max_vars);
  const int rows = uniform_int(rng, 1, max_rows);
  std::vector<double> anchor(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double lo = 0.0, hi = stsp::kInf;
    switch (uniform_int(rng, 0, 9)) {
      case 0:
      case 1:
      case 2:
      case 3:
        hi = uniform_int(rng, 1, 10);
        break;
      case 4:
      case 5:
        break;  // [0, inf)
      case 6:
        lo = -5;
        hi = 5;
        break;
      case 7:
        lo = -stsp::kInf;
        break;  // free
      case 8:
        lo = -stsp::kInf;
        hi = uniform_int(rng, 0, 6);
        break;
      case 9:
        lo = hi = uniform_int(rng, -3, 3);
        break;
    }
    m.add_variable("v" + std::to_string(j), lo, hi, stsp::VarKind::kContinuous);
    if (lo > -stsp::kInf && hi < stsp::kInf) {
      anchor[j] = uniform_int(rng, static_cast<int>(lo), static_cast<int>(hi));
    } else if (lo > -stsp::kInf) {
      anchor[j] = lo + uniform_int(rng, 0, 6);
    } else if (hi < stsp::kInf) {
      anchor[j] = hi - uniform_int(rng, 0, 6);
    } else {
      anchor[j] = uniform_int(rng, -4, 4);
    }
  }
  const bool tainted = uniform_int(rng, 0, 9) < 4;
  for (int i = 0; i < rows; ++i) {
    std::vector<stsp::RowEntry> row;
    const int nnz = uniform_int(rng, 1, std::min(4, n));
    std::set<int> used;
    while (static_cast<int>(used.size()) < nnz) used.insert(uniform_int(rng, 0, n - 1));
    double at_anchor = 0.0;
    for (int j : used) {
      int coef = 0;
      while (coef == 0) coef = uniform_int(rng, -4, 4);
      row.push_back({j, static_cast<double>(coef)});
      at_anchor += coef * anchor[j];
    }
    auto sense = static_cast<stsp::RowSense>(uniform_int(rng, 0, 2));
    double rhs = at_anchor;
    bool adversarial = tainted && uniform_int(rng, 0, 2) == 0;
    switch (sense) {
      case stsp::RowSense::kLe:
        rhs += adversarial ? -uniform_int(rng, 1, 10) : uniform_int(rng, 0, 5);
        break;
      case stsp::RowSense::kGe:
        rhs += adversarial ? uniform_int(rng, 1, 10) : -uniform_int(rng, 0, 5);
        break;
      case stsp::RowSense::kEq:
        if (adversarial) rhs += uniform_int(rng, 1, 6);
        break;
    }
    m.add_constraint("r" + std::to_string(i), row, sense, rhs);
  }
  std::vector<stsp::RowEntry> obj;
  for (int j = 0; j < n; ++j) {
    int c = uniform_int(rng, -5, 5);
    if (c != 0) obj.push_back({j, static_cast<double>(c)});
  }
  m.set_objective(obj, stsp::ObjSense::kMin);
  return m;
}

// Rebuilds the model with one variable's bounds replaced; MilpModel is
// immutable once built, so branching tests clone.
inline stsp::MilpModel clone_with_bounds(const stsp::MilpModel& model, int var,
                                         double lo, double hi) {
  stsp::MilpModel out;
  for (int j = 0; j < model.n_vars(); ++j) {
    const stsp::Variable& v = model.variable(j);
    if (j == var) {
      out.add_variable(v.name, lo, hi, v.kind);
    } else {
      out.add_variable(v.name, v.lower, v.upper, v.kind);
    }
  }
  for (const stsp::Constraint& c : model.constraints()) {
    out.add_constraint(c.name, c.row, c.sense, c.rhs);
  }
  out.set_objective(model.objective(), model.objective_sense());
  return out;
}

}  // namespace testsup
