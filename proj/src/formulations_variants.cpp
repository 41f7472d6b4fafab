#include "stsp/variants.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stsp/common.hpp"
#include "stsp/maxflow.hpp"

namespace stsp {

namespace {

std::string node_suffix(int i) { return "_" + std::to_string(i); }

std::string arc_suffix(const Arc& a) {
  return "_" + std::to_string(a.tail) + "_" + std::to_string(a.head);
}

// Non-depot required nodes, ascending: what a selective walk may serve and a
// timed walk must serve.
std::vector<int> customers(const Instance& inst) {
  std::vector<int> out;
  for (int v : inst.required()) {
    if (v != 1) out.push_back(v);
  }
  return out;
}

double require_budget(const Instance& inst) {
  if (!inst.budget()) throw Error("instance carries no budget");
  return *inst.budget();
}

double revenue_of(const Instance& inst, int v) {
  if (!inst.meta(v).revenue) throw Error("node " + std::to_string(v) + " has no revenue");
  return *inst.meta(v).revenue;
}

double demand_of(const Instance& inst, int v) {
  if (!inst.meta(v).demand) throw Error("node " + std::to_string(v) + " has no demand");
  return *inst.meta(v).demand;
}

double travel_time(const Instance& inst, const Arc& a) {
  const Edge& e = inst.edges()[a.edge];
  if (!e.time) {
    throw Error("edge " + std::to_string(e.u) + " " + std::to_string(e.v) +
                " has no travel time");
  }
  return *e.time;
}

// A capacity that exceeds the total selectable demand can never bind, which
// marks a mistyped instance unless the caller opts out of the check.
double checked_capacity(const Instance& inst, const std::vector<int>& cust, bool loose_ok) {
  if (!inst.capacity()) throw Error("instance carries no capacity");
  double total = 0.0;
  for (int i : cust) total += demand_of(inst, i);
  if (*inst.capacity() > total && !loose_ok) throw Error("capacity exceeds the total demand");
  return *inst.capacity();
}

// Objective entries paying each customer's revenue on its selection variable.
std::vector<RowEntry> prize_entries(const Instance& inst, const std::vector<int>& cust,
                                    const std::vector<int>& y) {
  std::vector<RowEntry> obj;
  for (size_t c = 0; c < cust.size(); ++c) obj.push_back({y[c], revenue_of(inst, cust[c])});
  return obj;
}

void add_capacity_row(const Instance& inst, const std::vector<int>& cust,
                      const std::vector<int>& y, double capacity, MilpModel& model) {
  std::vector<RowEntry> row;
  for (size_t c = 0; c < cust.size(); ++c) row.push_back({y[c], demand_of(inst, cust[c])});
  model.add_constraint("capacity", std::move(row), RowSense::kLe, capacity);
}

void add_budget_row(const ArcSet& arcs, const std::vector<int>& xt, double budget,
                    MilpModel& model) {
  std::vector<RowEntry> row;
  for (size_t a = 0; a < arcs.arcs.size(); ++a) row.push_back({xt[a], arcs.arcs[a].cost});
  model.add_constraint("budget", std::move(row), RowSense::kLe, budget);
}

// Undirected selective skeleton: general-integer edge uses with even degree
// everywhere, one binary y per customer, and the single-node case of the
// selection cuts x(delta(i)) >= 2 y_i as static rows. The exponential family
// over larger sets lands in the separation callback.
struct CutSkeleton {
  std::vector<int> x;  // per edge index, -1 on inactive edges
  std::vector<int> y;  // aligned with the customer list
};

CutSkeleton add_cut_skeleton(const Instance& inst, const std::vector<int>& cust,
                             MilpModel& model) {
  CutSkeleton out;
  out.x.assign(inst.edges().size(), -1);
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    if (!inst.edge_active(e)) continue;
    const Edge& ed = inst.edges()[e];
    out.x[e] = model.add_variable("x_" + std::to_string(ed.u) + "_" + std::to_string(ed.v), 0.0,
                                  2.0, VarKind::kInteger);
  }
  for (int i : cust) {
    out.y.push_back(model.add_variable("y" + node_suffix(i), 0.0, 1.0, VarKind::kBinary));
  }
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i)) continue;
    int z = model.add_variable("z" + node_suffix(i), 0.0,
                               static_cast<double>(inst.adjacency()[i].size()),
                               VarKind::kInteger);
    std::vector<RowEntry> row;
    for (int e : inst.adjacency()[i]) row.push_back({out.x[e], 1.0});
    row.push_back({z, -2.0});
    model.add_constraint("parity" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  for (size_t c = 0; c < cust.size(); ++c) {
    std::vector<RowEntry> row;
    for (int e : inst.adjacency()[cust[c]]) row.push_back({out.x[e], 1.0});
    row.push_back({out.y[c], -2.0});
    model.add_constraint("serve" + node_suffix(cust[c]), std::move(row), RowSense::kGe, 0.0);
  }
  return out;
}

// Minimum-cut separation of x(delta(S)) >= 2 y_i over depot-free sets around
// each customer, the selection-scaled sibling of separate_connectivity.
std::vector<Constraint> separate_selection_cuts(const Instance& inst, const MilpModel& model,
                                                const std::vector<double>& point) {
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
    edges.push_back({all[e].u, all[e].v, var, std::max(0.0, point[var])});
  }

  std::vector<Constraint> cuts;
  std::set<std::pair<int, std::vector<int>>> seen;
  for (int i : customers(inst)) {
    if (!inst.node_active(i)) continue;
    const int yvar = model.var_index("y" + node_suffix(i));
    const double yval = std::max(0.0, point[yvar]);
    if (yval < kEpsCut) continue;
    FlowNetwork net(inst.node_count());
    for (const ActiveEdge& ae : edges) net.add_edge(ae.u, ae.v, ae.val / 2.0, ae.val / 2.0);
    if (2.0 * net.max_flow(1, i) >= 2.0 * yval - kEpsCut) continue;

    std::vector<char> side = net.source_side();
    std::vector<int> nodes;  // the sink side: separated from the depot
    for (int v = 1; v <= inst.node_count(); ++v) {
      if (!side[v] && inst.node_active(v)) nodes.push_back(v);
    }
    if (!seen.insert({i, nodes}).second) continue;

    std::vector<char> in_s(inst.node_count() + 1, 0);
    for (int v : nodes) in_s[v] = 1;
    Constraint c;
    c.name = "cut" + node_suffix(i);
    for (int v : nodes) c.name += "_" + std::to_string(v);
    for (const ActiveEdge& ae : edges) {
      if (in_s[ae.u] != in_s[ae.v]) c.row.push_back({ae.var, 1.0});
    }
    c.row.push_back({yvar, -2.0});
    std::sort(c.row.begin(), c.row.end(),
              [](const RowEntry& a, const RowEntry& b) { return a.var < b.var; });
    c.sense = RowSense::kGe;
    c.rhs = 0.0;
    cuts.push_back(std::move(c));
  }
  return cuts;
}

// Directed selective skeleton: binary arcs, flow conservation everywhere,
// and a departure from customer i whenever y_i is set. The depot departure
// is never forced, so the empty walk stays feasible.
struct SelectiveArcs {
  std::vector<int> xt;
  std::vector<int> y;
};

SelectiveArcs add_selective_arcs(const Instance& inst, const ArcSet& arcs,
                                 const std::vector<int>& cust, MilpModel& model) {
  SelectiveArcs out;
  out.xt.resize(arcs.arcs.size());
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    out.xt[a] = model.add_variable("xt" + arc_suffix(arcs.arcs[a]), 0.0, 1.0, VarKind::kBinary);
  }
  for (int i : cust) {
    out.y.push_back(model.add_variable("y" + node_suffix(i), 0.0, 1.0, VarKind::kBinary));
  }
  for (size_t c = 0; c < cust.size(); ++c) {
    std::vector<RowEntry> row;
    for (int a : arcs.out[cust[c]]) row.push_back({out.xt[a], 1.0});
    row.push_back({out.y[c], -1.0});
    model.add_constraint("serve" + node_suffix(cust[c]), std::move(row), RowSense::kGe, 0.0);
  }
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i)) continue;
    std::vector<RowEntry> row;
    for (int a : arcs.out[i]) row.push_back({out.xt[a], 1.0});
    for (int a : arcs.in[i]) row.push_back({out.xt[a], -1.0});
    model.add_constraint("balance" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  return out;
}

// Stage-indexed selective skeleton: slot 1 opens at the depot only, arrivals
// chain into next-slot departures, depot degree balances over all slots, and
// a departure from customer i in some slot backs y_i. No slot-1 departure is
// forced, so the empty walk stays feasible.
struct StagedSkeleton {
  ArcSet arcs;
  std::vector<int> r;  // stage-major, (k-1)*n_arcs + a
  std::vector<int> y;
  int stages = 0;
};

StagedSkeleton add_staged_skeleton(const Instance& inst, const std::vector<int>& cust,
                                   int stages, MilpModel& model) {
  StagedSkeleton out;
  out.arcs = arc_expand(inst);
  if (stages <= 0) {
    int active_nodes = 0;
    for (int i = 1; i <= inst.node_count(); ++i) {
      if (inst.node_active(i)) ++active_nodes;
    }
    stages = std::max(2, 2 * (active_nodes - 1));
  }
  if (stages < 2) {
    throw Error("time-staged build needs at least 2 stages, got " + std::to_string(stages));
  }
  out.stages = stages;
  const int n_arcs = static_cast<int>(out.arcs.arcs.size());
  out.r.resize(static_cast<size_t>(stages) * n_arcs);
  for (int k = 1; k <= stages; ++k) {
    for (int a = 0; a < n_arcs; ++a) {
      const bool pinned = k == 1 && out.arcs.arcs[a].tail != 1;
      out.r[(k - 1) * static_cast<size_t>(n_arcs) + a] =
          model.add_variable("r" + arc_suffix(out.arcs.arcs[a]) + node_suffix(k), 0.0,
                             pinned ? 0.0 : 1.0, VarKind::kBinary);
    }
  }
  for (int i : cust) {
    out.y.push_back(model.add_variable("y" + node_suffix(i), 0.0, 1.0, VarKind::kBinary));
  }
  auto var = [&](int a, int k) { return out.r[(k - 1) * static_cast<size_t>(n_arcs) + a]; };

  {
    std::vector<RowEntry> row;
    for (int k = 1; k <= stages; ++k) {
      for (int a : out.arcs.out[1]) row.push_back({var(a, k), 1.0});
      for (int a : out.arcs.in[1]) row.push_back({var(a, k), -1.0});
    }
    model.add_constraint("return", std::move(row), RowSense::kEq, 0.0);
  }
  // Arriving anywhere but the depot in slot k forces a departure in slot
  // k+1. At the depot the row relaxes to an inequality: a slot-k+1 departure
  // still needs a slot-k arrival (no parking), but the final arrival may
  // stop instead of departing again. The empty walk stays feasible (0 >= 0).
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i) || out.arcs.in[i].empty()) continue;
    for (int k = 1; k < stages; ++k) {
      std::vector<RowEntry> row;
      for (int a : out.arcs.in[i]) row.push_back({var(a, k), 1.0});
      for (int a : out.arcs.out[i]) row.push_back({var(a, k + 1), -1.0});
      model.add_constraint("chain" + node_suffix(i) + node_suffix(k), std::move(row),
                           i == 1 ? RowSense::kGe : RowSense::kEq, 0.0);
    }
  }
  for (size_t c = 0; c < cust.size(); ++c) {
    std::vector<RowEntry> row;
    for (int k = 1; k <= stages; ++k) {
      for (int a : out.arcs.out[cust[c]]) row.push_back({var(a, k), 1.0});
    }
    row.push_back({out.y[c], -1.0});
    model.add_constraint("serve" + node_suffix(cust[c]), std::move(row), RowSense::kGe, 0.0);
  }
  return out;
}

std::vector<RowEntry> staged_cost_entries(const StagedSkeleton& sk) {
  const int n_arcs = static_cast<int>(sk.arcs.arcs.size());
  std::vector<RowEntry> row;
  for (int k = 1; k <= sk.stages; ++k) {
    for (int a = 0; a < n_arcs; ++a) {
      row.push_back({sk.r[(k - 1) * static_cast<size_t>(n_arcs) + a], sk.arcs.arcs[a].cost});
    }
  }
  return row;
}

MilpModel sop_cut_model(const Instance& inst, const std::vector<int>& cust, double budget) {
  MilpModel model;
  CutSkeleton sk = add_cut_skeleton(inst, cust, model);
  model.set_objective(prize_entries(inst, cust, sk.y), ObjSense::kMax);
  std::vector<RowEntry> row;
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    if (sk.x[e] >= 0) row.push_back({sk.x[e], inst.edges()[e].cost});
  }
  model.add_constraint("budget", std::move(row), RowSense::kLe, budget);
  return model;
}

MilpModel sop_staged_model(const Instance& inst, const std::vector<int>& cust, double budget,
                           int stages) {
  MilpModel model;
  StagedSkeleton sk = add_staged_skeleton(inst, cust, stages, model);
  model.set_objective(prize_entries(inst, cust, sk.y), ObjSense::kMax);
  model.add_constraint("budget", staged_cost_entries(sk), RowSense::kLe, budget);
  return model;
}

MilpModel sop_mcf_model(const Instance& inst, const std::vector<int>& cust, double budget) {
  const ArcSet arcs = arc_expand(inst);
  MilpModel model;
  SelectiveArcs sel = add_selective_arcs(inst, arcs, cust, model);
  model.set_objective(prize_entries(inst, cust, sel.y), ObjSense::kMax);

  for (size_t c = 0; c < cust.size(); ++c) {
    const int k = cust[c];
    std::vector<int> f(arcs.arcs.size());
    for (size_t a = 0; a < arcs.arcs.size(); ++a) {
      f[a] = model.add_variable("f" + arc_suffix(arcs.arcs[a]) + node_suffix(k), 0.0, 1.0,
                                VarKind::kBinary);
    }
    auto imbalance = [&](int i) {
      std::vector<RowEntry> row;
      for (int a : arcs.in[i]) row.push_back({f[a], 1.0});
      for (int a : arcs.out[i]) row.push_back({f[a], -1.0});
      return row;
    };
    {
      std::vector<RowEntry> row = imbalance(1);
      row.push_back({sel.y[c], 1.0});
      model.add_constraint("fsource" + node_suffix(k), std::move(row), RowSense::kEq, 0.0);
    }
    {
      std::vector<RowEntry> row = imbalance(k);
      row.push_back({sel.y[c], -1.0});
      model.add_constraint("fdeliver" + node_suffix(k), std::move(row), RowSense::kEq, 0.0);
    }
    for (int i = 2; i <= inst.node_count(); ++i) {
      if (i == k || !inst.node_active(i)) continue;
      model.add_constraint("fbalance" + node_suffix(i) + node_suffix(k), imbalance(i),
                           RowSense::kEq, 0.0);
    }
    for (size_t a = 0; a < arcs.arcs.size(); ++a) {
      model.add_constraint("fcap" + arc_suffix(arcs.arcs[a]) + node_suffix(k),
                           {{f[a], 1.0}, {sel.xt[a], -1.0}}, RowSense::kLe, 0.0);
    }
  }
  add_budget_row(arcs, sel.xt, budget, model);
  return model;
}

// Single-commodity budget tracking: g_a carries the walk cost accumulated
// when arc a is entered, growing by the cost of every arrival, so each depot
// loop stays within budget along all its prefixes. The whole-walk budget row
// covers multi-loop walks, whose g resets at every depot restart. The strong
// caps tighten both ends of g by shortest-path distances to and from the
// depot.
MilpModel sop_scf_model(const Instance& inst, const std::vector<int>& cust, double budget,
                        bool strong) {
  const ArcSet arcs = arc_expand(inst);
  MilpModel model;
  SelectiveArcs sel = add_selective_arcs(inst, arcs, cust, model);
  model.set_objective(prize_entries(inst, cust, sel.y), ObjSense::kMax);

  std::vector<double> from_depot;
  if (strong) from_depot = shortest_paths(inst, 1, EdgeWeight::kCost);
  auto cap = [&](const Arc& a) {
    double c = budget - a.cost;
    if (strong) c -= from_depot[a.head];
    return c;
  };

  std::vector<int> g(arcs.arcs.size());
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    g[a] = model.add_variable("g" + arc_suffix(arcs.arcs[a]), 0.0,
                              std::max(0.0, cap(arcs.arcs[a])), VarKind::kContinuous);
  }
  for (int i = 2; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i)) continue;
    std::vector<RowEntry> row;
    for (int a : arcs.out[i]) row.push_back({g[a], 1.0});
    for (int a : arcs.in[i]) row.push_back({g[a], -1.0});
    for (int a : arcs.in[i]) row.push_back({sel.xt[a], -arcs.arcs[a].cost});
    model.add_constraint("accrue" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    model.add_constraint("gcap" + arc_suffix(arcs.arcs[a]),
                         {{g[a], 1.0}, {sel.xt[a], -cap(arcs.arcs[a])}}, RowSense::kLe, 0.0);
    if (strong && from_depot[arcs.arcs[a].tail] > 0.0) {
      model.add_constraint("gfloor" + arc_suffix(arcs.arcs[a]),
                           {{g[a], 1.0}, {sel.xt[a], -from_depot[arcs.arcs[a].tail]}},
                           RowSense::kGe, 0.0);
    }
  }
  add_budget_row(arcs, sel.xt, budget, model);
  return model;
}

MilpModel scptp_cut_model(const Instance& inst, const std::vector<int>& cust, double capacity) {
  MilpModel model;
  CutSkeleton sk = add_cut_skeleton(inst, cust, model);
  std::vector<RowEntry> obj = prize_entries(inst, cust, sk.y);
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    if (sk.x[e] >= 0) obj.push_back({sk.x[e], -inst.edges()[e].cost});
  }
  model.set_objective(std::move(obj), ObjSense::kMax);
  add_capacity_row(inst, cust, sk.y, capacity, model);
  return model;
}

MilpModel scptp_staged_model(const Instance& inst, const std::vector<int>& cust, double capacity,
                             int stages) {
  MilpModel model;
  StagedSkeleton sk = add_staged_skeleton(inst, cust, stages, model);
  std::vector<RowEntry> obj = prize_entries(inst, cust, sk.y);
  for (const RowEntry& e : staged_cost_entries(sk)) obj.push_back({e.var, -e.coef});
  model.set_objective(std::move(obj), ObjSense::kMax);
  add_capacity_row(inst, cust, sk.y, capacity, model);
  return model;
}

// Load tracking: g_a is the cargo on board while traversing a, dropping by
// q_i at every served customer. The depot row bounds the net load sent out,
// which across any number of depot loops equals the total delivered demand,
// so no separate capacity row is needed.
MilpModel scptp_scf_model(const Instance& inst, const std::vector<int>& cust, double capacity) {
  const ArcSet arcs = arc_expand(inst);
  MilpModel model;
  SelectiveArcs sel = add_selective_arcs(inst, arcs, cust, model);
  std::vector<RowEntry> obj = prize_entries(inst, cust, sel.y);
  for (size_t a = 0; a < arcs.arcs.size(); ++a) obj.push_back({sel.xt[a], -arcs.arcs[a].cost});
  model.set_objective(std::move(obj), ObjSense::kMax);

  std::vector<int> g(arcs.arcs.size());
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    g[a] = model.add_variable("g" + arc_suffix(arcs.arcs[a]), 0.0, capacity,
                              VarKind::kContinuous);
  }
  {
    std::vector<RowEntry> row;
    for (int a : arcs.out[1]) row.push_back({g[a], 1.0});
    for (int a : arcs.in[1]) row.push_back({g[a], -1.0});
    model.add_constraint("load", std::move(row), RowSense::kLe, capacity);
  }
  for (size_t c = 0; c < cust.size(); ++c) {
    const int i = cust[c];
    std::vector<RowEntry> row;
    for (int a : arcs.in[i]) row.push_back({g[a], 1.0});
    for (int a : arcs.out[i]) row.push_back({g[a], -1.0});
    row.push_back({sel.y[c], -demand_of(inst, i)});
    model.add_constraint("deliver" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  for (int i = 2; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i) || inst.is_tour_required(i)) continue;
    std::vector<RowEntry> row;
    for (int a : arcs.in[i]) row.push_back({g[a], 1.0});
    for (int a : arcs.out[i]) row.push_back({g[a], -1.0});
    model.add_constraint("carry" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    model.add_constraint("gcap" + arc_suffix(arcs.arcs[a]),
                         {{g[a], 1.0}, {sel.xt[a], -capacity}}, RowSense::kLe, 0.0);
  }
  return model;
}

// Demand-scaled commodities: commodity i moves q_i units when served, and
// the per-arc coupling rows cap the cargo sharing an arc by the capacity.
// They cannot bound the whole tour once the walk restocks nothing yet passes
// the depot, so the aggregate capacity row stays.
MilpModel scptp_mcf_model(const Instance& inst, const std::vector<int>& cust, double capacity) {
  const ArcSet arcs = arc_expand(inst);
  MilpModel model;
  SelectiveArcs sel = add_selective_arcs(inst, arcs, cust, model);
  std::vector<RowEntry> obj = prize_entries(inst, cust, sel.y);
  for (size_t a = 0; a < arcs.arcs.size(); ++a) obj.push_back({sel.xt[a], -arcs.arcs[a].cost});
  model.set_objective(std::move(obj), ObjSense::kMax);

  std::vector<std::vector<int>> f(cust.size());
  for (size_t c = 0; c < cust.size(); ++c) {
    const int k = cust[c];
    f[c].resize(arcs.arcs.size());
    for (size_t a = 0; a < arcs.arcs.size(); ++a) {
      f[c][a] = model.add_variable("f" + arc_suffix(arcs.arcs[a]) + node_suffix(k), 0.0, 1.0,
                                   VarKind::kBinary);
    }
    auto imbalance = [&](int i) {
      std::vector<RowEntry> row;
      for (int a : arcs.in[i]) row.push_back({f[c][a], 1.0});
      for (int a : arcs.out[i]) row.push_back({f[c][a], -1.0});
      return row;
    };
    {
      std::vector<RowEntry> row = imbalance(1);
      row.push_back({sel.y[c], 1.0});
      model.add_constraint("fsource" + node_suffix(k), std::move(row), RowSense::kEq, 0.0);
    }
    {
      std::vector<RowEntry> row = imbalance(k);
      row.push_back({sel.y[c], -1.0});
      model.add_constraint("fdeliver" + node_suffix(k), std::move(row), RowSense::kEq, 0.0);
    }
    for (int i = 2; i <= inst.node_count(); ++i) {
      if (i == k || !inst.node_active(i)) continue;
      model.add_constraint("fbalance" + node_suffix(i) + node_suffix(k), imbalance(i),
                           RowSense::kEq, 0.0);
    }
    for (size_t a = 0; a < arcs.arcs.size(); ++a) {
      model.add_constraint("fcap" + arc_suffix(arcs.arcs[a]) + node_suffix(k),
                           {{f[c][a], 1.0}, {sel.xt[a], -1.0}}, RowSense::kLe, 0.0);
    }
  }
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    std::vector<RowEntry> row;
    for (size_t c = 0; c < cust.size(); ++c) {
      row.push_back({f[c][a], demand_of(inst, cust[c])});
    }
    row.push_back({sel.xt[a], -capacity});
    model.add_constraint("qcap" + arc_suffix(arcs.arcs[a]), std::move(row), RowSense::kLe, 0.0);
  }
  add_capacity_row(inst, cust, sel.y, capacity, model);
  return model;
}

}  // namespace

const char* variant_name(VariantTag tag) {
  switch (tag) {
    case VariantTag::kSopCut:
      return "sop-cut";
    case VariantTag::kSopTs:
      return "sop-ts";
    case VariantTag::kSopMcf:
      return "sop-mcf";
    case VariantTag::kSopScf:
      return "sop-scf";
    case VariantTag::kSopScfStrong:
      return "sop-scf-strong";
    case VariantTag::kScptpCut:
      return "scptp-cut";
    case VariantTag::kScptpTs:
      return "scptp-ts";
    case VariantTag::kScptpScf:
      return "scptp-scf";
    case VariantTag::kScptpMcf:
      return "scptp-mcf";
    case VariantTag::kStsptw:
      return "stsptw";
  }
  return "";
}

std::optional<VariantTag> parse_variant_tag(std::string_view name) {
  for (VariantTag tag :
       {VariantTag::kSopCut, VariantTag::kSopTs, VariantTag::kSopMcf, VariantTag::kSopScf,
        VariantTag::kSopScfStrong, VariantTag::kScptpCut, VariantTag::kScptpTs,
        VariantTag::kScptpScf, VariantTag::kScptpMcf, VariantTag::kStsptw}) {
    if (name == variant_name(tag)) return tag;
  }
  return std::nullopt;
}

BuiltFormulation build_sop(const Instance& inst, VariantTag tag, int stages) {
  const double budget = require_budget(inst);
  const std::vector<int> cust = customers(inst);
  BuiltFormulation out;
  switch (tag) {
    case VariantTag::kSopCut:
      out.model = sop_cut_model(inst, cust, budget);
      break;
    case VariantTag::kSopTs:
      out.model = sop_staged_model(inst, cust, budget, stages);
      break;
    case VariantTag::kSopMcf:
      out.model = sop_mcf_model(inst, cust, budget);
      break;
    case VariantTag::kSopScf:
      out.model = sop_scf_model(inst, cust, budget, false);
      break;
    case VariantTag::kSopScfStrong:
      out.model = sop_scf_model(inst, cust, budget, true);
      break;
    default:
      throw Error(std::string("tag ") + variant_name(tag) + " is not an orienteering tag");
  }
  out.model.set_provenance(variant_name(tag), inst.fingerprint());
  if (tag == VariantTag::kSopCut) {
    const MilpModel model = out.model;
    out.separation = [inst, model](const std::vector<double>& point) {
      return separate_selection_cuts(inst, model, point);
    };
  }
  return out;
}

BuiltFormulation build_scptp(const Instance& inst, VariantTag tag, int stages,
                             bool loose_capacity_ok) {
  const std::vector<int> cust = customers(inst);
  const double capacity = checked_capacity(inst, cust, loose_capacity_ok);
  BuiltFormulation out;
  switch (tag) {
    case VariantTag::kScptpCut:
      out.model = scptp_cut_model(inst, cust, capacity);
      break;
    case VariantTag::kScptpTs:
      out.model = scptp_staged_model(inst, cust, capacity, stages);
      break;
    case VariantTag::kScptpScf:
      out.model = scptp_scf_model(inst, cust, capacity);
      break;
    case VariantTag::kScptpMcf:
      out.model = scptp_mcf_model(inst, cust, capacity);
      break;
    default:
      throw Error(std::string("tag ") + variant_name(tag) + " is not a profitable-tour tag");
  }
  out.model.set_provenance(variant_name(tag), inst.fingerprint());
  if (tag == VariantTag::kScptpCut) {
    const MilpModel model = out.model;
    out.separation = [inst, model](const std::vector<double>& point) {
      return separate_selection_cuts(inst, model, point);
    };
  }
  return out;
}

MilpModel build_stsptw(const Instance& inst) {
  if (!inst.horizon()) throw Error("instance carries no horizon");
  const double horizon = *inst.horizon();
  const std::vector<int> cust = customers(inst);
  const int n_r = static_cast<int>(cust.size());
  for (int i : cust) {
    const NodeMeta& m = inst.meta(i);
    if (!m.window) throw Error("node " + std::to_string(i) + " has no time window");
    if (m.window->first + m.service > horizon) {
      throw Error("service at node " + std::to_string(i) + " cannot finish by the deadline");
    }
  }
  const ArcSet arcs = arc_expand(inst);
  const int n_arcs = static_cast<int>(arcs.arcs.size());
  std::vector<double> tt(n_arcs);
  for (int a = 0; a < n_arcs; ++a) tt[a] = travel_time(inst, arcs.arcs[a]);
  std::vector<int> cust_index(inst.node_count() + 1, -1);
  for (size_t c = 0; c < cust.size(); ++c) cust_index[cust[c]] = static_cast<int>(c);

  MilpModel model;
  // Layer k sits between the k-th and (k+1)-th service: xt and its clock g
  // are replicated per layer 0..n_r, and y_i_k = 1 says node i is served
  // k-th. The walk starts in layer 0 and returns in layer n_r.
  std::vector<int> xt(static_cast<size_t>(n_r + 1) * n_arcs);
  std::vector<int> g(xt.size());
  std::vector<RowEntry> objective;
  for (int k = 0; k <= n_r; ++k) {
    for (int a = 0; a < n_arcs; ++a) {
      xt[static_cast<size_t>(k) * n_arcs + a] = model.add_variable(
          "xt" + arc_suffix(arcs.arcs[a]) + node_suffix(k), 0.0, 1.0, VarKind::kBinary);
      objective.push_back({xt[static_cast<size_t>(k) * n_arcs + a], arcs.arcs[a].cost});
    }
  }
  for (int k = 0; k <= n_r; ++k) {
    for (int a = 0; a < n_arcs; ++a) {
      g[static_cast<size_t>(k) * n_arcs + a] =
          model.add_variable("g" + arc_suffix(arcs.arcs[a]) + node_suffix(k), 0.0,
                             std::max(0.0, horizon - tt[a]), VarKind::kContinuous);
    }
  }
  std::vector<int> y(static_cast<size_t>(n_r) * n_r);
  for (size_t c = 0; c < cust.size(); ++c) {
    for (int k = 1; k <= n_r; ++k) {
      y[c * n_r + (k - 1)] = model.add_variable(
          "y" + node_suffix(cust[c]) + node_suffix(k), 0.0, 1.0, VarKind::kBinary);
    }
  }
  model.set_objective(std::move(objective), ObjSense::kMin);
  auto xt_at = [&](int a, int k) { return xt[static_cast<size_t>(k) * n_arcs + a]; };
  auto g_at = [&](int a, int k) { return g[static_cast<size_t>(k) * n_arcs + a]; };
  auto y_at = [&](int c, int k) { return y[static_cast<size_t>(c) * n_r + (k - 1)]; };

  if (n_r > 0) {
    std::vector<RowEntry> row;
    for (int a : arcs.out[1]) row.push_back({xt_at(a, 0), 1.0});
    model.add_constraint("start", std::move(row), RowSense::kEq, 1.0);
  }
  for (int k = 1; k < n_r; ++k) {
    std::vector<RowEntry> row;
    for (int a : arcs.in[1]) row.push_back({xt_at(a, k), 1.0});
    for (int a : arcs.out[1]) row.push_back({xt_at(a, k), -1.0});
    model.add_constraint("depotbal" + node_suffix(k), std::move(row), RowSense::kEq, 0.0);
  }
  if (n_r > 0) {
    std::vector<RowEntry> row;
    for (int a : arcs.in[1]) row.push_back({xt_at(a, n_r), 1.0});
    model.add_constraint("finish", std::move(row), RowSense::kEq, 1.0);
  }
  for (size_t c = 0; c < cust.size(); ++c) {
    std::vector<RowEntry> row;
    for (int k = 1; k <= n_r; ++k) row.push_back({y_at(static_cast<int>(c), k), 1.0});
    model.add_constraint("assign" + node_suffix(cust[c]), std::move(row), RowSense::kEq, 1.0);
  }
  for (int k = 1; k <= n_r; ++k) {
    std::vector<RowEntry> row;
    for (size_t c = 0; c < cust.size(); ++c) row.push_back({y_at(static_cast<int>(c), k), 1.0});
    model.add_constraint("slot" + node_suffix(k), std::move(row), RowSense::kEq, 1.0);
  }

  // Degree balance per layer. A customer arrival may be absorbed by its
  // service, which re-emits the walk one layer up.
  for (size_t c = 0; c < cust.size(); ++c) {
    const int i = cust[c];
    for (int k = 0; k <= n_r; ++k) {
      std::vector<RowEntry> row;
      for (int a : arcs.in[i]) row.push_back({xt_at(a, k), 1.0});
      for (int a : arcs.out[i]) row.push_back({xt_at(a, k), -1.0});
      if (k >= 1) row.push_back({y_at(static_cast<int>(c), k), 1.0});
      if (k < n_r) row.push_back({y_at(static_cast<int>(c), k + 1), -1.0});
      model.add_constraint("reqbal" + node_suffix(i) + node_suffix(k), std::move(row),
                           RowSense::kEq, 0.0);
    }
  }
  for (int i = 2; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i) || inst.is_tour_required(i)) continue;
    for (int k = 0; k <= n_r; ++k) {
      std::vector<RowEntry> row;
      for (int a : arcs.in[i]) row.push_back({xt_at(a, k), 1.0});
      for (int a : arcs.out[i]) row.push_back({xt_at(a, k), -1.0});
      model.add_constraint("bal" + node_suffix(i) + node_suffix(k), std::move(row),
                           RowSense::kEq, 0.0);
    }
  }

  // Clock propagation: departures leave no earlier than arrivals landed. A
  // customer's cross rows couple its layer-k arrivals to layer-k+1
  // departures, paying the service time of slot k+1; the depot and the
  // non-required nodes are coupled within the layer. The depot has no
  // layer-n_r row, where the walk ends.
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i)) continue;
    const bool is_cust = cust_index[i] >= 0;
    const int k_max = i == 1 ? n_r - 1 : is_cust ? n_r - 1 : n_r;
    for (int k = 0; k <= k_max; ++k) {
      std::vector<RowEntry> row;
      for (int a : arcs.out[i]) row.push_back({g_at(a, is_cust ? k + 1 : k), 1.0});
      for (int a : arcs.in[i]) row.push_back({g_at(a, k), -1.0});
      for (int a : arcs.in[i]) row.push_back({xt_at(a, k), -tt[a]});
      if (is_cust) row.push_back({y_at(cust_index[i], k + 1), -inst.meta(i).service});
      model.add_constraint("clock" + node_suffix(i) + node_suffix(k), std::move(row),
                           RowSense::kGe, 0.0);
    }
  }
  // A customer's pass-through departures stay in the arrival layer, so they
  // need the same coupling within the layer. The slot-k+1 service absorbs
  // one arrival into the next layer; its window close already bounds every
  // arrival clock of that layer, so the window close relaxes the row exactly
  // when the service is scheduled there.
  for (size_t c = 0; c < cust.size(); ++c) {
    const int i = cust[c];
    for (int k = 0; k <= n_r; ++k) {
      std::vector<RowEntry> row;
      for (int a : arcs.out[i]) row.push_back({g_at(a, k), 1.0});
      for (int a : arcs.in[i]) row.push_back({g_at(a, k), -1.0});
      for (int a : arcs.in[i]) row.push_back({xt_at(a, k), -tt[a]});
      if (k < n_r) {
        row.push_back({y_at(static_cast<int>(c), k + 1), inst.meta(i).window->second});
      }
      model.add_constraint("dwell" + node_suffix(i) + node_suffix(k), std::move(row),
                           RowSense::kGe, 0.0);
    }
  }

  // Window rows for the k-th service at i: the post-service departure waits
  // for the window to open, and the pre-service arrival lands by its close.
  for (size_t c = 0; c < cust.size(); ++c) {
    const int i = cust[c];
    const auto [wa, wb] = *inst.meta(i).window;
    for (int k = 1; k <= n_r; ++k) {
      std::vector<RowEntry> row;
      for (int a : arcs.out[i]) row.push_back({g_at(a, k), 1.0});
      row.push_back({y_at(static_cast<int>(c), k), -(wa + inst.meta(i).service)});
      model.add_constraint("wlow" + node_suffix(i) + node_suffix(k), std::move(row),
                           RowSense::kGe, 0.0);

      row.clear();
      for (int a : arcs.in[i]) row.push_back({g_at(a, k - 1), 1.0});
      for (int a : arcs.in[i]) row.push_back({xt_at(a, k - 1), tt[a]});
      row.push_back({y_at(static_cast<int>(c), k), horizon - wb});
      model.add_constraint("whigh" + node_suffix(i) + node_suffix(k), std::move(row),
                           RowSense::kLe, horizon);
    }
  }

  for (int k = 0; k <= n_r; ++k) {
    for (int a = 0; a < n_arcs; ++a) {
      model.add_constraint("gcap" + arc_suffix(arcs.arcs[a]) + node_suffix(k),
                           {{g_at(a, k), 1.0}, {xt_at(a, k), -(horizon - tt[a])}},
                           RowSense::kLe, 0.0);
    }
  }
  model.set_provenance(variant_name(VariantTag::kStsptw), inst.fingerprint());
  return model;
}

BuiltFormulation build_variant(const Instance& inst, VariantTag tag) {
  switch (tag) {
    case VariantTag::kSopCut:
    case VariantTag::kSopTs:
    case VariantTag::kSopMcf:
    case VariantTag::kSopScf:
    case VariantTag::kSopScfStrong:
      return build_sop(inst, tag);
    case VariantTag::kScptpCut:
    case VariantTag::kScptpTs:
    case VariantTag::kScptpScf:
    case VariantTag::kScptpMcf:
      return build_scptp(inst, tag);
    case VariantTag::kStsptw: {
      BuiltFormulation out;
      out.model = build_stsptw(inst);
      return out;
    }
  }
  throw Error("unknown variant tag");
}

std::vector<int> extract_selected(const Instance& inst, const MilpModel& model,
                                  const std::vector<double>& solution) {
  if (solution.size() != static_cast<size_t>(model.n_vars())) {
    throw Error("solution length does not match the model");
  }
  auto picked = [&](const std::string& name) {
    const double v = solution[model.var_index(name)];
    const double r = std::llround(v);
    if (std::fabs(v - r) > kEpsInt) {
      throw Error("non-integral value for variable " + name);
    }
    return r != 0.0;
  };
  std::vector<int> out;
  for (int i : customers(inst)) {
    const std::string flat = "y" + node_suffix(i);
    if (model.has_var(flat)) {
      if (picked(flat)) out.push_back(i);
      continue;
    }
    if (!model.has_var(flat + node_suffix(1))) {
      throw Error("model has no selection variable for node " + std::to_string(i));
    }
    for (int k = 1; model.has_var(flat + node_suffix(k)); ++k) {
      if (picked(flat + node_suffix(k))) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

std::vector<int> depot_component_uses(const Instance& inst, std::vector<int> uses) {
  if (uses.size() != inst.edges().size()) {
    throw Error("edge_uses length does not match the edge list");
  }
  std::vector<char> reach(inst.node_count() + 1, 0);
  reach[1] = 1;
  std::vector<int> stack = {1};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int e : inst.adjacency()[v]) {
      if (uses[e] == 0) continue;
      const Edge& edge = inst.edges()[e];
      const int w = edge.u == v ? edge.v : edge.u;
      if (!reach[w]) {
        reach[w] = 1;
        stack.push_back(w);
      }
    }
  }
  for (size_t e = 0; e < uses.size(); ++e) {
    if (uses[e] != 0 && !reach[inst.edges()[e].u]) uses[e] = 0;
  }
  return uses;
}

}  // namespace stsp
