#include "stsp/formulations.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "stsp/common.hpp"

namespace stsp {

namespace {

std::string node_suffix(int i) { return "_" + std::to_string(i); }

std::string arc_suffix(const Arc& a) {
  return "_" + std::to_string(a.tail) + "_" + std::to_string(a.head);
}

// A lone required depot admits the empty tour as the defined optimum, so the
// rows that force a departure are dropped in that case; everything else is
// emitted unconditionally.
bool lone_depot(const Instance& inst) { return inst.tour_required().size() == 1; }

// Arc variables plus the departure and flow-conservation rows shared by the
// flow-based and multicommodity builders. Returns the xt variable index per
// arc (same order as arcs.arcs).
std::vector<int> add_arc_skeleton(const Instance& inst, const ArcSet& arcs, MilpModel& model) {
  std::vector<int> xt(arcs.arcs.size());
  std::vector<RowEntry> objective;
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    xt[a] = model.add_variable("xt" + arc_suffix(arcs.arcs[a]), 0.0, 1.0, VarKind::kBinary);
    objective.push_back({xt[a], arcs.arcs[a].cost});
  }
  model.set_objective(std::move(objective), ObjSense::kMin);

  if (!lone_depot(inst)) {
    for (int i : inst.tour_required()) {
      std::vector<RowEntry> row;
      for (int a : arcs.out[i]) row.push_back({xt[a], 1.0});
      model.add_constraint("depart" + node_suffix(i), std::move(row), RowSense::kGe, 1.0);
    }
  }
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i)) continue;
    std::vector<RowEntry> row;
    for (int a : arcs.out[i]) row.push_back({xt[a], 1.0});
    for (int a : arcs.in[i]) row.push_back({xt[a], -1.0});
    model.add_constraint("balance" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  return xt;
}

// Shared body of the single-commodity builders; `cap` gives the per-arc
// commodity ceiling.
template <typename CapFn>
MilpModel build_scf_like(const Instance& inst, const char* tag, CapFn cap) {
  const ArcSet arcs = arc_expand(inst);
  MilpModel model;
  std::vector<int> xt = add_arc_skeleton(inst, arcs, model);

  std::vector<int> g(arcs.arcs.size());
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    g[a] = model.add_variable("g" + arc_suffix(arcs.arcs[a]), 0.0, cap(arcs.arcs[a]),
                              VarKind::kContinuous);
  }
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (i == 1 || !inst.node_active(i)) continue;
    std::vector<RowEntry> row;
    for (int a : arcs.in[i]) row.push_back({g[a], 1.0});
    for (int a : arcs.out[i]) row.push_back({g[a], -1.0});
    model.add_constraint("flow" + node_suffix(i), std::move(row), RowSense::kEq,
                         inst.is_tour_required(i) ? 1.0 : 0.0);
  }
  for (size_t a = 0; a < arcs.arcs.size(); ++a) {
    model.add_constraint("gcap" + arc_suffix(arcs.arcs[a]),
                         {{g[a], 1.0}, {xt[a], -cap(arcs.arcs[a])}}, RowSense::kLe, 0.0);
  }
  model.set_provenance(tag, inst.fingerprint());
  return model;
}

}  // namespace

const char* formulation_name(FormulationTag tag) {
  switch (tag) {
    case FormulationTag::kClassicalCut:
      return "classical-cut";
    case FormulationTag::kScf:
      return "scf";
    case FormulationTag::kScfStrong:
      return "scf-strong";
    case FormulationTag::kMcf:
      return "mcf";
    case FormulationTag::kTs1:
      return "ts1";
    case FormulationTag::kTs2:
      return "ts2";
  }
  return "";
}

std::optional<FormulationTag> parse_formulation_tag(std::string_view name) {
  for (FormulationTag tag :
       {FormulationTag::kClassicalCut, FormulationTag::kScf, FormulationTag::kScfStrong,
        FormulationTag::kMcf, FormulationTag::kTs1, FormulationTag::kTs2}) {
    if (name == formulation_name(tag)) return tag;
  }
  return std::nullopt;
}

BuiltFormulation build_classical(const Instance& inst) {
  MilpModel model;
  std::vector<int> x(inst.edges().size(), -1);
  std::vector<RowEntry> objective;
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    if (!inst.edge_active(e)) continue;
    const Edge& ed = inst.edges()[e];
    x[e] = model.add_variable("x_" + std::to_string(ed.u) + "_" + std::to_string(ed.v), 0.0, 2.0,
                              VarKind::kInteger);
    objective.push_back({x[e], ed.cost});
  }
  model.set_objective(std::move(objective), ObjSense::kMin);

  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i)) continue;
    const double z_lo = !lone_depot(inst) && inst.is_tour_required(i) ? 1.0 : 0.0;
    int z = model.add_variable("z" + node_suffix(i), z_lo,
                               static_cast<double>(inst.adjacency()[i].size()), VarKind::kInteger);
    std::vector<RowEntry> row;
    for (int e : inst.adjacency()[i]) row.push_back({x[e], 1.0});
    row.push_back({z, -2.0});
    model.add_constraint("parity" + node_suffix(i), std::move(row), RowSense::kEq, 0.0);
  }
  model.set_provenance(formulation_name(FormulationTag::kClassicalCut), inst.fingerprint());

  BuiltFormulation out;
  out.model = model;
  out.separation = [inst, model](const std::vector<double>& point) {
    return separate_connectivity(inst, model, point);
  };
  return out;
}

MilpModel build_scf(const Instance& inst) {
  const double cap = static_cast<double>(inst.tour_required().size()) - 1.0;
  return build_scf_like(inst, formulation_name(FormulationTag::kScf),
                        [cap](const Arc&) { return cap; });
}

MilpModel build_scf_strong(const Instance& inst, const RankVector& ranks) {
  const double n_r = static_cast<double>(inst.tour_required().size());
  return build_scf_like(inst, formulation_name(FormulationTag::kScfStrong), [&](const Arc& a) {
    return n_r - static_cast<double>(ranks.at(a.tail)) - 1.0;
  });
}

MilpModel build_mcf(const Instance& inst) {
  const ArcSet arcs = arc_expand(inst);
  MilpModel model;
  std::vector<int> xt = add_arc_skeleton(inst, arcs, model);

  for (int k : inst.tour_required()) {
    if (k == 1) continue;
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
    model.add_constraint("fsource" + node_suffix(k), imbalance(1), RowSense::kEq, -1.0);
    model.add_constraint("fdeliver" + node_suffix(k), imbalance(k), RowSense::kEq, 1.0);
    for (int i = 2; i <= inst.node_count(); ++i) {
      if (i == k || !inst.node_active(i)) continue;
      model.add_constraint("fbalance" + node_suffix(i) + node_suffix(k), imbalance(i),
                           RowSense::kEq, 0.0);
    }
    for (size_t a = 0; a < arcs.arcs.size(); ++a) {
      model.add_constraint("fcap" + arc_suffix(arcs.arcs[a]) + node_suffix(k),
                           {{f[a], 1.0}, {xt[a], -1.0}}, RowSense::kLe, 0.0);
    }
  }
  model.set_provenance(formulation_name(FormulationTag::kMcf), inst.fingerprint());
  return model;
}

MilpModel build_ts(const Instance& inst, int stages) {
  if (stages < 2) {
    throw Error("time-staged build needs at least 2 stages, got " + std::to_string(stages));
  }
  const ArcSet arcs = arc_expand(inst);
  const int n_arcs = static_cast<int>(arcs.arcs.size());
  MilpModel model;

  // Stage-major blocks: r[(k-1)*n_arcs + a] is arc a in slot k. Slot 1 of
  // every non-depot arc is pinned to zero so the walk can only open at the
  // depot.
  std::vector<int> r(static_cast<size_t>(stages) * n_arcs);
  std::vector<RowEntry> objective;
  for (int k = 1; k <= stages; ++k) {
    for (int a = 0; a < n_arcs; ++a) {
      const bool pinned = k == 1 && arcs.arcs[a].tail != 1;
      r[(k - 1) * static_cast<size_t>(n_arcs) + a] =
          model.add_variable("r" + arc_suffix(arcs.arcs[a]) + node_suffix(k), 0.0,
                             pinned ? 0.0 : 1.0, VarKind::kBinary);
      objective.push_back({r[(k - 1) * static_cast<size_t>(n_arcs) + a], arcs.arcs[a].cost});
    }
  }
  model.set_objective(std::move(objective), ObjSense::kMin);
  auto var = [&](int a, int k) { return r[(k - 1) * static_cast<size_t>(n_arcs) + a]; };

  if (!lone_depot(inst)) {
    std::vector<RowEntry> row;
    for (int a : arcs.out[1]) row.push_back({var(a, 1), 1.0});
    model.add_constraint("start", std::move(row), RowSense::kEq, 1.0);

    for (int i : inst.tour_required()) {
      std::vector<RowEntry> visit;
      for (int k = 1; k <= stages; ++k) {
        for (int a : arcs.out[i]) visit.push_back({var(a, k), 1.0});
      }
      model.add_constraint("visit" + node_suffix(i), std::move(visit), RowSense::kGe, 1.0);
    }
  }
  {
    std::vector<RowEntry> row;
    for (int k = 1; k <= stages; ++k) {
      for (int a : arcs.out[1]) row.push_back({var(a, k), 1.0});
      for (int a : arcs.in[1]) row.push_back({var(a, k), -1.0});
    }
    model.add_constraint("return", std::move(row), RowSense::kEq, 0.0);
  }
  // Arriving anywhere but the depot in slot k forces a departure in slot
  // k+1. At the depot the row relaxes to an inequality: a slot-k+1 departure
  // still needs a slot-k arrival (no parking), but the final arrival may
  // stop instead of departing again.
  for (int i = 1; i <= inst.node_count(); ++i) {
    if (!inst.node_active(i) || arcs.in[i].empty()) continue;
    for (int k = 1; k < stages; ++k) {
      std::vector<RowEntry> row;
      for (int a : arcs.in[i]) row.push_back({var(a, k), 1.0});
      for (int a : arcs.out[i]) row.push_back({var(a, k + 1), -1.0});
      model.add_constraint("chain" + node_suffix(i) + node_suffix(k), std::move(row),
                           i == 1 ? RowSense::kGe : RowSense::kEq, 0.0);
    }
  }
  model.set_provenance("ts", inst.fingerprint());
  return model;
}

BuiltFormulation build_formulation(const Instance& inst, FormulationTag tag) {
  BuiltFormulation out;
  switch (tag) {
    case FormulationTag::kClassicalCut:
      return build_classical(inst);
    case FormulationTag::kScf:
      out.model = build_scf(inst);
      return out;
    case FormulationTag::kScfStrong:
      out.model = build_scf_strong(inst, compute_ranks(inst));
      return out;
    case FormulationTag::kMcf:
      out.model = build_mcf(inst);
      return out;
    case FormulationTag::kTs1:
      out.model = build_ts(inst, 2 * inst.active_edge_count());
      out.model.set_provenance(formulation_name(tag), inst.fingerprint());
      return out;
    case FormulationTag::kTs2: {
      int active_nodes = 0;
      for (int i = 1; i <= inst.node_count(); ++i) {
        if (inst.node_active(i)) ++active_nodes;
      }
      out.model = build_ts(inst, 2 * (active_nodes - 1));
      out.model.set_provenance(formulation_name(tag), inst.fingerprint());
      return out;
    }
  }
  throw Error("unknown formulation tag");
}

std::vector<int> extract_edge_uses(const Instance& inst, const MilpModel& model,
                                   const std::vector<double>& solution) {
  if (solution.size() != static_cast<size_t>(model.n_vars())) {
    throw Error("solution length does not match the model");
  }
  auto traversals = [&](const std::string& name) -> int {
    const double v = solution[model.var_index(name)];
    const double r = std::llround(v);
    if (std::fabs(v - r) > kEpsInt) {
      throw Error("non-integral value for variable " + name);
    }
    return static_cast<int>(r);
  };

  auto is_any = [](const std::string& tag, std::initializer_list<const char*> names) {
    for (const char* n : names) {
      if (tag == n) return true;
    }
    return false;
  };
  const std::string& tag = model.tag();
  const bool undirected = is_any(tag, {"classical-cut", "sop-cut", "scptp-cut"});
  const bool directed = is_any(tag, {"scf", "scf-strong", "mcf", "sop-scf", "sop-scf-strong",
                                     "sop-mcf", "scptp-scf", "scptp-mcf"});
  const bool staged = is_any(tag, {"ts", "ts1", "ts2", "sop-ts", "scptp-ts"});
  const bool layered = tag == "stsptw";
  if (!undirected && !directed && !staged && !layered) {
    throw Error("model carries unknown formulation tag '" + tag + "'");
  }

  std::vector<int> uses(inst.edges().size(), 0);
  if (undirected) {
    for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
      if (!inst.edge_active(e)) continue;
      const Edge& ed = inst.edges()[e];
      uses[e] = traversals("x_" + std::to_string(ed.u) + "_" + std::to_string(ed.v));
    }
    return uses;
  }

  const ArcSet arcs = arc_expand(inst);
  if (arcs.arcs.empty()) return uses;
  if (directed) {
    for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
      auto [fwd, rev] = arcs.edge_arcs[e];
      if (fwd < 0) continue;
      uses[e] = traversals("xt" + arc_suffix(arcs.arcs[fwd])) +
                traversals("xt" + arc_suffix(arcs.arcs[rev]));
    }
    return uses;
  }
  // Stage and layer counts are probed by name on the first arc: slots are
  // numbered from 1, layers from 0, and every arc spans the same range.
  const char* prefix = staged ? "r" : "xt";
  const int k_first = staged ? 1 : 0;
  int k_last = k_first - 1;
  while (model.has_var(prefix + arc_suffix(arcs.arcs[0]) + node_suffix(k_last + 1))) ++k_last;
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    auto [fwd, rev] = arcs.edge_arcs[e];
    if (fwd < 0) continue;
    for (int k = k_first; k <= k_last; ++k) {
      uses[e] += traversals(prefix + arc_suffix(arcs.arcs[fwd]) + node_suffix(k));
      uses[e] += traversals(prefix + arc_suffix(arcs.arcs[rev]) + node_suffix(k));
    }
  }
  return uses;
}

}  // namespace stsp
