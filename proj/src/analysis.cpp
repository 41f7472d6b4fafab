#include "stsp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "stsp/lp.hpp"
#include "stsp/variants.hpp"

namespace stsp {
namespace {

std::string node_suffix(int v) { return "_" + std::to_string(v); }

// Projected edge values x_e = xt_fwd + xt_rev of a directed-model LP point.
std::vector<double> project_edges(const Instance& inst, const MilpModel& model,
                                  const std::vector<double>& point) {
  const ArcSet arcs = arc_expand(inst);
  std::vector<double> x(inst.edges().size(), 0.0);
  for (size_t e = 0; e < inst.edges().size(); ++e) {
    const auto [fwd, rev] = arcs.edge_arcs[e];
    if (fwd < 0) continue;
    const Arc& a = arcs.arcs[fwd];
    const std::string head = "xt" + node_suffix(a.tail) + node_suffix(a.head);
    const std::string back = "xt" + node_suffix(a.head) + node_suffix(a.tail);
    x[e] = point[model.var_index(head)] + point[model.var_index(back)];
  }
  return x;
}

// Active non-depot nodes, the ground set of every subset scan.
std::vector<int> scan_nodes(const Instance& inst, int limit, const char* what) {
  std::vector<int> others;
  int active = inst.node_active(1) ? 1 : 0;
  for (int v = 2; v <= inst.node_count(); ++v) {
    if (!inst.node_active(v)) continue;
    ++active;
    others.push_back(v);
  }
  if (active > limit) {
    throw Error(std::string(what) + " is limited to " + std::to_string(limit) +
                " active nodes, instance has " + std::to_string(active));
  }
  return others;
}

std::string subset_label(const std::vector<int>& others, unsigned mask) {
  std::string s = "S={";
  bool first = true;
  for (size_t i = 0; i < others.size(); ++i) {
    if (!(mask >> i & 1u)) continue;
    if (!first) s += ",";
    s += std::to_string(others[i]);
    first = false;
  }
  return s + "}";
}

// Gate every audit on the point actually lying in the model's relaxation.
bool gate(const MilpModel& model, const std::vector<double>& point, ProjectionReport& report) {
  report.max_residual = lp_residual(model, point);
  if (report.max_residual > kEpsFeas) {
    report.feasible = false;
    return false;
  }
  return true;
}

void record(ProjectionReport& report, double slack, std::string label) {
  ++report.checked;
  if (slack < report.worst_slack) {
    report.worst_slack = slack;
    report.worst_label = std::move(label);
  }
}

}  // namespace

double lp_residual(const MilpModel& model, const std::vector<double>& point) {
  if (point.size() != static_cast<size_t>(model.n_vars())) {
    throw Error("solution length does not match the model");
  }
  double worst = 0.0;
  for (int j = 0; j < model.n_vars(); ++j) {
    const Variable& var = model.variable(j);
    worst = std::max(worst, var.lower - point[j]);
    worst = std::max(worst, point[j] - var.upper);
  }
  for (const Constraint& row : model.constraints()) {
    double lhs = 0.0;
    for (const RowEntry& entry : row.row) lhs += entry.coef * point[entry.var];
    switch (row.sense) {
      case RowSense::kLe:
        worst = std::max(worst, lhs - row.rhs);
        break;
      case RowSense::kGe:
        worst = std::max(worst, row.rhs - lhs);
        break;
      case RowSense::kEq:
        worst = std::max(worst, std::fabs(lhs - row.rhs));
        break;
    }
  }
  return worst;
}

ProjectionReport check_flow_projection(const Instance& inst, const std::vector<double>& point) {
  ProjectionReport report;
  const MilpModel model = build_scf(inst);
  if (!gate(model, point, report)) return report;
  const std::vector<int> others = scan_nodes(inst, 10, "flow projection audit");
  const std::vector<double> x = project_edges(inst, model, point);
  const double n_r = static_cast<double>(inst.tour_required().size());

  for (unsigned mask = 1; mask < (1u << others.size()); ++mask) {
    std::vector<char> in_s(inst.node_count() + 1, 0);
    int required = 0;
    for (size_t i = 0; i < others.size(); ++i) {
      if (!(mask >> i & 1u)) continue;
      in_s[others[i]] = 1;
      if (inst.is_required(others[i])) ++required;
    }
    if (required == 0) continue;
    double boundary = 0.0;
    for (size_t e = 0; e < inst.edges().size(); ++e) {
      const Edge& edge = inst.edges()[e];
      if (inst.edge_active(static_cast<int>(e)) && in_s[edge.u] != in_s[edge.v]) {
        boundary += x[e];
      }
    }
    record(report, boundary - 2.0 * required / (n_r - 1.0), subset_label(others, mask));
  }
  return report;
}

ProjectionReport check_ranked_flow_projection(const Instance& inst,
                                              const std::vector<double>& point) {
  ProjectionReport report;
  const RankVector ranks = compute_ranks(inst);
  const MilpModel model = build_scf_strong(inst, ranks);
  if (!gate(model, point, report)) return report;
  const std::vector<int> others = scan_nodes(inst, 10, "ranked flow projection audit");
  const std::vector<double> x = project_edges(inst, model, point);
  const double n_r = static_cast<double>(inst.tour_required().size());

  for (unsigned mask = 1; mask < (1u << others.size()); ++mask) {
    std::vector<char> in_s(inst.node_count() + 1, 0);
    int required = 0;
    for (size_t i = 0; i < others.size(); ++i) {
      if (!(mask >> i & 1u)) continue;
      in_s[others[i]] = 1;
      if (inst.is_required(others[i])) ++required;
    }
    if (required == 0) continue;

    // Boundary edges keyed by their outside endpoint's rank.
    double boundary = 0.0;
    int lo = -1, hi = -1;
    std::vector<std::pair<int, double>> outside;  // (rank of outside node, x_e)
    for (size_t e = 0; e < inst.edges().size(); ++e) {
      const Edge& edge = inst.edges()[e];
      if (!inst.edge_active(static_cast<int>(e)) || in_s[edge.u] == in_s[edge.v]) continue;
      boundary += x[e];
      const int out_node = in_s[edge.u] ? edge.v : edge.u;
      const int rank = ranks.at(out_node);
      outside.push_back({rank, x[e]});
      lo = lo < 0 ? rank : std::min(lo, rank);
      hi = std::max(hi, rank);
    }
    if (lo < 0) continue;  // isolated subset, nothing adjacent to audit

    const std::string label = subset_label(others, mask);
    for (int k = lo; k <= hi; ++k) {
      double lifted = 0.0;
      for (const auto& [rank, xe] : outside) lifted += std::max(0, k - rank) * xe;
      record(report, (n_r - k - 1.0) * boundary + 2.0 * lifted - 2.0 * required,
             label + " k=" + std::to_string(k));
    }
    // Single-level corollary at the smallest adjacent rank.
    record(report, boundary - 2.0 * required / (n_r - lo - 1.0), label + " corollary");
  }
  return report;
}

ProjectionReport check_multiflow_projection(const Instance& inst,
                                            const std::vector<double>& point) {
  ProjectionReport report;
  const MilpModel model = build_mcf(inst);
  if (!gate(model, point, report)) return report;
  const std::vector<int> others = scan_nodes(inst, 10, "multi-flow projection audit");
  const std::vector<double> x = project_edges(inst, model, point);

  for (unsigned mask = 1; mask < (1u << others.size()); ++mask) {
    std::vector<char> in_s(inst.node_count() + 1, 0);
    int required = 0;
    for (size_t i = 0; i < others.size(); ++i) {
      if (!(mask >> i & 1u)) continue;
      in_s[others[i]] = 1;
      if (inst.is_required(others[i])) ++required;
    }
    if (required == 0) continue;
    double boundary = 0.0;
    for (size_t e = 0; e < inst.edges().size(); ++e) {
      const Edge& edge = inst.edges()[e];
      if (inst.edge_active(static_cast<int>(e)) && in_s[edge.u] != in_s[edge.v]) {
        boundary += x[e];
      }
    }
    record(report, boundary - 2.0, subset_label(others, mask));
  }
  return report;
}

ProjectionReport check_budget_projection(const Instance& inst, const std::vector<double>& point) {
  ProjectionReport report;
  const MilpModel model = build_sop(inst, VariantTag::kSopScf).model;
  if (!gate(model, point, report)) return report;
  const std::vector<int> others = scan_nodes(inst, 8, "budget projection audit");
  const std::vector<double> x = project_edges(inst, model, point);
  const double budget = *inst.budget();

  for (unsigned mask = 1; mask < (1u << others.size()); ++mask) {
    std::vector<char> in_s(inst.node_count() + 1, 0);
    int required = 0;
    for (size_t i = 0; i < others.size(); ++i) {
      if (!(mask >> i & 1u)) continue;
      in_s[others[i]] = 1;
      if (inst.is_required(others[i])) ++required;
    }
    if (required == 0) continue;
    double boundary = 0.0, touching = 0.0;
    for (size_t e = 0; e < inst.edges().size(); ++e) {
      const Edge& edge = inst.edges()[e];
      if (!inst.edge_active(static_cast<int>(e))) continue;
      if (in_s[edge.u] != in_s[edge.v]) boundary += x[e];
      if (in_s[edge.u] || in_s[edge.v]) touching += edge.cost * x[e];
    }
    record(report, budget * boundary - touching, subset_label(others, mask));
  }
  return report;
}

std::vector<std::vector<double>> sample_lp_points(const MilpModel& model, std::mt19937& rng,
                                                  int count) {
  if (count <= 0) return {};
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> mix(0.0, 1.0);

  const int n_vertices = std::max(2, std::min(count, 5));
  std::vector<std::vector<double>> vertices;
  for (int t = 0; t < n_vertices; ++t) {
    MilpModel probe = model;
    std::vector<RowEntry> objective;
    for (int j = 0; j < model.n_vars(); ++j) objective.push_back({j, coef(rng)});
    probe.set_objective(std::move(objective), ObjSense::kMin);
    auto [sol, state] = solve_lp(probe);
    if (sol.status != LpStatus::kOptimal) {
      throw Error("relaxation sampling needs finite optima in random directions");
    }
    vertices.push_back(std::move(sol.x));
  }

  std::uniform_int_distribution<int> pick(0, n_vertices - 1);
  std::vector<std::vector<double>> points;
  for (int t = 0; t < count; ++t) {
    const int a = pick(rng), b = pick(rng);
    const double lam = mix(rng);
    std::vector<double> p(model.n_vars());
    for (int j = 0; j < model.n_vars(); ++j) {
      p[j] = lam * vertices[a][j] + (1.0 - lam) * vertices[b][j];
    }
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

const BoundEntry* find_entry(const BoundReport& report, FormulationTag tag) {
  for (const BoundEntry& entry : report.entries) {
    if (entry.tag == tag) return &entry;
  }
  return nullptr;
}

double order_tol(double value) { return kEpsOpt * (1.0 + std::fabs(value)); }

// lhs <= rhs (or equality) recorded as a finding; missing operands leave the
// relationship untested instead of failing the report.
Finding make_finding(const char* slug, std::uint64_t instance, const double* lhs,
                     const double* rhs, bool equality) {
  Finding f;
  f.conjecture = slug;
  f.instance = instance;
  if (lhs == nullptr || rhs == nullptr) {
    f.verdict = "untested";
    return f;
  }
  f.lhs = *lhs;
  f.rhs = *rhs;
  const double tol = order_tol(std::max(std::fabs(*lhs), std::fabs(*rhs)));
  const bool ok = equality ? std::fabs(*lhs - *rhs) <= tol : *lhs <= *rhs + tol;
  f.verdict = ok ? "holds" : "violated";
  return f;
}

}  // namespace

BoundReport compare_bounds(const Instance& inst, const std::vector<FormulationTag>& tags,
                           const BnbLimits& limits) {
  BoundReport report;
  report.instance = inst.fingerprint();

  BuiltFormulation classical = build_classical(inst);
  CutLpResult cut = solve_lp_with_cuts(classical.model, classical.separation);
  if (cut.sol.status != LpStatus::kOptimal) {
    throw Error("cut relaxation did not solve to optimality");
  }
  report.cut_lp = cut.sol.objective;

  for (FormulationTag tag : tags) {
    BuiltFormulation built = build_formulation(inst, tag);
    BoundEntry entry;
    entry.tag = tag;
    const ModelStats stats = model_stats(built.model);
    entry.n_vars = stats.n_vars;
    entry.n_constraints = stats.n_constraints;
    if (tag == FormulationTag::kClassicalCut) {
      entry.lp = report.cut_lp;
    } else {
      auto [sol, state] = solve_lp(built.model);
      if (sol.status != LpStatus::kOptimal) {
        throw Error(std::string("relaxation solve failed for ") + formulation_name(tag));
      }
      entry.lp = sol.objective;
    }
    MilpSolution milp = solve_milp(built.model, built.separation, limits);
    if (milp.status == MilpStatus::kInfeasible) {
      throw Error(std::string("integer solve reported infeasible for ") + formulation_name(tag));
    }
    entry.milp_optimal = milp.status == MilpStatus::kOptimal;
    if (entry.milp_optimal) entry.milp = milp.objective;
    entry.nodes = milp.node_count;
    entry.cuts = milp.cuts_added;
    report.entries.push_back(entry);
  }

  // Proved orderings; a violation means a builder or solver bug, so throw.
  const BoundEntry* scf = find_entry(report, FormulationTag::kScf);
  const BoundEntry* strong = find_entry(report, FormulationTag::kScfStrong);
  const BoundEntry* mcf = find_entry(report, FormulationTag::kMcf);
  const BoundEntry* ts1 = find_entry(report, FormulationTag::kTs1);
  const BoundEntry* ts2 = find_entry(report, FormulationTag::kTs2);
  if (scf && scf->lp > report.cut_lp + order_tol(report.cut_lp)) {
    throw Error("bound order violated: single-flow relaxation exceeds the cut relaxation");
  }
  if (scf && strong && scf->lp > strong->lp + order_tol(strong->lp)) {
    throw Error("bound order violated: single-flow relaxation exceeds its tightened variant");
  }
  if (mcf && report.cut_lp > mcf->lp + order_tol(mcf->lp)) {
    throw Error("bound order violated: cut relaxation exceeds the multi-flow relaxation");
  }
  for (const BoundEntry& entry : report.entries) {
    if (!entry.milp_optimal) continue;
    if (entry.lp > entry.milp + order_tol(entry.milp)) {
      throw Error(std::string("bound order violated: relaxation exceeds the integer optimum for ") +
                  formulation_name(entry.tag));
    }
    for (const BoundEntry& other : report.entries) {
      if (!other.milp_optimal) continue;
      if (std::fabs(entry.milp - other.milp) > kEpsGap * (1.0 + std::fabs(entry.milp))) {
        throw Error(std::string("integer optima disagree between ") +
                    formulation_name(entry.tag) + " and " + formulation_name(other.tag));
      }
    }
  }

  const double* strong_lp = strong ? &strong->lp : nullptr;
  const double* mcf_lp = mcf ? &mcf->lp : nullptr;
  const double* ts1_lp = ts1 ? &ts1->lp : nullptr;
  const double* ts2_lp = ts2 ? &ts2->lp : nullptr;
  const std::uint64_t fp = inst.fingerprint();
  report.findings.push_back(
      make_finding("strong-flow-bound-below-cut", fp, strong_lp, &report.cut_lp, false));
  report.findings.push_back(
      make_finding("multiflow-bound-equals-cut", fp, mcf_lp, &report.cut_lp, true));
  report.findings.push_back(
      make_finding("staged-bound-above-strong-flow", fp, strong_lp, ts1_lp, false));
  report.findings.push_back(
      make_finding("staged-bound-below-cut", fp, ts1_lp, &report.cut_lp, false));
  report.findings.push_back(
      make_finding("stage-reduction-keeps-bound", fp, ts1_lp, ts2_lp, true));
  return report;
}

std::string finding_line(const Finding& finding) {
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(finding.instance));
  nlohmann::json j;
  j["conjecture"] = finding.conjecture;
  j["instance"] = fp;
  j["lhs"] = finding.lhs;
  j["rhs"] = finding.rhs;
  j["verdict"] = finding.verdict;
  return j.dump();
}

}  // namespace stsp
