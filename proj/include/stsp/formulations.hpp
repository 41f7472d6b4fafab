#pragma once

// Interchangeable MILP formulations of the covering-walk problem. Each
// builder turns an Instance into a MilpModel under a stable variable-naming
// contract (x_u_v, xt_i_j, g_i_j, f_i_j_k, r_i_j_k, z_i), and
// extract_edge_uses is the single bridge from integral solutions back to
// per-edge traversal counts, whatever the tag.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stsp/bnb.hpp"
#include "stsp/instance.hpp"
#include "stsp/milp.hpp"

namespace stsp {

enum class FormulationTag { kClassicalCut, kScf, kScfStrong, kMcf, kTs1, kTs2 };

// Stable lowercase tag names, used for CLI selection and model provenance.
const char* formulation_name(FormulationTag tag);
std::optional<FormulationTag> parse_formulation_tag(std::string_view name);

struct BuiltFormulation {
  MilpModel model;
  // Lazy connectivity separation; empty for the compact formulations.
  SeparationCallback separation;
};

// Undirected general-integer model: x_e in [0,2] with one auxiliary integer
// z_i per node enforcing even degree via x(delta(i)) = 2 z_i, and z_i >= 1 at
// required nodes. Connectivity lives entirely in the returned callback.
BuiltFormulation build_classical(const Instance& inst);

// Directed binary arcs plus a single commodity stream g that drops one unit
// at each required node.
MilpModel build_scf(const Instance& inst);

// SCF with per-arc commodity caps shrunk by the tail's visit rank.
MilpModel build_scf_strong(const Instance& inst, const RankVector& ranks);

// One binary unit-flow per non-depot required node, coupled to the arcs.
MilpModel build_mcf(const Instance& inst);

// Stage-indexed arcs: r_i_j_k says arc (i,j) is traversed in slot k. The
// walk occupies consecutive leading slots. stages < 2 is rejected.
MilpModel build_ts(const Instance& inst, int stages);

// Dispatch on the tag. The stage counts are 2|E| for kTs1 and 2(|V|-1) for
// kTs2, both over the active part of the graph.
BuiltFormulation build_formulation(const Instance& inst, FormulationTag tag);

// Per-edge traversal counts of an integral solution of `model`, which must
// carry a provenance tag set by one of the builders. Errors when a traversal
// variable is fractional.
std::vector<int> extract_edge_uses(const Instance& inst, const MilpModel& model,
                                   const std::vector<double>& solution);

}  // namespace stsp
