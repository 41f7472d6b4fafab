#pragma once

// Selective and timed relatives of the covering-walk model. The builders
// reuse the naming contract of formulations.hpp and extend it with selection
// variables (y_i, or y_i_k for the stage-indexed timed model), so
// extract_edge_uses keeps working on every model built here.

#include <optional>
#include <string_view>
#include <vector>

#include "stsp/formulations.hpp"
#include "stsp/instance.hpp"
#include "stsp/milp.hpp"

namespace stsp {

enum class VariantTag {
  kSopCut,
  kSopTs,
  kSopMcf,
  kSopScf,
  kSopScfStrong,
  kScptpCut,
  kScptpTs,
  kScptpScf,
  kScptpMcf,
  kStsptw,
};

// Stable lowercase tag names, used for CLI selection and model provenance.
const char* variant_name(VariantTag tag);
std::optional<VariantTag> parse_variant_tag(std::string_view name);

// Orienteering: maximize the revenue of the nodes served by a closed depot
// walk whose cost stays within the instance budget. Accepts the five kSop*
// tags; the cut tag carries a separation callback linking each y_i to the
// connectivity of its side of the graph. `stages` overrides the default
// 2(|V|-1) slot count of the staged tag and is ignored by the others.
BuiltFormulation build_sop(const Instance& inst, VariantTag tag, int stages = 0);

// Profitable tour: maximize served revenue minus walk cost, with the served
// demand bounded by the vehicle capacity. Accepts the four kScptp* tags.
// A capacity above the total selectable demand is rejected as a modeling
// mistake unless `loose_capacity_ok` is set.
BuiltFormulation build_scptp(const Instance& inst, VariantTag tag, int stages = 0,
                             bool loose_capacity_ok = false);

// Time windows: every required node gets exactly one service slot k in
// 1..n_R, arcs and their clock values are replicated per slot (xt_i_j_k,
// g_i_j_k with k from 0), and each service must start inside the node's
// window. Minimizes walk cost; needs a horizon, per-edge travel times, and a
// window on every required node.
MilpModel build_stsptw(const Instance& inst);

// Dispatch on the tag with default settings everywhere.
BuiltFormulation build_variant(const Instance& inst, VariantTag tag);

// Ascending list of non-depot required nodes the solution serves, read from
// the y variables. Errors on fractional selection values.
std::vector<int> extract_selected(const Instance& inst, const MilpModel& model,
                                  const std::vector<double>& solution);

// Zeroes edge uses lying outside the depot's traversal component. Selective
// optima may carry stray even cycles (they cost budget, never objective), and
// a covering walk only needs the component holding the depot.
std::vector<int> depot_component_uses(const Instance& inst, std::vector<int> uses);

}  // namespace stsp
