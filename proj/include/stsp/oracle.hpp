#pragma once

#include <string>
#include <vector>

#include "stsp/instance.hpp"

namespace stsp {

enum class ProblemClass { kStsp, kSop, kScptp, kStsptw };

// One service during a timed walk: `node` is served starting at `start`,
// while the walk stands still just before departing on arc `before_step`
// (equal to the walk length when the service follows the final arrival).
struct ServiceStop {
  int node = 0;
  double start = 0.0;
  int before_step = 0;
};

// Closed depot walk plus everything needed to audit it. `cost` is always the
// plain edge-use cost; `objective` is the problem objective (equal to cost
// for minimization problems, a profit for the selective variants).
struct WalkSolution {
  std::vector<int> edge_uses;  // per edge index, zero on unused edges
  std::vector<Arc> walk;       // consecutive arcs, depot to depot
  double cost = 0.0;
  double objective = 0.0;
  std::vector<int> selected;          // variant choice, ascending node ids
  std::vector<double> depart;         // timed walks: clock when each arc starts
  std::vector<ServiceStop> services;  // timed walks: all services performed
};

struct VerifyReport {
  bool pass = true;
  std::string failure;  // first violated condition, empty when pass holds
};

// Exhaustive minimum over x in {0,1,2}^E (even degrees, support connected to
// the depot and covering the required set); ties go to the lexicographically
// smallest x in edge order. `max_total_uses` >= 0 restricts the total
// traversal count, which by the walk-length bound never changes the optimum.
// Guarded to 14 active edges; throws when nothing feasible exists.
WalkSolution brute_force_stsp(const Instance& inst, long long max_total_uses = -1);

// Selective variants: maximizes over every subset of the required nodes,
// costing each subset by the cheapest covering walk. kSop keeps subsets whose
// walk cost fits the budget and scores revenue; kScptp keeps subsets within
// capacity and scores revenue minus walk cost. Guarded to 8 selectable nodes
// and 12 active edges.
WalkSolution brute_force_variant(const Instance& inst, ProblemClass variant);

// Depth-first search over timed closed walks with service scheduling, pruned
// by deadline, dominance on (node, serviced set), and the walk-length budget
// (n_R + 1)(|V| - 1). Guarded to budgets of at most 20 traversals.
WalkSolution brute_force_stsptw(const Instance& inst);

// Checks every WalkSolution invariant plus the problem's side constraints;
// reports the first violation instead of throwing.
VerifyReport verify_walk(const Instance& inst, const WalkSolution& sol, ProblemClass problem);

// Closed walk from the depot using each edge exactly edge_uses[e] times
// (Hierholzer); throws on odd degrees or support not connected to the depot.
std::vector<Arc> eulerian_walk(const Instance& inst, const std::vector<int>& edge_uses);

}  // namespace stsp
