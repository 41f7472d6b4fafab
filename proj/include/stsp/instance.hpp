#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stsp/common.hpp"

namespace stsp {

// Undirected edge, normalized so u < v. File order is preserved in
// Instance::edges(); formulations address edges by this index.
struct Edge {
  int u = 0;
  int v = 0;
  double cost = 0.0;
  std::optional<double> time;
};

struct NodeMeta {
  double service = 0.0;
  std::optional<std::pair<double, double>> window;
  std::optional<double> revenue;
  std::optional<double> demand;
};

// Sparse instance with optional variant payloads. Nodes are labeled 1..n and
// node 1 is the depot. Immutable once parsed; safe to share across threads.
class Instance {
 public:
  int node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Required nodes exactly as listed in the input, sorted ascending.
  const std::vector<int>& required() const { return required_; }
  bool is_required(int v) const { return required_flag_.at(v); }

  // Required set with the depot adjoined; the tour formulations treat the
  // depot as required even when the file omits it.
  const std::vector<int>& tour_required() const { return tour_required_; }
  bool is_tour_required(int v) const { return v == 1 || required_flag_.at(v); }

  // Nodes outside the depot's component are pruned: still labeled, but
  // inactive, and their edges are skipped by every algorithm here.
  bool node_active(int v) const { return active_node_.at(v); }
  bool edge_active(int e) const { return active_edge_.at(e); }
  int active_edge_count() const { return active_edge_count_; }

  const NodeMeta& meta(int v) const { return meta_.at(v); }
  std::optional<double> horizon() const { return horizon_; }
  std::optional<double> budget() const { return budget_; }
  std::optional<double> capacity() const { return capacity_; }

  // Incident active edge indices per node; index 0 unused.
  const std::vector<std::vector<int>>& adjacency() const { return adj_; }

  // True when every numeric input is an exact integer; lets solvers round
  // objectives instead of carrying float error.
  bool all_integer() const { return all_integer_; }

  std::uint64_t fingerprint() const { return fingerprint_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend Instance parse_instance(const std::string& text);

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> required_;
  std::vector<int> tour_required_;
  std::vector<char> required_flag_;
  std::vector<char> active_node_;
  std::vector<char> active_edge_;
  int active_edge_count_ = 0;
  std::vector<NodeMeta> meta_;
  std::optional<double> horizon_;
  std::optional<double> budget_;
  std::optional<double> capacity_;
  std::vector<std::vector<int>> adj_;
  bool all_integer_ = true;
  std::uint64_t fingerprint_ = 0;
  std::vector<std::string> warnings_;
};

// Directed expansion: every active edge {u,v} yields arcs (u,v) and (v,u)
// with the edge's cost. Arc 2k and 2k+1 belong to the k-th active edge.
struct Arc {
  int tail = 0;
  int head = 0;
  int edge = 0;  // index into Instance::edges()
  double cost = 0.0;
};

struct ArcSet {
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> out;   // node -> outgoing arc indices
  std::vector<std::vector<int>> in;    // node -> incoming arc indices
  std::vector<std::pair<int, int>> edge_arcs;  // edge index -> (fwd, rev), (-1,-1) if inactive

  int reverse(int a) const { return a ^ 1; }
};

// r_i of the strengthened flow bounds: fewest non-depot required nodes the
// salesman has visited, including i itself, when first leaving i. -1 marks
// pruned nodes.
struct RankVector {
  std::vector<int> r;  // index 0 unused

  int at(int v) const {
    int val = r.at(v);
    if (val < 0) throw Error("rank queried for pruned node " + std::to_string(v));
    return val;
  }
};

enum class EdgeWeight { kCost, kTime, kRequiredCount };

// Complete graph over tour_required() with shortest-path costs; witness[i][j]
// is the realizing node sequence from nodes[i] to nodes[j].
struct TspConversion {
  std::vector<int> nodes;
  std::vector<std::vector<double>> dist;
  std::vector<std::vector<std::vector<int>>> witness;
};

Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);

ArcSet arc_expand(const Instance& inst);

// Single-source distances over active nodes; unreachable/inactive nodes get
// kUnreachable. The required-count weight charges 1 for entering a non-depot
// required node, 0 otherwise, and requires no edge payload.
constexpr double kUnreachable = kInf;
std::vector<double> shortest_paths(const Instance& inst, int source, EdgeWeight weight);

RankVector compute_ranks(const Instance& inst);

TspConversion convert_to_tsp(const Instance& inst);

// Exact optimum of the converted TSP by Held-Karp dynamic programming.
// Guarded to |nodes| <= 12; order receives the optimal visiting sequence
// starting at the depot (without the closing return).
double converted_tsp_optimum(const TspConversion& conv, std::vector<int>* order = nullptr);

// Edge-use vector (per edge index) of the closed walk that follows the
// conversion's witness paths through `order`, starting and ending at nodes[0].
std::vector<int> expand_required_tour(const Instance& inst, const TspConversion& conv,
                                      const std::vector<int>& order);

}  // namespace stsp
