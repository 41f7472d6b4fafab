#pragma once

#include <vector>

namespace stsp {

// Edmonds-Karp on a small directed network with real capacities. Nodes are
// 1-based to match instance labeling.
class FlowNetwork {
 public:
  explicit FlowNetwork(int node_count);

  // One undirected edge = two antiparallel arcs, each with its own capacity.
  void add_edge(int u, int v, double cap_uv, double cap_vu);

  // Consumes capacity; call once per network (rebuild for another s-t pair).
  double max_flow(int s, int t);

  // After max_flow: nodes still reachable from s in the residual network.
  // Complementing this set over V gives the sink side of a minimum cut.
  std::vector<char> source_side() const;

 private:
  struct Arc {
    int to;
    double cap;
    int rev;  // index of the reverse arc in adj_[to]
  };

  int n_;
  int source_ = -1;
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace stsp
