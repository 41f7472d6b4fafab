#include "stsp/maxflow.hpp"

#include <algorithm>
#include <queue>

#include "stsp/common.hpp"

namespace stsp {

namespace {
constexpr double kFlowEps = 1e-12;  // residual below this counts as saturated
}

FlowNetwork::FlowNetwork(int node_count) : n_(node_count), adj_(node_count + 1) {}

void FlowNetwork::add_edge(int u, int v, double cap_uv, double cap_vu) {
  adj_[u].push_back({v, cap_uv, static_cast<int>(adj_[v].size())});
  adj_[v].push_back({u, cap_vu, static_cast<int>(adj_[u].size()) - 1});
}

double FlowNetwork::max_flow(int s, int t) {
  source_ = s;
  double total = 0.0;
  std::vector<int> prev_node(n_ + 1), prev_arc(n_ + 1);
  for (;;) {
    std::fill(prev_node.begin(), prev_node.end(), -1);
    prev_node[s] = s;
    std::queue<int> bfs;
    bfs.push(s);
    while (!bfs.empty() && prev_node[t] < 0) {
      int u = bfs.front();
      bfs.pop();
      for (int a = 0; a < static_cast<int>(adj_[u].size()); ++a) {
        const Arc& arc = adj_[u][a];
        if (arc.cap <= kFlowEps || prev_node[arc.to] >= 0) continue;
        prev_node[arc.to] = u;
        prev_arc[arc.to] = a;
        bfs.push(arc.to);
      }
    }
    if (prev_node[t] < 0) break;
    double push = kInf;
    for (int v = t; v != s; v = prev_node[v]) {
      push = std::min(push, adj_[prev_node[v]][prev_arc[v]].cap);
    }
    for (int v = t; v != s; v = prev_node[v]) {
      Arc& fwd = adj_[prev_node[v]][prev_arc[v]];
      fwd.cap -= push;
      adj_[v][fwd.rev].cap += push;
    }
    total += push;
  }
  return total;
}

std::vector<char> FlowNetwork::source_side() const {
  std::vector<char> seen(n_ + 1, 0);
  if (source_ < 0) throw Error("source_side queried before max_flow");
  seen[source_] = 1;
  std::queue<int> bfs;
  bfs.push(source_);
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    for (const Arc& arc : adj_[u]) {
      if (arc.cap <= kFlowEps || seen[arc.to]) continue;
      seen[arc.to] = 1;
      bfs.push(arc.to);
    }
  }
  return seen;
}

}  // namespace stsp
