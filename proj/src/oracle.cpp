#include "stsp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stsp/common.hpp"

namespace stsp {

namespace {

struct EdgeRef {
  int e;  // index into Instance::edges()
  int u, v;
  double cost;
};

std::vector<EdgeRef> active_edges(const Instance& inst) {
  std::vector<EdgeRef> act;
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    if (!inst.edge_active(e)) continue;
    const Edge& ed = inst.edges()[e];
    act.push_back({e, ed.u, ed.v, ed.cost});
  }
  return act;
}

// Walks every x in {0,1,2}^act in ascending lexicographic order (first edge
// most significant) and calls fn(cost, visited, x) for each x with all-even
// degrees and support connected to the depot. `visited` marks the nodes of
// the depot's support component; the depot is always marked.
template <typename Fn>
void enumerate_even_connected(const Instance& inst, const std::vector<EdgeRef>& act,
                              long long max_total, Fn&& fn) {
  const int k = static_cast<int>(act.size());
  const int n = inst.node_count();
  std::vector<int> pos_of_edge(inst.edges().size(), -1);
  for (int i = 0; i < k; ++i) pos_of_edge[act[i].e] = i;

  std::vector<int> x(k, 0);
  std::vector<int> deg(n + 1);
  std::vector<char> visited(n + 1);
  std::vector<int> queue;
  queue.reserve(n);

  while (true) {
    long long total = 0;
    for (int i = 0; i < k; ++i) total += x[i];
    if (max_total < 0 || total <= max_total) {
      std::fill(deg.begin(), deg.end(), 0);
      for (int i = 0; i < k; ++i) {
        deg[act[i].u] += x[i];
        deg[act[i].v] += x[i];
      }
      bool even = true;
      for (int v = 1; v <= n && even; ++v) even = deg[v] % 2 == 0;
      if (even) {
        std::fill(visited.begin(), visited.end(), 0);
        visited[1] = 1;
        queue.assign(1, 1);
        for (size_t head = 0; head < queue.size(); ++head) {
          for (int e : inst.adjacency()[queue[head]]) {
            if (x[pos_of_edge[e]] == 0) continue;
            const Edge& ed = inst.edges()[e];
            int other = ed.u == queue[head] ? ed.v : ed.u;
            if (!visited[other]) {
              visited[other] = 1;
              queue.push_back(other);
            }
          }
        }
        bool connected = true;
        double cost = 0.0;
        for (int i = 0; i < k && connected; ++i) {
          if (x[i] == 0) continue;
          connected = visited[act[i].u];
          cost += x[i] * act[i].cost;
        }
        if (connected) fn(cost, visited, x);
      }
    }
    int pos = k - 1;
    while (pos >= 0 && x[pos] == 2) x[pos--] = 0;
    if (pos < 0) break;
    ++x[pos];
  }
}

struct CoverResult {
  bool found = false;
  double cost = 0.0;
  std::vector<int> x_full;  // per edge index
};

// Cheapest even-connected x whose support reaches every target node; the
// ascending enumeration plus strict improvement keeps the lexicographically
// smallest optimum.
CoverResult cover_search(const Instance& inst, const std::vector<EdgeRef>& act,
                         const std::vector<int>& targets, long long max_total) {
  CoverResult best;
  enumerate_even_connected(
      inst, act, max_total,
      [&](double cost, const std::vector<char>& visited, const std::vector<int>& x) {
        for (int t : targets) {
          if (!visited[t]) return;
        }
        if (best.found && cost >= best.cost) return;
        best.found = true;
        best.cost = cost;
        best.x_full.assign(inst.edges().size(), 0);
        for (size_t i = 0; i < x.size(); ++i) best.x_full[act[i].e] = x[i];
      });
  return best;
}

}  // namespace

WalkSolution brute_force_stsp(const Instance& inst, long long max_total_uses) {
  if (inst.active_edge_count() > 14) {
    throw Error("exhaustive edge enumeration is limited to 14 active edges, instance has " +
                std::to_string(inst.active_edge_count()));
  }
  std::vector<int> targets;
  for (int v : inst.tour_required()) {
    if (v == 1) continue;
    if (!inst.node_active(v)) {
      throw Error("no feasible closed walk: required node " + std::to_string(v) +
                  " is unreachable from the depot");
    }
    targets.push_back(v);
  }
  const std::vector<EdgeRef> act = active_edges(inst);
  CoverResult best = cover_search(inst, act, targets, max_total_uses);
  if (!best.found) throw Error("no feasible closed walk covers the required nodes");

  WalkSolution out;
  out.edge_uses = std::move(best.x_full);
  out.cost = best.cost;
  out.objective = best.cost;
  out.walk = eulerian_walk(inst, out.edge_uses);
  return out;
}

WalkSolution brute_force_variant(const Instance& inst, ProblemClass variant) {
  if (variant != ProblemClass::kSop && variant != ProblemClass::kScptp) {
    throw Error("subset search handles the selective variants only");
  }
  std::vector<int> req;
  for (int v : inst.required()) {
    if (v != 1) req.push_back(v);
  }
  const int nr = static_cast<int>(req.size());
  if (nr > 8) {
    throw Error("subset enumeration is limited to 8 selectable nodes, instance has " +
                std::to_string(nr));
  }
  if (inst.active_edge_count() > 12) {
    throw Error("subset enumeration is limited to 12 active edges, instance has " +
                std::to_string(inst.active_edge_count()));
  }

  const bool sop = variant == ProblemClass::kSop;
  double budget = 0.0, capacity = 0.0;
  if (sop) {
    if (!inst.budget()) throw Error("budget missing for the budgeted selection");
    budget = *inst.budget();
  } else {
    if (!inst.capacity()) throw Error("capacity missing for the capacitated selection");
    capacity = *inst.capacity();
  }
  std::vector<double> prize(nr, 0.0), demand(nr, 0.0);
  for (int i = 0; i < nr; ++i) {
    const NodeMeta& m = inst.meta(req[i]);
    if (!m.revenue) throw Error("node " + std::to_string(req[i]) + " has no revenue");
    prize[i] = *m.revenue;
    if (!sop) {
      if (!m.demand) throw Error("node " + std::to_string(req[i]) + " has no demand");
      demand[i] = *m.demand;
    }
  }

  // One sweep collects the cheapest walk per exactly-covered subset; the
  // superset minima then cost every selection, since covering more than the
  // selection is allowed and never mandatory.
  const std::vector<EdgeRef> act = active_edges(inst);
  std::vector<double> g(std::size_t{1} << nr, kInf);
  enumerate_even_connected(
      inst, act, -1, [&](double cost, const std::vector<char>& visited, const std::vector<int>&) {
        unsigned mask = 0;
        for (int i = 0; i < nr; ++i) {
          if (visited[req[i]]) mask |= 1u << i;
        }
        if (cost < g[mask]) g[mask] = cost;
      });
  for (int b = 0; b < nr; ++b) {
    for (unsigned mask = 0; mask < (1u << nr); ++mask) {
      if (!(mask & (1u << b))) g[mask] = std::min(g[mask], g[mask | (1u << b)]);
    }
  }

  int best_mask = -1;
  double best_score = -kInf;
  for (unsigned mask = 0; mask < (1u << nr); ++mask) {
    if (g[mask] >= kInf) continue;
    double p = 0.0, q = 0.0;
    for (int i = 0; i < nr; ++i) {
      if (mask & (1u << i)) {
        p += prize[i];
        q += demand[i];
      }
    }
    double score;
    if (sop) {
      if (g[mask] > budget + kEpsFeas) continue;
      score = p;
    } else {
      if (q > capacity + kEpsFeas) continue;
      score = p - g[mask];
    }
    if (score > best_score) {
      best_score = score;
      best_mask = static_cast<int>(mask);
    }
  }
  if (best_mask < 0) throw Error("no feasible selection exists");

  std::vector<int> targets;
  for (int i = 0; i < nr; ++i) {
    if (best_mask & (1 << i)) targets.push_back(req[i]);
  }
  CoverResult w = cover_search(inst, act, targets, -1);

  WalkSolution out;
  out.edge_uses = std::move(w.x_full);
  out.cost = w.cost;
  out.objective = best_score;
  out.selected = std::move(targets);
  out.walk = eulerian_walk(inst, out.edge_uses);
  return out;
}

WalkSolution brute_force_stsptw(const Instance& inst) {
  if (!inst.horizon()) throw Error("time horizon missing for the timed walk search");
  const double T = *inst.horizon();
  const int n = inst.node_count();

  std::vector<int> serv;
  for (int v : inst.required()) {
    if (v != 1) serv.push_back(v);
  }
  const int nr = static_cast<int>(serv.size());
  const long long step_budget = static_cast<long long>(nr + 1) * (n - 1);
  if (step_budget > 20) {
    throw Error("timed walk search is limited to 20 traversals, the walk bound here is " +
                std::to_string(step_budget));
  }
  for (int e = 0; e < static_cast<int>(inst.edges().size()); ++e) {
    if (inst.edge_active(e) && !inst.edges()[e].time) {
      throw Error("edge {" + std::to_string(inst.edges()[e].u) + "," +
                  std::to_string(inst.edges()[e].v) + "} has no traversal time");
    }
  }

  std::vector<double> wa(n + 1, 0.0), wb(n + 1, T), sv(n + 1, 0.0);
  std::vector<int> bit(n + 1, -1);
  for (int i = 0; i < nr; ++i) {
    const int v = serv[i];
    bit[v] = i;
    const NodeMeta& m = inst.meta(v);
    if (m.window) {
      wa[v] = m.window->first;
      wb[v] = m.window->second;
    }
    sv[v] = m.service;
  }
  const std::vector<double> back = shortest_paths(inst, 1, EdgeWeight::kTime);
  const unsigned full = (1u << nr) - 1;

  // Pareto labels per (node, serviced set): a state is dead when another
  // visit was at least as early, as cheap, and as short.
  struct Label {
    double clock, cost;
    long long steps;
  };
  std::map<std::pair<int, unsigned>, std::vector<Label>> seen;

  double best_cost = kInf;
  std::vector<Arc> walk, best_walk;
  std::vector<double> depart, best_depart;
  std::vector<ServiceStop> services, best_services;

  auto dominated = [&](int node, unsigned mask, double clock, double cost, long long steps) {
    std::vector<Label>& lst = seen[{node, mask}];
    for (const Label& l : lst) {
      if (l.clock <= clock && l.cost <= cost && l.steps <= steps) return true;
    }
    std::erase_if(lst, [&](const Label& l) {
      return clock <= l.clock && cost <= l.cost && steps <= l.steps;
    });
    lst.push_back({clock, cost, steps});
    return false;
  };

  auto dfs = [&](auto&& self, int node, unsigned mask, double clock, double cost,
                 long long steps) -> void {
    if (cost >= best_cost) return;  // nonnegative costs: extensions cannot win
    if (node == 1 && mask == full) {
      best_cost = cost;
      best_walk = walk;
      best_depart = depart;
      best_services = services;
      return;
    }
    if (dominated(node, mask, clock, cost, steps)) return;
    for (int i = 0; i < nr; ++i) {
      if (!(mask & (1u << i)) && clock > wb[serv[i]] + kEpsFeas) return;  // window closed
    }
    if (bit[node] >= 0 && !(mask & (1u << bit[node]))) {
      double start = std::max(clock, wa[node]);
      if (start <= wb[node] + kEpsFeas) {
        services.push_back({node, start, static_cast<int>(walk.size())});
        self(self, node, mask | (1u << bit[node]), start + sv[node], cost, steps);
        services.pop_back();
      }
    }
    if (steps >= step_budget) return;
    for (int e : inst.adjacency()[node]) {
      const Edge& ed = inst.edges()[e];
      const int to = ed.u == node ? ed.v : ed.u;
      const double nclock = clock + *ed.time;
      if (nclock + back[to] > T + kEpsFeas) continue;  // cannot return in time
      walk.push_back({node, to, e, ed.cost});
      depart.push_back(clock);
      self(self, to, mask, nclock, cost + ed.cost, steps + 1);
      depart.pop_back();
      walk.pop_back();
    }
  };
  dfs(dfs, 1, 0, 0.0, 0.0, 0);

  if (best_cost >= kInf) throw Error("no feasible timed walk exists");
  WalkSolution out;
  out.walk = std::move(best_walk);
  out.depart = std::move(best_depart);
  out.services = std::move(best_services);
  out.cost = best_cost;
  out.objective = best_cost;
  out.edge_uses.assign(inst.edges().size(), 0);
  for (const Arc& a : out.walk) ++out.edge_uses[a.edge];
  return out;
}

namespace {

VerifyReport fail(const std::string& what) { return {false, what}; }

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9 * (1.0 + std::fabs(b)); }

}  // namespace

VerifyReport verify_walk(const Instance& inst, const WalkSolution& sol, ProblemClass problem) {
  const int e_count = static_cast<int>(inst.edges().size());
  if (static_cast<int>(sol.edge_uses.size()) != e_count) {
    return fail("edge_uses length does not match the edge list");
  }
  for (int e = 0; e < e_count; ++e) {
    if (sol.edge_uses[e] < 0) return fail("negative edge use count");
    if (sol.edge_uses[e] > 0 && !inst.edge_active(e)) return fail("inactive edge carries traversals");
  }
  if (!sol.walk.empty()) {
    if (sol.walk.front().tail != 1) return fail("walk does not start at the depot");
    if (sol.walk.back().head != 1) return fail("walk does not end at the depot");
  }
  std::vector<int> counted(e_count, 0);
  for (size_t s = 0; s < sol.walk.size(); ++s) {
    const Arc& a = sol.walk[s];
    if (a.edge < 0 || a.edge >= e_count) return fail("walk references an unknown edge");
    if (!inst.edge_active(a.edge)) return fail("walk uses an inactive edge");
    const Edge& ed = inst.edges()[a.edge];
    if (!((a.tail == ed.u && a.head == ed.v) || (a.tail == ed.v && a.head == ed.u))) {
      return fail("walk arc does not match its edge's endpoints");
    }
    if (s > 0 && sol.walk[s - 1].head != a.tail) {
      return fail("consecutive walk arcs do not share a node");
    }
    ++counted[a.edge];
  }
  for (int e = 0; e < e_count; ++e) {
    if (counted[e] != sol.edge_uses[e]) return fail("edge_uses does not match the walk");
  }
  double walk_cost = 0.0;
  for (int e = 0; e < e_count; ++e) walk_cost += sol.edge_uses[e] * inst.edges()[e].cost;
  if (!near(sol.cost, walk_cost)) return fail("cost does not match the edge uses");

  std::vector<char> visited(inst.node_count() + 1, 0);
  visited[1] = 1;
  for (const Arc& a : sol.walk) visited[a.tail] = visited[a.head] = 1;

  switch (problem) {
    case ProblemClass::kStsp: {
      for (int v : inst.tour_required()) {
        if (!visited[v]) return fail("required node " + std::to_string(v) + " is not visited");
      }
      if (!near(sol.objective, sol.cost)) return fail("objective does not equal the walk cost");
      break;
    }
    case ProblemClass::kSop:
    case ProblemClass::kScptp: {
      double revenue = 0.0, load = 0.0;
      for (size_t i = 0; i < sol.selected.size(); ++i) {
        const int v = sol.selected[i];
        if (i > 0 && sol.selected[i - 1] >= v) return fail("selected nodes are not strictly ascending");
        if (v == 1 || !inst.is_required(v)) {
          return fail("selected node " + std::to_string(v) + " is not a selectable node");
        }
        if (!visited[v]) return fail("selected node " + std::to_string(v) + " is not visited");
        const NodeMeta& m = inst.meta(v);
        if (!m.revenue) return fail("node " + std::to_string(v) + " has no revenue");
        revenue += *m.revenue;
        if (problem == ProblemClass::kScptp) {
          if (!m.demand) return fail("node " + std::to_string(v) + " has no demand");
          load += *m.demand;
        }
      }
      if (problem == ProblemClass::kSop) {
        if (!inst.budget()) return fail("instance has no budget");
        if (sol.cost > *inst.budget() + 1e-9) return fail("walk cost exceeds the budget");
        if (!near(sol.objective, revenue)) return fail("objective does not equal the selected revenue");
      } else {
        if (!inst.capacity()) return fail("instance has no capacity");
        if (load > *inst.capacity() + 1e-9) return fail("selected demand exceeds the capacity");
        if (!near(sol.objective, revenue - sol.cost)) {
          return fail("objective does not equal revenue minus cost");
        }
      }
      break;
    }
    case ProblemClass::kStsptw: {
      if (!inst.horizon()) return fail("instance has no horizon");
      if (sol.depart.size() != sol.walk.size()) return fail("schedule length does not match the walk");
      const int len = static_cast<int>(sol.walk.size());
      std::vector<int> service_at(len + 1, -1);  // walk position -> service index
      std::vector<int> times(inst.node_count() + 1, 0);
      for (size_t i = 0; i < sol.services.size(); ++i) {
        const ServiceStop& st = sol.services[i];
        if (st.node < 1 || st.node > inst.node_count() || st.node == 1 ||
            !inst.is_required(st.node)) {
          return fail("service at node " + std::to_string(st.node) + " which is not required");
        }
        if (++times[st.node] > 1) {
          return fail("node " + std::to_string(st.node) + " is serviced more than once");
        }
        if (st.before_step < 0 || st.before_step > len) return fail("service stop is out of range");
        const int at = st.before_step < len ? sol.walk[st.before_step].tail
                       : len > 0            ? sol.walk.back().head
                                            : 1;
        if (at != st.node) return fail("service does not take place at its node");
        service_at[st.before_step] = static_cast<int>(i);
      }
      for (int v : inst.required()) {
        if (v != 1 && times[v] == 0) {
          return fail("required node " + std::to_string(v) + " is never serviced");
        }
      }
      double clock = 0.0;
      for (int s = 0; s <= len; ++s) {
        if (service_at[s] >= 0) {
          const ServiceStop& st = sol.services[service_at[s]];
          const NodeMeta& m = inst.meta(st.node);
          const double a = m.window ? m.window->first : 0.0;
          const double b = m.window ? m.window->second : *inst.horizon();
          if (st.start < clock - 1e-9) return fail("service begins before the walk arrives");
          if (st.start < a - 1e-9 || st.start > b + 1e-9) {
            return fail("service at node " + std::to_string(st.node) + " misses its window");
          }
          clock = st.start + m.service;
        }
        if (s == len) break;
        if (!inst.edges()[sol.walk[s].edge].time) {
          return fail("edge on the walk has no traversal time");
        }
        if (sol.depart[s] < clock - 1e-9) return fail("arc departs before services finish");
        clock = sol.depart[s] + *inst.edges()[sol.walk[s].edge].time;
      }
      if (clock > *inst.horizon() + 1e-9) return fail("walk returns after the deadline");
      if (!near(sol.objective, sol.cost)) return fail("objective does not equal the walk cost");
      break;
    }
  }
  return {};
}

std::vector<Arc> eulerian_walk(const Instance& inst, const std::vector<int>& edge_uses) {
  const int n = inst.node_count();
  if (edge_uses.size() != inst.edges().size()) {
    throw Error("edge_uses length does not match the edge list");
  }
  std::vector<int> deg(n + 1, 0);
  for (size_t e = 0; e < edge_uses.size(); ++e) {
    if (edge_uses[e] < 0) throw Error("negative edge use count");
    if (edge_uses[e] == 0) continue;
    if (!inst.edge_active(static_cast<int>(e))) throw Error("inactive edge carries traversals");
    deg[inst.edges()[e].u] += edge_uses[e];
    deg[inst.edges()[e].v] += edge_uses[e];
  }
  for (int v = 1; v <= n; ++v) {
    if (deg[v] % 2 != 0) throw Error("odd degree at node " + std::to_string(v));
  }

  // One entry per traversal copy, listed at both endpoints.
  struct Copy {
    int edge;
    char used = 0;
  };
  std::vector<Copy> copies;
  std::vector<std::vector<int>> inc(n + 1);
  for (size_t e = 0; e < edge_uses.size(); ++e) {
    for (int c = 0; c < edge_uses[e]; ++c) {
      copies.push_back({static_cast<int>(e)});
      inc[inst.edges()[e].u].push_back(static_cast<int>(copies.size()) - 1);
      inc[inst.edges()[e].v].push_back(static_cast<int>(copies.size()) - 1);
    }
  }

  std::vector<size_t> ptr(n + 1, 0);
  std::vector<std::pair<int, int>> stack = {{1, -1}};  // (node, edge used to arrive)
  std::vector<std::pair<int, int>> circuit;
  while (!stack.empty()) {
    auto [v, via] = stack.back();
    while (ptr[v] < inc[v].size() && copies[inc[v][ptr[v]]].used) ++ptr[v];
    if (ptr[v] == inc[v].size()) {
      circuit.push_back({v, via});
      stack.pop_back();
    } else {
      Copy& c = copies[inc[v][ptr[v]]];
      c.used = 1;
      const Edge& ed = inst.edges()[c.edge];
      stack.push_back({ed.u == v ? ed.v : ed.u, c.edge});
    }
  }
  if (circuit.size() != copies.size() + 1) {
    throw Error("edge support is not connected to the depot");
  }

  std::vector<Arc> walk;
  for (size_t i = circuit.size() - 1; i > 0; --i) {
    const int tail = circuit[i].first;
    const int head = circuit[i - 1].first;
    const int edge = circuit[i - 1].second;
    walk.push_back({tail, head, edge, inst.edges()[edge].cost});
  }
  return walk;
}

}  // namespace stsp
