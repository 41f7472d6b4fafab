#include "stsp/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace stsp {

namespace {

double parse_number(const std::string& tok, int line, const char* what) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(line, std::string("bad ") + what + " '" + tok + "'");
  }
  return value;
}

int parse_node_id(const std::string& tok, int line) {
  int value = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, "bad node id '" + tok + "'");
  }
  return value;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

bool is_integral(double v) {
  return std::floor(v) == v && std::abs(v) < 9.007199254740992e15;
}

std::uint64_t fnv1a(const std::string& blob) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : blob) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct PendingEdge {
  int line;
  Edge edge;
};

struct PendingNodeValue {
  int line;
  int node;
  double a = 0.0;
  double b = 0.0;
};

// Dijkstra over active edges with per-direction weights supplied by `cost_of`.
template <typename WeightFn>
std::vector<double> dijkstra(const Instance& inst, int source, WeightFn cost_of,
                             std::vector<int>* pred = nullptr) {
  const int n = inst.node_count();
  std::vector<double> dist(n + 1, kUnreachable);
  if (pred) pred->assign(n + 1, 0);
  if (source < 1 || source > n || !inst.node_active(source)) return dist;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (int e : inst.adjacency()[u]) {
      const Edge& edge = inst.edges()[e];
      int v = edge.u == u ? edge.v : edge.u;
      double nd = d + cost_of(edge, v);
      if (nd < dist[v]) {
        dist[v] = nd;
        if (pred) (*pred)[v] = u;
        heap.push({nd, v});
      }
    }
  }
  return dist;
}

}  // namespace

Instance parse_instance(const std::string& text) {
  Instance inst;

  std::optional<int> node_count;
  int node_count_line = 0;
  std::vector<PendingEdge> edges;
  std::map<int, int> required_lines;          // node -> first line seen
  std::map<int, PendingNodeValue> services;
  std::map<int, PendingNodeValue> windows;
  std::map<int, PendingNodeValue> revenues;
  std::map<int, PendingNodeValue> demands;
  std::optional<double> horizon, budget, capacity;

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  bool first_line = true;
  while (std::getline(stream, raw)) {
    ++line_no;
    if (first_line && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      raw.erase(0, 3);
    }
    first_line = false;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    const std::string& kw = tok[0];
    auto arity = [&](size_t lo, size_t hi) {
      if (tok.size() - 1 < lo || tok.size() - 1 > hi) {
        throw ParseError(line_no, "directive '" + kw + "' expects " +
                                      std::to_string(lo) +
                                      (hi == lo ? "" : ".." + std::to_string(hi)) +
                                      " argument(s)");
      }
    };
    auto once = [&](const std::optional<double>& slot) {
      if (slot.has_value()) throw ParseError(line_no, "duplicate '" + kw + "' directive");
    };

    if (kw == "nodes") {
      arity(1, 1);
      if (node_count) throw ParseError(line_no, "duplicate 'nodes' directive");
      int n = parse_node_id(tok[1], line_no);
      if (n < 1) throw ParseError(line_no, "node count must be at least 1");
      node_count = n;
      node_count_line = line_no;
    } else if (kw == "required") {
      arity(1, tok.size());
      for (size_t i = 1; i < tok.size(); ++i) {
        int v = parse_node_id(tok[i], line_no);
        required_lines.emplace(v, line_no);
      }
    } else if (kw == "edge") {
      arity(3, 4);
      PendingEdge pe;
      pe.line = line_no;
      pe.edge.u = parse_node_id(tok[1], line_no);
      pe.edge.v = parse_node_id(tok[2], line_no);
      pe.edge.cost = parse_number(tok[3], line_no, "edge cost");
      if (pe.edge.cost < 0) throw ParseError(line_no, "negative edge cost");
      if (tok.size() == 5) {
        double t = parse_number(tok[4], line_no, "edge time");
        if (t < 0) throw ParseError(line_no, "negative edge time");
        pe.edge.time = t;
      }
      edges.push_back(pe);
    } else if (kw == "service" || kw == "revenue" || kw == "demand") {
      arity(2, 2);
      PendingNodeValue pv;
      pv.line = line_no;
      pv.node = parse_node_id(tok[1], line_no);
      pv.a = parse_number(tok[2], line_no, (kw + " value").c_str());
      if (pv.a < 0) throw ParseError(line_no, "negative " + kw + " value");
      auto& slot = kw == "service" ? services : kw == "revenue" ? revenues : demands;
      if (!slot.emplace(pv.node, pv).second) {
        throw ParseError(line_no, "duplicate '" + kw + "' for node " + tok[1]);
      }
    } else if (kw == "window") {
      arity(3, 3);
      PendingNodeValue pv;
      pv.line = line_no;
      pv.node = parse_node_id(tok[1], line_no);
      pv.a = parse_number(tok[2], line_no, "window start");
      pv.b = parse_number(tok[3], line_no, "window end");
      if (pv.a < 0) throw ParseError(line_no, "negative window start");
      if (pv.a > pv.b) throw ParseError(line_no, "window start exceeds window end");
      if (!windows.emplace(pv.node, pv).second) {
        throw ParseError(line_no, "duplicate 'window' for node " + tok[1]);
      }
    } else if (kw == "horizon") {
      arity(1, 1);
      once(horizon);
      double t = parse_number(tok[1], line_no, "horizon");
      if (t <= 0) throw ParseError(line_no, "horizon must be positive");
      horizon = t;
    } else if (kw == "budget") {
      arity(1, 1);
      once(budget);
      double u = parse_number(tok[1], line_no, "budget");
      if (u < 0) throw ParseError(line_no, "negative budget");
      budget = u;
    } else if (kw == "capacity") {
      arity(1, 1);
      once(capacity);
      double q = parse_number(tok[1], line_no, "capacity");
      if (q < 0) throw ParseError(line_no, "negative capacity");
      capacity = q;
    } else {
      throw ParseError(line_no, "unknown directive '" + kw + "'");
    }
  }

  if (!node_count) throw Error("missing 'nodes' directive");
  const int n = *node_count;
  inst.n_ = n;

  auto check_node = [&](int v, int line) {
    if (v < 1 || v > n) {
      throw ParseError(line, "node " + std::to_string(v) + " out of range 1.." +
                                 std::to_string(n));
    }
  };

  std::set<std::pair<int, int>> seen_edges;
  for (auto& pe : edges) {
    check_node(pe.edge.u, pe.line);
    check_node(pe.edge.v, pe.line);
    if (pe.edge.u == pe.edge.v) throw ParseError(pe.line, "self loop");
    if (pe.edge.u > pe.edge.v) std::swap(pe.edge.u, pe.edge.v);
    if (!seen_edges.insert({pe.edge.u, pe.edge.v}).second) {
      throw ParseError(pe.line, "duplicate edge {" + std::to_string(pe.edge.u) + "," +
                                    std::to_string(pe.edge.v) + "}");
    }
    inst.edges_.push_back(pe.edge);
  }

  inst.required_flag_.assign(n + 1, 0);
  for (auto [v, line] : required_lines) {
    check_node(v, line);
    inst.required_flag_[v] = 1;
    inst.required_.push_back(v);
  }
  inst.tour_required_ = inst.required_;
  if (!inst.required_flag_[1]) inst.tour_required_.insert(inst.tour_required_.begin(), 1);

  inst.meta_.assign(n + 1, NodeMeta{});
  for (auto& [v, pv] : services) {
    check_node(v, pv.line);
    inst.meta_[v].service = pv.a;
  }
  for (auto& [v, pv] : windows) {
    check_node(v, pv.line);
    if (horizon && pv.b > *horizon) {
      throw ParseError(pv.line, "window end exceeds horizon");
    }
    inst.meta_[v].window = {pv.a, pv.b};
  }
  for (auto& [v, pv] : revenues) {
    check_node(v, pv.line);
    inst.meta_[v].revenue = pv.a;
  }
  for (auto& [v, pv] : demands) {
    check_node(v, pv.line);
    inst.meta_[v].demand = pv.a;
  }
  inst.horizon_ = horizon;
  inst.budget_ = budget;
  inst.capacity_ = capacity;

  // Depot component discovery; anything outside it is pruned or rejected.
  std::vector<std::vector<int>> all_adj(n + 1);
  for (size_t e = 0; e < inst.edges_.size(); ++e) {
    all_adj[inst.edges_[e].u].push_back(static_cast<int>(e));
    all_adj[inst.edges_[e].v].push_back(static_cast<int>(e));
  }
  inst.active_node_.assign(n + 1, 0);
  std::vector<int> stack = {1};
  inst.active_node_[1] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int e : all_adj[u]) {
      const Edge& edge = inst.edges_[e];
      int v = edge.u == u ? edge.v : edge.u;
      if (!inst.active_node_[v]) {
        inst.active_node_[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::vector<int> pruned;
  for (int v = 1; v <= n; ++v) {
    if (inst.active_node_[v]) continue;
    if (inst.required_flag_[v]) {
      throw Error("required node " + std::to_string(v) + " is not connected to the depot");
    }
    pruned.push_back(v);
  }
  inst.active_edge_.assign(inst.edges_.size(), 0);
  int dropped_edges = 0;
  for (size_t e = 0; e < inst.edges_.size(); ++e) {
    bool live = inst.active_node_[inst.edges_[e].u] && inst.active_node_[inst.edges_[e].v];
    inst.active_edge_[e] = live;
    if (live) {
      ++inst.active_edge_count_;
    } else {
      ++dropped_edges;
    }
  }
  if (!pruned.empty()) {
    std::string w = "pruned " + std::to_string(pruned.size()) +
                    " node(s) disconnected from the depot:";
    for (int v : pruned) w += " " + std::to_string(v);
    w += " (" + std::to_string(dropped_edges) + " edge(s) dropped)";
    inst.warnings_.push_back(w);
    log_msg(LogLevel::kInfo, "%s", w.c_str());
  }

  inst.adj_.assign(n + 1, {});
  for (size_t e = 0; e < inst.edges_.size(); ++e) {
    if (!inst.active_edge_[e]) continue;
    inst.adj_[inst.edges_[e].u].push_back(static_cast<int>(e));
    inst.adj_[inst.edges_[e].v].push_back(static_cast<int>(e));
  }

  bool exact = true;
  auto note = [&exact](double v) { exact = exact && is_integral(v); };
  for (const Edge& e : inst.edges_) {
    note(e.cost);
    if (e.time) note(*e.time);
  }
  for (int v = 1; v <= n; ++v) {
    const NodeMeta& m = inst.meta_[v];
    note(m.service);
    if (m.window) {
      note(m.window->first);
      note(m.window->second);
    }
    if (m.revenue) note(*m.revenue);
    if (m.demand) note(*m.demand);
  }
  if (horizon) note(*horizon);
  if (budget) note(*budget);
  if (capacity) note(*capacity);
  inst.all_integer_ = exact;

  std::string blob = "n=";
  append_number(blob, n);
  for (const Edge& e : inst.edges_) {
    blob += ";e=";
    append_number(blob, e.u);
    blob += ",";
    append_number(blob, e.v);
    blob += ",";
    append_number(blob, e.cost);
    if (e.time) {
      blob += ",";
      append_number(blob, *e.time);
    }
  }
  blob += ";r=";
  for (int v : inst.required_) {
    append_number(blob, v);
    blob += ",";
  }
  for (int v = 1; v <= n; ++v) {
    const NodeMeta& m = inst.meta_[v];
    if (m.service != 0.0) {
      blob += ";s" + std::to_string(v) + "=";
      append_number(blob, m.service);
    }
    if (m.window) {
      blob += ";w" + std::to_string(v) + "=";
      append_number(blob, m.window->first);
      blob += ",";
      append_number(blob, m.window->second);
    }
    if (m.revenue) {
      blob += ";p" + std::to_string(v) + "=";
      append_number(blob, *m.revenue);
    }
    if (m.demand) {
      blob += ";q" + std::to_string(v) + "=";
      append_number(blob, *m.demand);
    }
  }
  if (horizon) {
    blob += ";T=";
    append_number(blob, *horizon);
  }
  if (budget) {
    blob += ";U=";
    append_number(blob, *budget);
  }
  if (capacity) {
    blob += ";Q=";
    append_number(blob, *capacity);
  }
  inst.fingerprint_ = fnv1a(blob);
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

ArcSet arc_expand(const Instance& inst) {
  ArcSet set;
  const int n = inst.node_count();
  set.out.assign(n + 1, {});
  set.in.assign(n + 1, {});
  set.edge_arcs.assign(inst.edges().size(), {-1, -1});
  for (size_t e = 0; e < inst.edges().size(); ++e) {
    if (!inst.edge_active(static_cast<int>(e))) continue;
    const Edge& edge = inst.edges()[e];
    int fwd = static_cast<int>(set.arcs.size());
    set.arcs.push_back({edge.u, edge.v, static_cast<int>(e), edge.cost});
    set.arcs.push_back({edge.v, edge.u, static_cast<int>(e), edge.cost});
    set.edge_arcs[e] = {fwd, fwd + 1};
    set.out[edge.u].push_back(fwd);
    set.in[edge.v].push_back(fwd);
    set.out[edge.v].push_back(fwd + 1);
    set.in[edge.u].push_back(fwd + 1);
  }
  return set;
}

std::vector<double> shortest_paths(const Instance& inst, int source, EdgeWeight weight) {
  switch (weight) {
    case EdgeWeight::kCost:
      return dijkstra(inst, source, [](const Edge& e, int) { return e.cost; });
    case EdgeWeight::kTime:
      return dijkstra(inst, source, [&](const Edge& e, int) {
        if (!e.time) {
          throw Error("edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                      "} has no time payload");
        }
        return *e.time;
      });
    case EdgeWeight::kRequiredCount:
      return dijkstra(inst, source, [&](const Edge&, int head) {
        return head != 1 && inst.is_tour_required(head) ? 1.0 : 0.0;
      });
  }
  throw Error("unknown edge weight");
}

RankVector compute_ranks(const Instance& inst) {
  std::vector<double> dist = shortest_paths(inst, 1, EdgeWeight::kRequiredCount);
  RankVector ranks;
  ranks.r.assign(inst.node_count() + 1, -1);
  for (int v = 1; v <= inst.node_count(); ++v) {
    if (!inst.node_active(v)) continue;
    if (dist[v] >= kUnreachable) {
      throw Error("node " + std::to_string(v) + " unreachable from depot");
    }
    ranks.r[v] = static_cast<int>(std::llround(dist[v]));
  }
  return ranks;
}

TspConversion convert_to_tsp(const Instance& inst) {
  TspConversion conv;
  conv.nodes = inst.tour_required();
  const size_t m = conv.nodes.size();
  conv.dist.assign(m, std::vector<double>(m, 0.0));
  conv.witness.assign(m, std::vector<std::vector<int>>(m));
  for (size_t i = 0; i < m; ++i) {
    std::vector<int> pred;
    std::vector<double> dist =
        dijkstra(inst, conv.nodes[i], [](const Edge& e, int) { return e.cost; }, &pred);
    for (size_t j = 0; j < m; ++j) {
      int target = conv.nodes[j];
      if (dist[target] >= kUnreachable) {
        throw Error("required node " + std::to_string(target) + " unreachable");
      }
      conv.dist[i][j] = dist[target];
      std::vector<int> path;
      for (int v = target; v != 0; v = v == conv.nodes[i] ? 0 : pred[v]) path.push_back(v);
      std::reverse(path.begin(), path.end());
      conv.witness[i][j] = std::move(path);
    }
  }
  return conv;
}

double converted_tsp_optimum(const TspConversion& conv, std::vector<int>* order) {
  const size_t m = conv.nodes.size();
  if (m > 12) throw Error("converted TSP limited to 12 required nodes");
  if (m <= 1) {
    if (order) *order = conv.nodes;
    return 0.0;
  }
  const size_t k = m - 1;  // non-depot nodes, bit i <-> conv.nodes[i+1]
  const size_t full = size_t{1} << k;
  std::vector<std::vector<double>> dp(full, std::vector<double>(k, kUnreachable));
  std::vector<std::vector<int>> parent(full, std::vector<int>(k, -1));
  for (size_t j = 0; j < k; ++j) dp[size_t{1} << j][j] = conv.dist[0][j + 1];
  for (size_t mask = 1; mask < full; ++mask) {
    for (size_t j = 0; j < k; ++j) {
      if (!(mask >> j & 1) || dp[mask][j] >= kUnreachable) continue;
      for (size_t t = 0; t < k; ++t) {
        if (mask >> t & 1) continue;
        size_t next = mask | size_t{1} << t;
        double nd = dp[mask][j] + conv.dist[j + 1][t + 1];
        if (nd < dp[next][t]) {
          dp[next][t] = nd;
          parent[next][t] = static_cast<int>(j);
        }
      }
    }
  }
  double best = kUnreachable;
  size_t best_j = 0;
  for (size_t j = 0; j < k; ++j) {
    double total = dp[full - 1][j] + conv.dist[j + 1][0];
    if (total < best) {
      best = total;
      best_j = j;
    }
  }
  if (order) {
    std::vector<int> rev;
    size_t mask = full - 1;
    int j = static_cast<int>(best_j);
    while (j >= 0) {
      rev.push_back(conv.nodes[j + 1]);
      int p = parent[mask][j];
      mask &= ~(size_t{1} << j);
      j = p;
    }
    order->assign(1, conv.nodes[0]);
    order->insert(order->end(), rev.rbegin(), rev.rend());
  }
  return best;
}

std::vector<int> expand_required_tour(const Instance& inst, const TspConversion& conv,
                                      const std::vector<int>& order) {
  std::map<std::pair<int, int>, int> edge_index;
  for (size_t e = 0; e < inst.edges().size(); ++e) {
    if (!inst.edge_active(static_cast<int>(e))) continue;
    edge_index[{inst.edges()[e].u, inst.edges()[e].v}] = static_cast<int>(e);
  }
  std::map<int, size_t> pos;
  for (size_t i = 0; i < conv.nodes.size(); ++i) pos[conv.nodes[i]] = i;
  std::vector<int> uses(inst.edges().size(), 0);
  for (size_t leg = 0; leg < order.size(); ++leg) {
    int from = order[leg];
    int to = order[(leg + 1) % order.size()];
    const std::vector<int>& path = conv.witness.at(pos.at(from)).at(pos.at(to));
    for (size_t s = 0; s + 1 < path.size(); ++s) {
      int u = std::min(path[s], path[s + 1]);
      int v = std::max(path[s], path[s + 1]);
      ++uses[edge_index.at({u, v})];
    }
  }
  return uses;
}

}  // namespace stsp
