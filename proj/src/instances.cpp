#include "dbnd/instances.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "dbnd/error.hpp"

namespace dbnd {

namespace {

std::int64_t edge_key(VertexId u, VertexId v) {
  return (static_cast<std::int64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

}  // namespace

void DirectedInstance::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, what); };
  if (vertex_count <= 0) bad("vertex count must be positive");
  auto in_range = [&](VertexId v) { return v >= 0 && v < vertex_count; };
  if (!in_range(root)) bad("root id out of range");
  if (static_cast<std::int32_t>(degree_bound.size()) != vertex_count) bad("degree bound count mismatch");
  for (std::int32_t v = 0; v < vertex_count; ++v) {
    if (degree_bound[static_cast<std::size_t>(v)] < 1)
      bad("degree bound of vertex " + std::to_string(v) + " must be >= 1");
  }
  std::set<std::int64_t> seen;
  for (const Edge& e : edges) {
    if (!in_range(e.from) || !in_range(e.to)) bad("edge id out of range");
    if (e.from == e.to) bad("self-loop at vertex " + std::to_string(e.from));
    if (e.cost < 0) bad("negative edge cost");
    if (!seen.insert(edge_key(e.from, e.to)).second)
      bad("duplicate edge " + std::to_string(e.from) + " " + std::to_string(e.to));
  }
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    if (!in_range(terminals[i])) bad("terminal id out of range");
    if (terminals[i] == root) bad("root cannot be a terminal");
    if (i > 0 && terminals[i] <= terminals[i - 1]) bad("terminals must be sorted and unique");
  }
}

std::int32_t DirectedInstance::max_degree_bound() const {
  return degree_bound.empty() ? 0 : *std::max_element(degree_bound.begin(), degree_bound.end());
}

void NormalizedInstance::index() {
  const auto n = static_cast<std::size_t>(graph.vertex_count);
  terminal_flag_.assign(n, 0);
  for (VertexId t : graph.terminals) terminal_flag_[static_cast<std::size_t>(t)] = 1;
  out_edges_.assign(n, {});
  edge_lookup_.clear();
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const Edge& e = graph.edges[i];
    out_edges_[static_cast<std::size_t>(e.from)].push_back(static_cast<std::int32_t>(i));
    edge_lookup_.emplace(edge_key(e.from, e.to), static_cast<std::int32_t>(i));
  }
  for (auto& list : out_edges_) {
    std::sort(list.begin(), list.end(), [&](std::int32_t a, std::int32_t b) {
      return graph.edges[static_cast<std::size_t>(a)].to < graph.edges[static_cast<std::size_t>(b)].to;
    });
  }
}

std::int32_t NormalizedInstance::edge_index(VertexId u, VertexId v) const {
  auto it = edge_lookup_.find(edge_key(u, v));
  return it == edge_lookup_.end() ? -1 : it->second;
}

NormalizedInstance normalize(const DirectedInstance& inst) {
  inst.validate();
  const std::int32_t n0 = inst.vertex_count;

  std::int32_t n = n0;
  std::vector<std::int32_t> degree = inst.degree_bound;
  std::vector<VertexOrigin> origin;
  std::vector<PhiKind> phi;
  for (VertexId v = 0; v < n0; ++v) {
    origin.push_back({OriginKind::kOriginal, v});
    phi.push_back(PhiKind::kConstOne);
  }

  struct PendingEdge {
    VertexId from, to;
    Cost cost;
    std::int32_t source;
  };
  std::vector<std::vector<PendingEdge>> out(static_cast<std::size_t>(n0));
  std::vector<std::int32_t> indegree(static_cast<std::size_t>(n0), 0);
  for (std::size_t i = 0; i < inst.edges.size(); ++i) {
    const Edge& e = inst.edges[i];
    out[static_cast<std::size_t>(e.from)].push_back({e.from, e.to, e.cost, static_cast<std::int32_t>(i)});
    ++indegree[static_cast<std::size_t>(e.to)];
  }

  // Terminals become sinks with a single in-edge.
  std::vector<VertexId> terminals;
  for (VertexId t : inst.terminals) {
    const auto ti = static_cast<std::size_t>(t);
    if (indegree[ti] == 1 && out[ti].empty()) {
      terminals.push_back(t);
      continue;
    }
    const VertexId copy = n++;
    origin.push_back({OriginKind::kTerminalCopy, t});
    phi.push_back(PhiKind::kConstOne);
    degree.push_back(0);
    out.emplace_back();
    out[ti].push_back({t, copy, 0, -1});
    degree[ti] += 1;
    terminals.push_back(copy);
  }
  std::sort(terminals.begin(), terminals.end());
  std::vector<std::uint8_t> is_terminal(static_cast<std::size_t>(n), 0);
  for (VertexId t : terminals) is_terminal[static_cast<std::size_t>(t)] = 1;

  const std::int32_t d_max = *std::max_element(degree.begin(), degree.end());

  std::vector<Edge> edges;
  std::vector<std::int32_t> source;
  auto emit = [&](VertexId from, VertexId to, Cost cost, std::int32_t src) {
    edges.push_back({from, to, cost});
    source.push_back(src);
  };

  const std::int32_t vertices_before_gadgets = n;
  for (VertexId u = 0; u < vertices_before_gadgets; ++u) {
    auto list = out[static_cast<std::size_t>(u)];
    std::sort(list.begin(), list.end(), [](const PendingEdge& a, const PendingEdge& b) { return a.to < b.to; });
    if (list.size() <= 2 || is_terminal[static_cast<std::size_t>(u)]) {
      for (const auto& e : list) emit(u, e.to, e.cost, e.source);
      continue;
    }
    // Balanced full binary tree over the sorted out-neighbours, rooted at u.
    std::function<VertexId(std::size_t, std::size_t, bool)> build = [&](std::size_t lo, std::size_t hi,
                                                                         bool top) -> VertexId {
      const VertexId node = top ? u : n++;
      if (!top) {
        origin.push_back({OriginKind::kGadget, u});
        phi.push_back(PhiKind::kIdentity);
        degree.push_back(d_max);
      }
      const std::size_t mid = lo + (hi - lo + 1) / 2;
      for (auto [a, b] : {std::pair{lo, mid}, std::pair{mid, hi}}) {
        if (b - a == 1) {
          emit(node, list[a].to, list[a].cost, list[a].source);
        } else {
          const VertexId child = build(a, b, false);
          emit(node, child, 0, -1);
        }
      }
      return node;
    };
    build(0, list.size(), true);
  }

  NormalizedInstance out_inst;
  out_inst.graph.vertex_count = n;
  out_inst.graph.root = inst.root;
  out_inst.graph.terminals = std::move(terminals);
  out_inst.graph.degree_bound = std::move(degree);
  // Stable order: by tail, then head.
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (edges[a].from != edges[b].from) return edges[a].from < edges[b].from;
    return edges[a].to < edges[b].to;
  });
  for (std::size_t i : order) {
    out_inst.graph.edges.push_back(edges[i]);
    out_inst.source_edge.push_back(source[i]);
  }
  out_inst.origin = std::move(origin);
  out_inst.phi = std::move(phi);
  out_inst.source_vertex_count = n0;
  out_inst.index();
  return out_inst;
}

std::vector<std::vector<std::int32_t>> MultiTree::children() const {
  std::vector<std::vector<std::int32_t>> ch(label.size());
  for (std::size_t a = 0; a < parent.size(); ++a) {
    if (parent[a] >= 0) ch[static_cast<std::size_t>(parent[a])].push_back(static_cast<std::int32_t>(a));
  }
  return ch;
}

namespace {

// Children-before-parents order.
std::vector<std::int32_t> post_order(const MultiTree& tree, const std::vector<std::vector<std::int32_t>>& ch) {
  std::vector<std::int32_t> order;
  order.reserve(tree.label.size());
  std::vector<std::int32_t> stack{tree.root};
  while (!stack.empty()) {
    const std::int32_t a = stack.back();
    stack.pop_back();
    order.push_back(a);
    for (std::int32_t b : ch[static_cast<std::size_t>(a)]) stack.push_back(b);
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

std::vector<std::int32_t> original_degree(const MultiTree& tree, const NormalizedInstance& inst) {
  const auto ch = tree.children();
  std::vector<std::int32_t> rho(tree.label.size(), 0);
  for (std::int32_t a : post_order(tree, ch)) {
    std::int32_t sum = 0;
    for (std::int32_t b : ch[static_cast<std::size_t>(a)]) {
      const VertexId lb = tree.label[static_cast<std::size_t>(b)];
      require(lb >= 0 && lb < inst.vertex_count(), ErrorCode::kInvalidArgument,
              "multi-tree label without a transformation function");
      sum += inst.apply_phi(lb, rho[static_cast<std::size_t>(b)]);
    }
    rho[static_cast<std::size_t>(a)] = sum;
  }
  return rho;
}

MultiTree lift_tree(const NormalizedInstance& inst, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  const auto n = static_cast<std::size_t>(inst.vertex_count());
  std::vector<std::vector<std::int32_t>> in_edges(n);
  for (std::size_t i = 0; i < inst.graph.edges.size(); ++i)
    in_edges[static_cast<std::size_t>(inst.graph.edges[i].to)].push_back(static_cast<std::int32_t>(i));
  // Owner of the out-star a normalized vertex belongs to: itself, or the vertex
  // whose star a gadget vertex replaces.
  auto owner = [&](VertexId v) {
    const auto& o = inst.origin[static_cast<std::size_t>(v)];
    return o.kind == OriginKind::kGadget ? o.vertex : v;
  };
  std::vector<VertexId> parent(n, -1);
  std::vector<std::uint8_t> used(n, 0);
  used[static_cast<std::size_t>(inst.graph.root)] = 1;
  auto attach = [&](VertexId u, VertexId w) {
    VertexId cur = w;
    while (true) {
      VertexId tail = -1;
      for (std::int32_t e : in_edges[static_cast<std::size_t>(cur)]) {
        const VertexId x = inst.graph.edges[static_cast<std::size_t>(e)].from;
        if (owner(x) == u) tail = x;
      }
      require(tail >= 0, ErrorCode::kInvalidArgument,
              "(" + std::to_string(u) + "," + std::to_string(w) + ") is not an input edge");
      require(parent[static_cast<std::size_t>(cur)] < 0 || parent[static_cast<std::size_t>(cur)] == tail,
              ErrorCode::kInvalidArgument, "lift_tree input is not an arborescence");
      parent[static_cast<std::size_t>(cur)] = tail;
      used[static_cast<std::size_t>(cur)] = 1;
      if (tail == u) break;
      cur = tail;
    }
    used[static_cast<std::size_t>(u)] = 1;
  };
  for (auto [u, w] : edges) {
    require(u >= 0 && u < inst.source_vertex_count && w >= 0 && w < inst.source_vertex_count,
            ErrorCode::kInvalidArgument, "lift_tree edge out of range");
    attach(u, w);
  }
  // Split terminals keep their copy below them.
  for (std::size_t v = static_cast<std::size_t>(inst.source_vertex_count); v < n; ++v) {
    const auto& o = inst.origin[v];
    if (o.kind == OriginKind::kTerminalCopy && used[static_cast<std::size_t>(o.vertex)])
      attach(o.vertex, static_cast<VertexId>(v));
  }
  MultiTree out;
  std::vector<std::int32_t> node(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (!used[v]) continue;
    node[v] = out.size();
    out.label.push_back(static_cast<VertexId>(v));
    out.parent.push_back(-1);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!used[v]) continue;
    if (parent[v] >= 0) out.parent[static_cast<std::size_t>(node[v])] = node[static_cast<std::size_t>(parent[v])];
  }
  out.root = node[static_cast<std::size_t>(inst.graph.root)];
  return out;
}

Cost multi_tree_cost(const MultiTree& tree, const NormalizedInstance& inst) {
  Cost total = 0;
  for (std::size_t a = 0; a < tree.label.size(); ++a) {
    const std::int32_t p = tree.parent[a];
    if (p < 0) continue;
    const std::int32_t e = inst.edge_index(tree.label[static_cast<std::size_t>(p)], tree.label[a]);
    require(e >= 0, ErrorCode::kInvariantViolation, "multi-tree edge is not a graph edge");
    total += inst.graph.edges[static_cast<std::size_t>(e)].cost;
  }
  return total;
}

std::string check_good_multi_tree(const MultiTree& tree, const NormalizedInstance& inst) {
  if (tree.root < 0 || tree.root >= tree.size()) return "missing root";
  if (tree.label[static_cast<std::size_t>(tree.root)] != inst.graph.root) return "root is not a copy of r";
  const auto ch = tree.children();
  for (std::int32_t a = 0; a < tree.size(); ++a) {
    const VertexId la = tree.label[static_cast<std::size_t>(a)];
    if (la < 0 || la >= inst.vertex_count()) return "label out of range at node " + std::to_string(a);
    const std::int32_t p = tree.parent[static_cast<std::size_t>(a)];
    if ((p < 0) != (a == tree.root)) return "node " + std::to_string(a) + " has an inconsistent parent";
    if (p >= 0 && inst.edge_index(tree.label[static_cast<std::size_t>(p)], la) < 0)
      return "edge into node " + std::to_string(a) + " is not a graph edge";
    if (ch[static_cast<std::size_t>(a)].empty() && !inst.is_terminal(la))
      return "leaf " + std::to_string(a) + " is not a terminal copy";
  }
  const auto rho = original_degree(tree, inst);
  for (std::int32_t a = 0; a < tree.size(); ++a) {
    if (ch[static_cast<std::size_t>(a)].empty()) continue;
    const VertexId la = tree.label[static_cast<std::size_t>(a)];
    if (rho[static_cast<std::size_t>(a)] > inst.degree_bound(la))
      return "original degree " + std::to_string(rho[static_cast<std::size_t>(a)]) + " of node " +
             std::to_string(a) + " (vertex " + std::to_string(la) + ") exceeds bound " +
             std::to_string(inst.degree_bound(la));
  }
  return {};
}

VertexId GroupTreeInstance::root() const {
  for (VertexId v = 0; v < vertex_count; ++v)
    if (parent[static_cast<std::size_t>(v)] < 0) return v;
  return -1;
}

std::vector<std::vector<VertexId>> GroupTreeInstance::children() const {
  std::vector<std::vector<VertexId>> ch(static_cast<std::size_t>(vertex_count));
  for (VertexId v = 0; v < vertex_count; ++v) {
    const VertexId p = parent[static_cast<std::size_t>(v)];
    if (p >= 0) ch[static_cast<std::size_t>(p)].push_back(v);
  }
  return ch;
}

std::vector<std::int32_t> GroupTreeInstance::base_degree_bounds() const {
  std::vector<std::int32_t> d = degree_bound;
  if (synthetic_leaf.empty()) return d;
  for (VertexId c = 0; c < vertex_count; ++c) {
    if (synthetic_leaf[static_cast<std::size_t>(c)] && parent[static_cast<std::size_t>(c)] >= 0)
      --d[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])];
  }
  return d;
}

void GroupTreeInstance::validate(bool strict) const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, what); };
  const auto n = static_cast<std::size_t>(vertex_count);
  if (vertex_count <= 0) bad("vertex count must be positive");
  if (parent.size() != n || cost.size() != n || degree_bound.size() != n) bad("per-vertex array size mismatch");
  if (!synthetic_leaf.empty() && synthetic_leaf.size() != n) bad("synthetic flag size mismatch");
  std::int32_t roots = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] < 0) {
      ++roots;
    } else if (parent[v] >= vertex_count || parent[v] == static_cast<VertexId>(v)) {
      bad("parent of vertex " + std::to_string(v) + " out of range");
    }
    if (cost[v] < 0) bad("negative vertex cost");
    if (degree_bound[v] < 1) bad("degree bound of vertex " + std::to_string(v) + " must be >= 1");
    if (!synthetic_leaf.empty() && synthetic_leaf[v] && cost[v] != 0) bad("synthetic leaf with non-zero cost");
  }
  if (roots != 1) bad("parent mapping must have exactly one root");
  // Every vertex must reach the root without revisiting.
  std::vector<std::int8_t> state(n, 0);  // 0 unknown, 1 in progress, 2 reaches root
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> path;
    std::size_t u = v;
    while (state[u] == 0) {
      state[u] = 1;
      path.push_back(u);
      if (parent[u] < 0) break;
      u = static_cast<std::size_t>(parent[u]);
    }
    if (state[u] == 1 && parent[u] >= 0) bad("parent mapping contains a cycle");
    for (std::size_t w : path) state[w] = 2;
  }
  std::vector<std::int32_t> child_count(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (parent[v] >= 0) ++child_count[static_cast<std::size_t>(parent[v])];
  std::vector<std::int32_t> owner(n, -1);
  for (std::size_t t = 0; t < groups.size(); ++t) {
    for (VertexId v : groups[t]) {
      if (v < 0 || v >= vertex_count) bad("group member id out of range");
      if (!strict) continue;
      if (child_count[static_cast<std::size_t>(v)] != 0) bad("group member " + std::to_string(v) + " is not a leaf");
      if (owner[static_cast<std::size_t>(v)] >= 0) bad("groups are not disjoint at vertex " + std::to_string(v));
      owner[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(t);
    }
  }
}

GroupTreeInstance preprocess_gst(const GroupTreeInstance& inst, const std::vector<Cost>& edge_cost_into) {
  inst.validate(false);
  GroupTreeInstance out = inst;
  if (out.synthetic_leaf.empty()) out.synthetic_leaf.assign(static_cast<std::size_t>(out.vertex_count), 0);
  if (!edge_cost_into.empty()) {
    require(edge_cost_into.size() == static_cast<std::size_t>(inst.vertex_count), ErrorCode::kInvalidArgument,
            "edge cost vector size mismatch");
    for (std::size_t v = 0; v < edge_cost_into.size(); ++v) {
      require(edge_cost_into[v] >= 0, ErrorCode::kInvalidArgument, "negative edge cost");
      if (inst.parent[v] >= 0) out.cost[v] += edge_cost_into[v];
    }
  }
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  std::vector<std::int32_t> child_count(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (inst.parent[v] >= 0) ++child_count[static_cast<std::size_t>(inst.parent[v])];
  std::vector<std::vector<std::int32_t>> memberships(n);
  for (std::size_t t = 0; t < inst.groups.size(); ++t) {
    std::vector<VertexId> members = inst.groups[t];
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (VertexId v : members) memberships[static_cast<std::size_t>(v)].push_back(static_cast<std::int32_t>(t));
  }
  for (auto& g : out.groups) g.clear();
  for (std::size_t v = 0; v < n; ++v) {
    const auto& m = memberships[v];
    if (m.size() == 1 && child_count[v] == 0) {
      out.groups[static_cast<std::size_t>(m[0])].push_back(static_cast<VertexId>(v));
      continue;
    }
    for (std::int32_t t : m) {
      const VertexId leaf = out.vertex_count++;
      out.parent.push_back(static_cast<VertexId>(v));
      out.cost.push_back(0);
      out.degree_bound.push_back(1);
      out.synthetic_leaf.push_back(1);
      out.degree_bound[v] += 1;
      out.groups[static_cast<std::size_t>(t)].push_back(leaf);
    }
  }
  for (auto& g : out.groups) std::sort(g.begin(), g.end());
  return out;
}

}  // namespace dbnd
