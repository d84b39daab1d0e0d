#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "dbnd/error.hpp"
#include "dbnd/states.hpp"
#include "dbnd/treekit.hpp"

namespace dbnd {

std::int32_t State::degree_of(VertexId v) const {
  auto it = std::lower_bound(portals.begin(), portals.end(), v);
  if (it == portals.end() || *it != v) return -1;
  return degree[static_cast<std::size_t>(it - portals.begin())];
}

std::string to_string(const State& s) {
  std::ostringstream os;
  os << "(r'=" << s.root << ", {";
  for (std::size_t i = 0; i < s.portals.size(); ++i) {
    if (i) os << ',';
    os << s.portals[i] << ':' << s.degree[i];
  }
  os << "})";
  return os.str();
}

namespace {

bool contains(std::span<const VertexId> sorted, VertexId v) { return std::binary_search(sorted.begin(), sorted.end(), v); }

}  // namespace

bool is_allowable_child_pair(VertexId parent_root, std::span<const VertexId> parent_portals, VertexId left_root,
                             std::span<const VertexId> left_portals, VertexId right_root,
                             std::span<const VertexId> right_portals) {
  if (left_root != parent_root || right_root == parent_root) return false;
  if (!contains(parent_portals, parent_root) || !contains(left_portals, left_root) ||
      !contains(right_portals, right_root))
    return false;
  if (contains(parent_portals, right_root)) return false;
  std::vector<VertexId> uni, inter, expected(parent_portals.begin(), parent_portals.end());
  std::set_union(left_portals.begin(), left_portals.end(), right_portals.begin(), right_portals.end(),
                 std::back_inserter(uni));
  std::set_intersection(left_portals.begin(), left_portals.end(), right_portals.begin(), right_portals.end(),
                        std::back_inserter(inter));
  expected.insert(std::upper_bound(expected.begin(), expected.end(), right_root), right_root);
  return uni == expected && inter.size() == 1 && inter[0] == right_root;
}

bool degree_vectors_consistent(const State& parent, const State& left, const State& right) {
  const VertexId split = right.root;
  for (std::size_t i = 0; i < left.portals.size(); ++i) {
    if (left.portals[i] == split) continue;
    if (parent.degree_of(left.portals[i]) != left.degree[i]) return false;
  }
  for (std::size_t i = 0; i < right.portals.size(); ++i) {
    if (right.portals[i] == split) continue;
    if (parent.degree_of(right.portals[i]) != right.degree[i]) return false;
  }
  const std::int32_t dl = left.degree_of(split);
  return dl >= 0 && dl == right.degree_of(split);
}

namespace {

// phi_v(rho_v) for portals, 1 for terminals.
std::int32_t contribution(const NormalizedInstance& inst, const State& s, VertexId v) {
  if (inst.is_terminal(v)) return 1;
  return inst.apply_phi(v, s.degree_of(v));
}

void check_payload_portals(const NormalizedInstance& inst, const State& s, std::span<const std::int32_t> edges) {
  std::vector<VertexId> expected{s.root};
  for (std::int32_t e : edges) {
    require(e >= 0 && e < static_cast<std::int32_t>(inst.graph.edges.size()), ErrorCode::kInvalidArgument,
            "payload edge out of range");
    const Edge& edge = inst.graph.edges[static_cast<std::size_t>(e)];
    require(edge.from == s.root, ErrorCode::kInvalidArgument, "payload edge does not leave the state root");
    if (!inst.is_terminal(edge.to)) expected.push_back(edge.to);
  }
  std::sort(expected.begin(), expected.end());
  require(!inst.is_terminal(s.root) && expected == s.portals, ErrorCode::kInvalidArgument,
          "payload vertices minus terminals differ from the portal set");
}

}  // namespace

bool edge_agrees(const NormalizedInstance& inst, const State& s, std::int32_t edge) {
  const std::array<std::int32_t, 1> edges{edge};
  check_payload_portals(inst, s, edges);
  const VertexId v = inst.graph.edges[static_cast<std::size_t>(edge)].to;
  return s.degree_of(s.root) == contribution(inst, s, v);
}

bool triple_agrees(const NormalizedInstance& inst, const State& s, std::int32_t edge_a, std::int32_t edge_b) {
  const std::array<std::int32_t, 2> edges{edge_a, edge_b};
  check_payload_portals(inst, s, edges);
  const VertexId v = inst.graph.edges[static_cast<std::size_t>(edge_a)].to;
  const VertexId w = inst.graph.edges[static_cast<std::size_t>(edge_b)].to;
  require(v != w, ErrorCode::kInvalidArgument, "triple needs two distinct heads");
  return s.degree_of(s.root) == contribution(inst, s, v) + contribution(inst, s, w);
}

Cost StateTree::cost(const NormalizedInstance& inst) const {
  Cost total = 0;
  for (const auto& node : nodes) {
    if (!node.is_leaf()) continue;
    for (std::int32_t e : node.leaf_edges)
      if (e >= 0) total += inst.graph.edges[static_cast<std::size_t>(e)].cost;
  }
  return total;
}

std::int32_t StateTree::depth() const {
  if (root < 0) return -1;
  std::int32_t best = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [p, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const auto& node = nodes[static_cast<std::size_t>(p)];
    if (node.left >= 0) stack.push_back({node.left, d + 1});
    if (node.right >= 0) stack.push_back({node.right, d + 1});
  }
  return best;
}

std::vector<VertexId> StateTree::involved_terminals(const NormalizedInstance& inst) const {
  std::vector<VertexId> out;
  for (const auto& node : nodes) {
    if (!node.is_leaf()) continue;
    for (std::int32_t e : node.leaf_edges) {
      if (e < 0) continue;
      const VertexId v = inst.graph.edges[static_cast<std::size_t>(e)].to;
      if (inst.is_terminal(v)) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StateTree gen_state_tree(const MultiTree& tree, const NormalizedInstance& inst, std::int32_t height) {
  require(tree.size() >= 2, ErrorCode::kInvalidArgument, "state tree needs at least one edge");
  {
    std::vector<VertexId> labels = tree.label;
    std::sort(labels.begin(), labels.end());
    require(std::adjacent_find(labels.begin(), labels.end()) == labels.end(), ErrorCode::kInvalidArgument,
            "gen_state_tree expects a tree with distinct labels");
  }
  const auto rho = original_degree(tree, inst);
  const RootedTree whole(tree.parent);

  StateTree out;
  // Local nodes of a piece carry the multi-tree node index as external id.
  std::function<std::int32_t(const RootedTree&)> build = [&](const RootedTree& piece) -> std::int32_t {
    StateTreeNode node;
    const std::int32_t root_node = piece.id(piece.root());
    node.state.root = tree.label[static_cast<std::size_t>(root_node)];
    std::vector<std::pair<VertexId, std::int32_t>> portals{{node.state.root, rho[static_cast<std::size_t>(root_node)]}};
    for (std::int32_t u = 0; u < piece.size(); ++u) {
      if (u == piece.root() || !piece.children(u).empty()) continue;
      const std::int32_t mt = piece.id(u);
      const VertexId label = tree.label[static_cast<std::size_t>(mt)];
      if (!inst.is_terminal(label)) portals.push_back({label, rho[static_cast<std::size_t>(mt)]});
    }
    std::sort(portals.begin(), portals.end());
    for (auto [v, d] : portals) {
      node.state.portals.push_back(v);
      node.state.degree.push_back(d);
    }
    const auto index = static_cast<std::int32_t>(out.nodes.size());
    out.nodes.push_back(node);
    if (piece.is_one_level()) {
      std::vector<std::int32_t> edges;
      for (std::int32_t c : piece.children(piece.root())) {
        const std::int32_t e = inst.edge_index(node.state.root, tree.label[static_cast<std::size_t>(piece.id(c))]);
        require(e >= 0, ErrorCode::kInvalidArgument, "tree edge is not a graph edge");
        edges.push_back(e);
      }
      std::sort(edges.begin(), edges.end());
      for (std::size_t i = 0; i < edges.size(); ++i) out.nodes[static_cast<std::size_t>(index)].leaf_edges[i] = edges[i];
      return index;
    }
    auto [upper, lower] = split_at(piece, find_balanced_separator(piece));
    const std::int32_t left = build(upper);
    const std::int32_t right = build(lower);
    out.nodes[static_cast<std::size_t>(index)].left = left;
    out.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  };
  // RootedTree ids default to node indices, which are the multi-tree indices.
  out.root = build(whole);
  if (height >= 0 && out.depth() > height)
    fail(ErrorCode::kCapExceeded, "state tree depth " + std::to_string(out.depth()) + " exceeds height " +
                                      std::to_string(height));
  return out;
}

std::vector<StateTreeViolation> validate_state_tree(const StateTree& tree, const NormalizedInstance& inst,
                                                    std::int32_t height) {
  std::vector<StateTreeViolation> out;
  auto report = [&](std::int32_t node, std::string what) { out.push_back({node, std::move(what)}); };
  const auto n = static_cast<std::int32_t>(tree.nodes.size());
  if (tree.root < 0 || tree.root >= n) {
    report(-1, "missing root");
    return out;
  }
  // Shape: every node reached exactly once from the root.
  std::vector<std::int32_t> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> stack{tree.root};
  while (!stack.empty()) {
    const std::int32_t p = stack.back();
    stack.pop_back();
    if (p < 0 || p >= n) {
      report(p, "child index out of range");
      return out;
    }
    if (seen[static_cast<std::size_t>(p)]++) {
      report(p, "node reached twice");
      return out;
    }
    const auto& node = tree.nodes[static_cast<std::size_t>(p)];
    if ((node.left < 0) != (node.right < 0)) {
      report(p, "internal node without two children");
      continue;
    }
    if (node.left >= 0) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  if (height >= 0 && tree.depth() > height)
    report(tree.root, "depth " + std::to_string(tree.depth()) + " exceeds " + std::to_string(height));

  const State& rs = tree.nodes[static_cast<std::size_t>(tree.root)].state;
  if (rs.root != inst.graph.root || rs.portals != std::vector<VertexId>{inst.graph.root})
    report(tree.root, "root state is not (r, {r})");

  for (std::int32_t p = 0; p < n; ++p) {
    if (!seen[static_cast<std::size_t>(p)]) continue;
    const auto& node = tree.nodes[static_cast<std::size_t>(p)];
    const State& s = node.state;
    bool state_ok = s.portals.size() == s.degree.size() && std::is_sorted(s.portals.begin(), s.portals.end()) &&
                    std::adjacent_find(s.portals.begin(), s.portals.end()) == s.portals.end() &&
                    s.has_portal(s.root);
    for (std::size_t i = 0; state_ok && i < s.portals.size(); ++i) {
      const VertexId v = s.portals[i];
      if (v < 0 || v >= inst.vertex_count() || inst.is_terminal(v) || s.degree[i] < 1 ||
          s.degree[i] > inst.degree_bound(v))
        state_ok = false;
    }
    if (!state_ok) {
      report(p, "invalid state " + to_string(s));
      continue;
    }
    if (node.is_leaf()) {
      const auto& pe = node.leaf_edges;
      try {
        bool agrees = false;
        if (pe[0] >= 0 && pe[1] >= 0) {
          agrees = triple_agrees(inst, s, pe[0], pe[1]);
        } else if (pe[0] >= 0 || pe[1] >= 0) {
          agrees = edge_agrees(inst, s, pe[0] >= 0 ? pe[0] : pe[1]);
        } else {
          report(p, "leaf without edge or triple");
          continue;
        }
        if (!agrees) report(p, "leaf payload does not agree with degree vector " + to_string(s));
      } catch (const Error& e) {
        report(p, std::string("leaf payload: ") + e.what());
      }
      continue;
    }
    const State& l = tree.nodes[static_cast<std::size_t>(node.left)].state;
    const State& r = tree.nodes[static_cast<std::size_t>(node.right)].state;
    if (!is_allowable_child_pair(s.root, s.portals, l.root, l.portals, r.root, r.portals)) {
      report(p, "children are not an allowable child-pair");
      continue;
    }
    if (!degree_vectors_consistent(s, l, r)) report(p, "child degree vectors are not consistent");
  }
  return out;
}

MultiTree stitch_multi_tree(const StateTree& tree, const NormalizedInstance& inst) {
  const auto violations = validate_state_tree(tree, inst, -1);
  if (!violations.empty())
    fail(ErrorCode::kInvariantViolation,
         "cannot stitch an invalid state tree: node " + std::to_string(violations.front().node) + ": " +
             violations.front().what);

  std::vector<VertexId> label;
  std::vector<std::int32_t> parent;
  std::vector<std::vector<std::int32_t>> kids;
  std::vector<std::uint8_t> dead;
  auto add = [&](VertexId v, std::int32_t p) {
    const auto a = static_cast<std::int32_t>(label.size());
    label.push_back(v);
    parent.push_back(p);
    kids.emplace_back();
    dead.push_back(0);
    if (p >= 0) kids[static_cast<std::size_t>(p)].push_back(a);
    return a;
  };

  using Mapping = std::map<VertexId, std::int32_t>;  // portal -> multi-tree node
  std::function<std::pair<std::int32_t, Mapping>(std::int32_t)> build =
      [&](std::int32_t p) -> std::pair<std::int32_t, Mapping> {
    const auto& node = tree.nodes[static_cast<std::size_t>(p)];
    const State& s = node.state;
    if (node.is_leaf()) {
      const std::int32_t top = add(s.root, -1);
      Mapping pi{{s.root, top}};
      for (std::int32_t e : node.leaf_edges) {
        if (e < 0) continue;
        const VertexId v = inst.graph.edges[static_cast<std::size_t>(e)].to;
        const std::int32_t a = add(v, top);
        if (!inst.is_terminal(v)) pi[v] = a;
      }
      return {top, std::move(pi)};
    }
    auto [left_root, left_pi] = build(node.left);
    auto [right_root, right_pi] = build(node.right);
    const VertexId split = tree.nodes[static_cast<std::size_t>(node.right)].state.root;
    const std::int32_t joint = left_pi.at(split);
    for (std::int32_t c : kids[static_cast<std::size_t>(right_root)]) {
      parent[static_cast<std::size_t>(c)] = joint;
      kids[static_cast<std::size_t>(joint)].push_back(c);
    }
    kids[static_cast<std::size_t>(right_root)].clear();
    dead[static_cast<std::size_t>(right_root)] = 1;
    Mapping pi;
    for (auto [v, a] : left_pi)
      if (v != split) pi[v] = a;
    for (auto [v, a] : right_pi)
      if (v != split) pi[v] = a;
    return {left_root, std::move(pi)};
  };
  const std::int32_t top = build(tree.root).first;

  MultiTree out;
  std::vector<std::int32_t> remap(label.size(), -1);
  for (std::size_t a = 0; a < label.size(); ++a) {
    if (dead[a]) continue;
    remap[a] = out.size();
    out.label.push_back(label[a]);
    out.parent.push_back(-1);
  }
  for (std::size_t a = 0; a < label.size(); ++a) {
    if (dead[a] || parent[a] < 0) continue;
    out.parent[static_cast<std::size_t>(remap[a])] = remap[static_cast<std::size_t>(parent[a])];
  }
  out.root = remap[static_cast<std::size_t>(top)];
  return out;
}

}  // namespace dbnd
