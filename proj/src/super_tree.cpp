#include <algorithm>
#include <functional>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "dbnd/error.hpp"
#include "dbnd/states.hpp"
#include "dbnd/treekit.hpp"

namespace dbnd {

std::int32_t SuperTree::count(SuperKind kind) const {
  return static_cast<std::int32_t>(
      std::count_if(nodes.begin(), nodes.end(), [kind](const SuperNode& n) { return n.kind == kind; }));
}

std::vector<std::int32_t> SuperTree::base_nodes_involving(VertexId v, const NormalizedInstance& inst) const {
  std::vector<std::int32_t> out;
  for (std::int32_t p = 0; p < size(); ++p) {
    const auto& node = nodes[static_cast<std::size_t>(p)];
    if (node.kind != SuperKind::kBase) continue;
    for (std::int32_t e : node.edges) {
      if (e >= 0 && inst.graph.edges[static_cast<std::size_t>(e)].to == v) {
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

std::int32_t SuperTree::root_level() const {
  std::vector<std::int32_t> height(nodes.size(), 0);
  for (auto p = static_cast<std::int32_t>(nodes.size()) - 1; p > 0; --p) {
    const std::int32_t q = nodes[static_cast<std::size_t>(p)].parent;
    height[static_cast<std::size_t>(q)] = std::max(height[static_cast<std::size_t>(q)], height[static_cast<std::size_t>(p)] + 1);
  }
  return nodes.empty() ? 0 : height[0];
}

void SuperTree::index_children() {
  const std::size_t n = nodes.size();
  child_offset_.assign(n + 1, 0);
  for (std::size_t p = 1; p < n; ++p) ++child_offset_[static_cast<std::size_t>(nodes[p].parent) + 1];
  for (std::size_t p = 0; p < n; ++p) child_offset_[p + 1] += child_offset_[p];
  child_list_.assign(n == 0 ? 0 : n - 1, 0);
  std::vector<std::int32_t> fill(child_offset_.begin(), child_offset_.end() - 1);
  for (std::size_t p = 1; p < n; ++p)
    child_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(nodes[p].parent)]++)] = static_cast<std::int32_t>(p);
}

namespace {

std::string state_key(const State& s) {
  std::string key;
  key.reserve(4 * (1 + 2 * s.portals.size()));
  auto put = [&key](std::int32_t x) { key.append(reinterpret_cast<const char*>(&x), sizeof x); };
  put(s.root);
  for (std::size_t i = 0; i < s.portals.size(); ++i) {
    put(s.portals[i]);
    put(s.degree[i]);
  }
  return key;
}

struct VirtualOption {
  State left;
  State right;
};

class Builder {
 public:
  Builder(const NormalizedInstance& inst, const SuperTreeOptions& opt, std::int32_t height)
      : inst_(inst), opt_(opt), height_(height) {
    const auto n = static_cast<std::size_t>(inst.vertex_count());
    // reach_[u][v]: v reachable from u by a path of length >= 0.
    reach_.assign(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t u = 0; u < n; ++u) {
      std::vector<VertexId> stack{static_cast<VertexId>(u)};
      reach_[u][u] = 1;
      while (!stack.empty()) {
        const VertexId x = stack.back();
        stack.pop_back();
        for (std::int32_t e : inst.out_edges(x)) {
          const VertexId y = inst.graph.edges[static_cast<std::size_t>(e)].to;
          if (!reach_[u][static_cast<std::size_t>(y)]) {
            reach_[u][static_cast<std::size_t>(y)] = 1;
            stack.push_back(y);
          }
        }
      }
    }
  }

  SuperTree build() {
    out_.height = height_;
    out_.nodes.push_back(SuperNode{});
    const VertexId r = inst_.graph.root;
    require(!inst_.is_terminal(r), ErrorCode::kInvalidArgument, "root is a terminal");
    for (std::int32_t rho = 1; rho <= inst_.degree_bound(r); ++rho) {
      State s{r, {r}, {rho}};
      if (opt_.prune_during_build && !alive(s, height_)) continue;
      build_state(s, 0, 0);
    }
    if (!opt_.prune_during_build) prune();
    out_.index_children();
    return std::move(out_);
  }

 private:
  // Payloads (edge or triple) that agree with s, as edge-index pairs.
  std::vector<std::array<std::int32_t, 2>> base_payloads(const State& s) const {
    std::vector<std::array<std::int32_t, 2>> out;
    const auto& oe = inst_.out_edges(s.root);
    auto portals_match = [&](std::initializer_list<std::int32_t> edges) {
      std::size_t expected = 1;
      for (std::int32_t e : edges) {
        const VertexId v = inst_.graph.edges[static_cast<std::size_t>(e)].to;
        if (inst_.is_terminal(v)) continue;
        if (!s.has_portal(v)) return false;
        ++expected;
      }
      return expected == s.portals.size();
    };
    for (std::int32_t e : oe)
      if (portals_match({e}) && edge_agrees(inst_, s, e)) out.push_back({e, -1});
    if (oe.size() == 2 && portals_match({oe[0], oe[1]}) && triple_agrees(inst_, s, oe[0], oe[1]))
      out.push_back({oe[0], oe[1]});
    return out;
  }

  template <typename Fn>
  void for_each_virtual(const State& s, Fn&& fn) const {
    std::vector<VertexId> others;
    for (VertexId v : s.portals)
      if (v != s.root) others.push_back(v);
    const std::uint32_t splits = 1u << others.size();
    for (VertexId r2 = 0; r2 < inst_.vertex_count(); ++r2) {
      if (inst_.is_terminal(r2) || s.has_portal(r2)) continue;
      if (!reach_[static_cast<std::size_t>(s.root)][static_cast<std::size_t>(r2)]) continue;
      for (std::uint32_t mask = 0; mask < splits; ++mask) {
        bool reachable = true;
        for (std::size_t i = 0; i < others.size() && reachable; ++i)
          if (mask >> i & 1u) reachable = reach_[static_cast<std::size_t>(r2)][static_cast<std::size_t>(others[i])] != 0;
        if (!reachable) continue;
        for (std::int32_t x = 1; x <= inst_.degree_bound(r2); ++x) {
          VirtualOption o;
          o.left.root = s.root;
          o.right.root = r2;
          std::vector<std::pair<VertexId, std::int32_t>> lp{{r2, x}}, rp{{r2, x}};
          for (std::size_t i = 0; i < s.portals.size(); ++i) {
            const VertexId v = s.portals[i];
            const auto idx = std::find(others.begin(), others.end(), v);
            const bool moved = idx != others.end() && (mask >> (idx - others.begin()) & 1u);
            (moved ? rp : lp).push_back({v, s.degree[i]});
          }
          std::sort(lp.begin(), lp.end());
          std::sort(rp.begin(), rp.end());
          for (auto [v, d] : lp) {
            o.left.portals.push_back(v);
            o.left.degree.push_back(d);
          }
          for (auto [v, d] : rp) {
            o.right.portals.push_back(v);
            o.right.degree.push_back(d);
          }
          if (fn(o)) return;
        }
      }
    }
  }

  // Whether some good state subtree of depth <= levels exists below s.
  bool alive(const State& s, std::int32_t levels) {
    const auto& memo = memo_[state_key(s)];
    if (memo.min_true >= 0 && levels >= memo.min_true) return true;
    if (levels <= memo.max_false) return false;
    bool result = !base_payloads(s).empty();
    if (!result && levels > 0) {
      for_each_virtual(s, [&](const VirtualOption& o) {
        result = alive(o.right, levels - 1) && alive(o.left, levels - 1);
        return result;
      });
    }
    auto& m = memo_[state_key(s)];
    if (result)
      m.min_true = m.min_true < 0 ? levels : std::min(m.min_true, levels);
    else
      m.max_false = std::max(m.max_false, levels);
    return result;
  }

  std::int32_t add(SuperNode node) {
    if (static_cast<std::int64_t>(out_.nodes.size()) >= opt_.node_cap)
      fail(ErrorCode::kCapExceeded, "super-tree node cap " + std::to_string(opt_.node_cap) +
                                        " exceeded while building state level " + std::to_string(node.level) +
                                        " (height " + std::to_string(height_) + "); lower n, the height, or d_max");
    out_.nodes.push_back(node);
    return static_cast<std::int32_t>(out_.nodes.size()) - 1;
  }

  std::int32_t intern(const State& s) {
    auto [it, inserted] = interned_.try_emplace(state_key(s), static_cast<std::int32_t>(out_.states.size()));
    if (inserted) out_.states.push_back(s);
    return it->second;
  }

  void build_state(const State& s, std::int32_t level, std::int32_t parent) {
    SuperNode node;
    node.kind = SuperKind::kState;
    node.parent = parent;
    node.state = intern(s);
    node.level = level;
    const std::int32_t self = add(node);
    for (const auto& payload : base_payloads(s)) {
      SuperNode base;
      base.kind = SuperKind::kBase;
      base.parent = self;
      base.level = level;
      base.edges = payload;
      for (std::int32_t e : payload)
        if (e >= 0) base.cost += inst_.graph.edges[static_cast<std::size_t>(e)].cost;
      add(base);
    }
    if (level >= height_) return;
    std::vector<VirtualOption> kept;
    for_each_virtual(s, [&](const VirtualOption& o) {
      if (!opt_.prune_during_build ||
          (alive(o.right, height_ - level - 1) && alive(o.left, height_ - level - 1)))
        kept.push_back(o);
      return false;
    });
    for (const auto& o : kept) {
      SuperNode v;
      v.kind = SuperKind::kVirtual;
      v.parent = self;
      v.level = level;
      const std::int32_t vi = add(v);
      build_state(o.left, level + 1, vi);
      build_state(o.right, level + 1, vi);
    }
  }

  // Removes state nodes without children and virtual nodes missing a child,
  // then compacts the arena.
  void prune() {
    auto& nodes = out_.nodes;
    const std::size_t n = nodes.size();
    std::vector<std::int32_t> live_children(n, 0);
    std::vector<std::uint8_t> live(n, 0);
    for (std::size_t p = n; p-- > 1;) {
      const auto& node = nodes[p];
      switch (node.kind) {
        case SuperKind::kBase: live[p] = 1; break;
        case SuperKind::kState: live[p] = live_children[p] > 0; break;
        case SuperKind::kVirtual: live[p] = live_children[p] == 2; break;
        case SuperKind::kSuper: break;
      }
      if (live[p]) ++live_children[static_cast<std::size_t>(node.parent)];
    }
    live[0] = 1;
    // A live node under a dead ancestor is an orphan.
    for (std::size_t p = 1; p < n; ++p)
      if (!live[static_cast<std::size_t>(nodes[p].parent)]) live[p] = 0;
    std::vector<std::int32_t> remap(n, -1);
    std::vector<SuperNode> kept;
    for (std::size_t p = 0; p < n; ++p) {
      if (!live[p]) continue;
      remap[p] = static_cast<std::int32_t>(kept.size());
      SuperNode node = nodes[p];
      if (node.parent >= 0) node.parent = remap[static_cast<std::size_t>(node.parent)];
      kept.push_back(node);
    }
    nodes = std::move(kept);
    // Drop states no longer referenced.
    std::vector<std::int32_t> state_remap(out_.states.size(), -1);
    std::vector<State> states;
    for (auto& node : nodes) {
      if (node.state < 0) continue;
      auto& slot = state_remap[static_cast<std::size_t>(node.state)];
      if (slot < 0) {
        slot = static_cast<std::int32_t>(states.size());
        states.push_back(out_.states[static_cast<std::size_t>(node.state)]);
      }
      node.state = slot;
    }
    out_.states = std::move(states);
  }

  struct Memo {
    std::int32_t max_false = -1;
    std::int32_t min_true = -1;
  };

  const NormalizedInstance& inst_;
  const SuperTreeOptions& opt_;
  std::int32_t height_;
  std::vector<std::vector<std::uint8_t>> reach_;
  std::unordered_map<std::string, Memo> memo_;
  std::unordered_map<std::string, std::int32_t> interned_;
  SuperTree out_;
};

}  // namespace

SuperTree build_super_tree(const NormalizedInstance& inst, const SuperTreeOptions& options) {
  require(options.node_cap >= 1, ErrorCode::kInvalidArgument, "node cap must be positive");
  const std::int32_t height = options.height >= 0 ? options.height : default_height(inst.vertex_count());
  return Builder(inst, options, height).build();
}

std::string dump_super_tree(const SuperTree& tree, const NormalizedInstance& inst) {
  std::ostringstream os;
  std::vector<std::int32_t> depth(tree.nodes.size(), 0);
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t p = stack.back();
    stack.pop_back();
    const auto& node = tree.nodes[static_cast<std::size_t>(p)];
    os << std::string(2 * static_cast<std::size_t>(depth[static_cast<std::size_t>(p)]), ' ') << '#' << p << ' ';
    switch (node.kind) {
      case SuperKind::kSuper: os << "super"; break;
      case SuperKind::kState: os << "state L" << node.level << ' ' << to_string(tree.state_of(p)); break;
      case SuperKind::kVirtual: os << "virtual"; break;
      case SuperKind::kBase:
        os << (node.edges[1] >= 0 ? "triple" : "edge");
        for (std::int32_t e : node.edges) {
          if (e < 0) continue;
          const Edge& edge = inst.graph.edges[static_cast<std::size_t>(e)];
          os << " (" << edge.from << ',' << edge.to << ')';
        }
        os << " cost " << node.cost;
        break;
    }
    os << '\n';
    const auto kids = tree.children(p);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      depth[static_cast<std::size_t>(*it)] = depth[static_cast<std::size_t>(p)] + 1;
      stack.push_back(*it);
    }
  }
  return os.str();
}

StateTree extract_state_tree(const SuperTree& tree, std::span<const std::int32_t> selected) {
  std::vector<std::uint8_t> in(tree.nodes.size(), 0);
  for (std::int32_t p : selected) {
    require(p >= 0 && p < tree.size(), ErrorCode::kInvariantViolation, "selected node out of range");
    in[static_cast<std::size_t>(p)] = 1;
  }
  auto selected_children = [&](std::int32_t p) {
    std::vector<std::int32_t> out;
    for (std::int32_t c : tree.children(p))
      if (in[static_cast<std::size_t>(c)]) out.push_back(c);
    return out;
  };
  require(in[0] != 0, ErrorCode::kInvariantViolation, "selection misses the super node");
  std::size_t visited = 1;
  const auto top = selected_children(0);
  require(top.size() == 1, ErrorCode::kInvariantViolation, "super node must keep exactly one child");

  StateTree out;
  std::function<std::int32_t(std::int32_t)> convert = [&](std::int32_t p) -> std::int32_t {
    ++visited;
    const auto index = static_cast<std::int32_t>(out.nodes.size());
    out.nodes.push_back(StateTreeNode{tree.state_of(p), -1, -1, {-1, -1}});
    const auto kids = selected_children(p);
    require(kids.size() == 1, ErrorCode::kInvariantViolation,
            "state node #" + std::to_string(p) + " must keep exactly one child");
    const std::int32_t c = kids[0];
    const auto& child = tree.nodes[static_cast<std::size_t>(c)];
    ++visited;
    if (child.kind == SuperKind::kBase) {
      out.nodes[static_cast<std::size_t>(index)].leaf_edges = child.edges;
      return index;
    }
    const auto pair = selected_children(c);
    require(pair.size() == 2 && tree.children(c).size() == 2, ErrorCode::kInvariantViolation,
            "virtual node #" + std::to_string(c) + " must keep both children");
    const std::int32_t left = convert(pair[0]);
    const std::int32_t right = convert(pair[1]);
    out.nodes[static_cast<std::size_t>(index)].left = left;
    out.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  };
  out.root = convert(top[0]);
  require(visited == selected.size(), ErrorCode::kInvariantViolation, "selection contains unreachable nodes");
  return out;
}

}  // namespace dbnd
