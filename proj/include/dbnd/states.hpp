#pragma once

// States, good state trees, and the super-tree that contains every candidate
// good extended state tree as a rooted subtree.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbnd/instances.hpp"

namespace dbnd {

// (root, portals, degree vector). portals is sorted and contains root;
// degree[i] is the original degree promised for portals[i].
struct State {
  VertexId root = 0;
  std::vector<VertexId> portals;
  std::vector<std::int32_t> degree;

  // Degree of portal v, or -1 when v is not a portal.
  std::int32_t degree_of(VertexId v) const;
  bool has_portal(VertexId v) const { return degree_of(v) >= 0; }
  friend bool operator==(const State&, const State&) = default;
};

std::string to_string(const State& s);

// Root-portals-pair relation between a node and its (left, right) children.
bool is_allowable_child_pair(VertexId parent_root, std::span<const VertexId> parent_portals,
                             VertexId left_root, std::span<const VertexId> left_portals,
                             VertexId right_root, std::span<const VertexId> right_portals);

// Consistency of child degree vectors with the parent's; the split vertex is
// right.root. Assumes the portal sets form an allowable child-pair.
bool degree_vectors_consistent(const State& parent, const State& left, const State& right);

// Agreement of a base edge / triple with a state's degree vector. Throws
// Error(kInvalidArgument) when the portal precondition does not hold.
bool edge_agrees(const NormalizedInstance& inst, const State& s, std::int32_t edge);
bool triple_agrees(const NormalizedInstance& inst, const State& s, std::int32_t edge_a, std::int32_t edge_b);

struct StateTreeNode {
  State state;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaf payload: one edge, or two edges out of state.root (a triple).
  std::array<std::int32_t, 2> leaf_edges{-1, -1};

  bool is_leaf() const { return left < 0 && right < 0; }
};

struct StateTree {
  std::vector<StateTreeNode> nodes;
  std::int32_t root = -1;

  Cost cost(const NormalizedInstance& inst) const;
  // Depth in edges of the deepest leaf.
  std::int32_t depth() const;
  // Terminals that occur as an edge head in some leaf payload, sorted.
  std::vector<VertexId> involved_terminals(const NormalizedInstance& inst) const;
};

// Builds the state tree of a (label-distinct) good tree by recursive balanced
// partitioning. Throws Error(kCapExceeded) when the result is deeper than
// height (pass a negative height to skip the check).
StateTree gen_state_tree(const MultiTree& tree, const NormalizedInstance& inst, std::int32_t height);

struct StateTreeViolation {
  std::int32_t node = -1;
  std::string what;
};

// Empty result means the tree is a good state tree of depth <= height
// (negative height: depth unchecked).
std::vector<StateTreeViolation> validate_state_tree(const StateTree& tree, const NormalizedInstance& inst,
                                                    std::int32_t height);

// Joins the leaf payloads of a good state tree into a multi-tree by
// identifying each right child's root with its copy in the left sibling.
MultiTree stitch_multi_tree(const StateTree& tree, const NormalizedInstance& inst);

enum class SuperKind : std::uint8_t { kSuper, kState, kVirtual, kBase };

struct SuperNode {
  SuperKind kind = SuperKind::kSuper;
  std::int32_t parent = -1;
  std::int32_t state = -1;  // index into SuperTree::states (state nodes)
  std::int32_t level = 0;   // state level (state nodes)
  std::array<std::int32_t, 2> edges{-1, -1};  // base nodes
  Cost cost = 0;                               // base nodes
};

struct SuperTreeOptions {
  std::int32_t height = -1;  // negative: default_height(vertex count of the normalized instance)
  std::int64_t node_cap = 5'000'000;
  // Build only branches that can still reach a base node. When false the
  // full tree is built and the dead branches are removed afterwards.
  bool prune_during_build = true;
};

class SuperTree {
 public:
  std::vector<SuperNode> nodes;  // node 0 is the super node; every parent precedes its children
  std::vector<State> states;     // interned
  std::int32_t height = 0;

  std::span<const std::int32_t> children(std::int32_t p) const {
    const auto b = static_cast<std::size_t>(child_offset_[static_cast<std::size_t>(p)]);
    const auto e = static_cast<std::size_t>(child_offset_[static_cast<std::size_t>(p) + 1]);
    return {child_list_.data() + b, e - b};
  }
  std::int32_t size() const { return static_cast<std::int32_t>(nodes.size()); }
  std::int32_t count(SuperKind kind) const;
  const State& state_of(std::int32_t p) const { return states[static_cast<std::size_t>(nodes[static_cast<std::size_t>(p)].state)]; }
  // Base nodes whose payload has v as an edge head.
  std::vector<std::int32_t> base_nodes_involving(VertexId v, const NormalizedInstance& inst) const;
  // Longest downward path from the super node, in edges.
  std::int32_t root_level() const;

  // Rebuilds the child index from the parent links (children keep node order).
  void index_children();

 private:
  std::vector<std::int32_t> child_offset_;
  std::vector<std::int32_t> child_list_;
};

SuperTree build_super_tree(const NormalizedInstance& inst, const SuperTreeOptions& options);

// Indented listing: one line per node with kind, state or payload, and cost.
std::string dump_super_tree(const SuperTree& tree, const NormalizedInstance& inst);

// Converts a selected rooted subtree (super node has one child, each state
// node one child, each virtual node both children) into its state tree.
// Throws Error(kInvariantViolation) when the selection has another shape.
StateTree extract_state_tree(const SuperTree& tree, std::span<const std::int32_t> selected);

}  // namespace dbnd
