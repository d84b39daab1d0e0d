#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dbnd {

// Rooted tree over local node indices 0..size-1. Each node carries an
// external id so pieces produced by split_at can be traced back.
class RootedTree {
 public:
  RootedTree() = default;
  // parent[i] == -1 marks the root. ids defaults to the identity.
  explicit RootedTree(std::vector<std::int32_t> parent, std::vector<std::int32_t> ids = {});

  std::int32_t size() const { return static_cast<std::int32_t>(parent_.size()); }
  std::int32_t root() const { return root_; }
  std::int32_t parent(std::int32_t v) const { return parent_[static_cast<std::size_t>(v)]; }
  const std::vector<std::int32_t>& children(std::int32_t v) const { return children_[static_cast<std::size_t>(v)]; }
  std::int32_t id(std::int32_t v) const { return ids_[static_cast<std::size_t>(v)]; }
  const std::vector<std::int32_t>& ids() const { return ids_; }
  std::int32_t edge_count() const { return size() - 1; }
  bool is_binary() const;
  // |descendants(v)| including v, for every node.
  std::vector<std::int32_t> subtree_sizes() const;
  // Local index of the node with the given external id, or -1.
  std::int32_t find(std::int32_t ext_id) const;
  // One level of edges: a single edge, or the root with exactly two leaf children.
  bool is_one_level() const;

 private:
  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> ids_;
  std::vector<std::vector<std::int32_t>> children_;
  std::int32_t root_ = -1;
};

// A node v of a binary tree on n >= 3 nodes with n/3 < |desc(v)| <= 2n/3 + 1.
// For n = 3 this is the middle vertex of a path, or the root of a cherry.
std::int32_t find_balanced_separator(const RootedTree& tree);

// T2 is the subtree at v; T1 is the rest with v kept as a leaf. External ids
// are carried over.
std::pair<RootedTree, RootedTree> split_at(const RootedTree& tree, std::int32_t v);

// ceil(log(n) / log(3/2)) + 2.
std::int32_t default_height(std::int32_t n);

// Number of recursive splitting levels needed before every piece has one
// level of edges.
std::int32_t decomposition_depth(const RootedTree& tree);

}  // namespace dbnd
