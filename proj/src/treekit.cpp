#include "dbnd/treekit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dbnd/error.hpp"

namespace dbnd {

RootedTree::RootedTree(std::vector<std::int32_t> parent, std::vector<std::int32_t> ids)
    : parent_(std::move(parent)), ids_(std::move(ids)) {
  const auto n = parent_.size();
  if (ids_.empty()) {
    ids_.resize(n);
    std::iota(ids_.begin(), ids_.end(), 0);
  }
  require(ids_.size() == n, ErrorCode::kInvalidArgument, "tree id count mismatch");
  children_.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    const std::int32_t p = parent_[v];
    if (p < 0) {
      require(root_ < 0, ErrorCode::kInvalidArgument, "tree has more than one root");
      root_ = static_cast<std::int32_t>(v);
    } else {
      require(static_cast<std::size_t>(p) < n, ErrorCode::kInvalidArgument, "tree parent out of range");
      children_[static_cast<std::size_t>(p)].push_back(static_cast<std::int32_t>(v));
    }
  }
  require(n == 0 || root_ >= 0, ErrorCode::kInvalidArgument, "tree has no root");
  // Reachability from the root rules out cycles.
  std::size_t reached = 0;
  if (root_ >= 0) {
    std::vector<std::int32_t> stack{root_};
    while (!stack.empty()) {
      const std::int32_t v = stack.back();
      stack.pop_back();
      ++reached;
      for (std::int32_t c : children_[static_cast<std::size_t>(v)]) stack.push_back(c);
    }
  }
  require(reached == n, ErrorCode::kInvalidArgument, "tree is not connected to its root");
}

bool RootedTree::is_binary() const {
  return std::all_of(children_.begin(), children_.end(), [](const auto& c) { return c.size() <= 2; });
}

std::vector<std::int32_t> RootedTree::subtree_sizes() const {
  std::vector<std::int32_t> order;
  order.reserve(parent_.size());
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const std::int32_t v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (std::int32_t c : children_[static_cast<std::size_t>(v)]) stack.push_back(c);
  }
  std::vector<std::int32_t> size(parent_.size(), 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::int32_t p = parent_[static_cast<std::size_t>(*it)];
    if (p >= 0) size[static_cast<std::size_t>(p)] += size[static_cast<std::size_t>(*it)];
  }
  return size;
}

std::int32_t RootedTree::find(std::int32_t ext_id) const {
  auto it = std::find(ids_.begin(), ids_.end(), ext_id);
  return it == ids_.end() ? -1 : static_cast<std::int32_t>(it - ids_.begin());
}

bool RootedTree::is_one_level() const {
  if (size() == 2) return true;
  if (size() != 3) return false;
  return children_[static_cast<std::size_t>(root_)].size() == 2;
}

std::int32_t find_balanced_separator(const RootedTree& tree) {
  const std::int32_t n = tree.size();
  require(n >= 3, ErrorCode::kInvalidArgument, "balanced separator needs at least 3 nodes");
  require(tree.is_binary(), ErrorCode::kInvalidArgument, "balanced separator needs a binary tree");
  if (n == 3) {
    const auto& rc = tree.children(tree.root());
    return rc.size() == 2 ? tree.root() : rc.front();
  }
  const auto size = tree.subtree_sizes();
  // n/3 < s <= 2n/3 + 1, in integers.
  auto upper_ok = [n](std::int32_t s) { return 3 * s <= 2 * n + 3; };
  std::int32_t u = tree.root();
  while (!upper_ok(size[static_cast<std::size_t>(u)])) {
    std::int32_t best = -1;
    for (std::int32_t c : tree.children(u)) {
      if (best < 0 || size[static_cast<std::size_t>(c)] > size[static_cast<std::size_t>(best)] ||
          (size[static_cast<std::size_t>(c)] == size[static_cast<std::size_t>(best)] && tree.id(c) < tree.id(best)))
        best = c;
    }
    u = best;
  }
  return u;
}

std::pair<RootedTree, RootedTree> split_at(const RootedTree& tree, std::int32_t v) {
  require(v >= 0 && v < tree.size(), ErrorCode::kInvalidArgument, "split vertex out of range");
  require(v != tree.root(), ErrorCode::kInvalidArgument, "cannot split at the root");
  std::vector<std::uint8_t> below(static_cast<std::size_t>(tree.size()), 0);
  std::vector<std::int32_t> stack{v};
  while (!stack.empty()) {
    const std::int32_t u = stack.back();
    stack.pop_back();
    below[static_cast<std::size_t>(u)] = 1;
    for (std::int32_t c : tree.children(u)) stack.push_back(c);
  }
  auto extract = [&](auto keep) {
    std::vector<std::int32_t> local(static_cast<std::size_t>(tree.size()), -1);
    std::vector<std::int32_t> ids;
    for (std::int32_t u = 0; u < tree.size(); ++u) {
      if (!keep(u)) continue;
      local[static_cast<std::size_t>(u)] = static_cast<std::int32_t>(ids.size());
      ids.push_back(tree.id(u));
    }
    std::vector<std::int32_t> parent(ids.size(), -1);
    for (std::int32_t u = 0; u < tree.size(); ++u) {
      const std::int32_t lu = local[static_cast<std::size_t>(u)];
      const std::int32_t p = tree.parent(u);
      if (lu >= 0 && p >= 0 && local[static_cast<std::size_t>(p)] >= 0)
        parent[static_cast<std::size_t>(lu)] = local[static_cast<std::size_t>(p)];
    }
    return RootedTree(std::move(parent), std::move(ids));
  };
  RootedTree upper = extract([&](std::int32_t u) { return u == v || !below[static_cast<std::size_t>(u)]; });
  RootedTree lower = extract([&](std::int32_t u) { return below[static_cast<std::size_t>(u)] != 0; });
  return {std::move(upper), std::move(lower)};
}

std::int32_t default_height(std::int32_t n) {
  if (n <= 1) return 2;
  return static_cast<std::int32_t>(std::ceil(std::log(static_cast<double>(n)) / std::log(1.5) - 1e-12)) + 2;
}

std::int32_t decomposition_depth(const RootedTree& tree) {
  if (tree.size() <= 2 || tree.is_one_level()) return 0;
  auto [t1, t2] = split_at(tree, find_balanced_separator(tree));
  return 1 + std::max(decomposition_depth(t1), decomposition_depth(t2));
}

}  // namespace dbnd
