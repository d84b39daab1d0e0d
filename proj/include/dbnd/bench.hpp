#pragma once

// Random instance generators and independent solution verification.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dbnd/instances.hpp"

namespace dbnd {

struct DstGenParams {
  std::int32_t n = 2;
  std::int32_t m = 1;
  std::int32_t k = 1;
  std::int32_t d_max = 2;
  Cost cost_lo = 1;
  Cost cost_hi = 10;
  std::uint64_t seed = 0;
};

// Vertex 0 is the root. A random arborescence spanning all vertices is
// embedded first, so every terminal is reachable; the remaining m - (n - 1)
// edges are uniform over the missing pairs.
DirectedInstance gen_dst(const DstGenParams& p);

struct GstGenParams {
  std::int32_t n = 3;
  std::int32_t k = 1;
  std::int32_t depth = 2;
  std::int32_t d_max = 2;
  Cost cost_lo = 1;
  Cost cost_hi = 10;
  std::uint64_t seed = 0;
};

// Vertex 0 is the root. A spine of length depth is laid down first and the
// other vertices attach below random vertices of depth < depth. Groups are
// disjoint, non-empty leaf sets; about half of the leaves belong to no group.
// Degree bounds are drawn from [1, d_max] and then raised where needed so that
// the instance is feasible.
GroupTreeInstance gen_gst(const GstGenParams& p);

struct BroomParams {
  std::int32_t handle = 4;        // path length from the root to the hub
  std::int32_t bristles = 1 << 15;  // leaves hanging off the hub
  std::int32_t k = 4;
  std::int32_t group_size = 8;
  std::int32_t hub_degree = 0;  // 0: k
  Cost cost_lo = 1;
  Cost cost_hi = 10;
  std::uint64_t seed = 0;
};

// Root, a path of `handle` vertices, a hub and `bristles` leaves under it.
// Groups take random disjoint leaves; the remaining leaves are ungrouped.
GroupTreeInstance gen_broom(const BroomParams& p);

struct VerifyResult {
  std::vector<std::string> problems;  // empty: passed
  Cost cost = 0;
  std::vector<std::int32_t> covered;  // terminals or group indices
  std::map<VertexId, double> degree_ratio;  // vertices whose bound is exceeded

  bool ok() const { return problems.empty(); }
};

// Checks that the edges form an out-arborescence rooted at r made of graph
// edges, and recomputes cost, coverage and degree excess.
VerifyResult verify_dst_tree(const DirectedInstance& inst, std::span<const std::pair<VertexId, VertexId>> edges);

// Checks that the vertex set is a connected subtree containing the root, and
// recomputes cost, group coverage and child-count excess. Synthetic leaves do
// not count towards a parent's children.
VerifyResult verify_gst_tree(const GroupTreeInstance& inst, std::span<const VertexId> vertices);

}  // namespace dbnd
