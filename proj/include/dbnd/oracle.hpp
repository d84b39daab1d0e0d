#pragma once

// Exact solvers for small instances.

#include <cstdint>
#include <utility>
#include <vector>

#include "dbnd/instances.hpp"

namespace dbnd {

enum class ExactStatus : std::uint8_t { kOptimal, kInfeasible };

struct ExactDstResult {
  ExactStatus status = ExactStatus::kInfeasible;
  Cost cost = 0;
  std::vector<std::pair<VertexId, VertexId>> edges;  // sorted
};

struct ExactDstLimits {
  std::int32_t max_vertices = 12;
  std::int32_t max_edges = 24;
};

// Minimum-cost out-arborescence from the root covering every terminal with
// out-degree(v) <= d_v. Throws Error(kInvalidArgument) beyond the limits.
ExactDstResult exact_dst(const DirectedInstance& inst, const ExactDstLimits& limits = {});

struct ExactGstResult {
  ExactStatus status = ExactStatus::kInfeasible;
  Cost cost = 0;
  std::vector<VertexId> vertices;  // sorted
};

inline constexpr std::int32_t kExactGstMaxGroups = 12;

// Minimum-cost subtree containing the root that contains a member of every
// group, with at most d_u selected children under each selected u. Throws
// Error(kInvalidArgument) for more than kExactGstMaxGroups groups.
ExactGstResult exact_gst(const GroupTreeInstance& inst);

}  // namespace dbnd
