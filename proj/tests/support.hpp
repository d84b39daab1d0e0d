#pragma once

// Shared helpers for unit and acceptance tests: instance builders, brute-force
// reference solvers, fractional LP points and Monte Carlo tolerances.

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dbnd/instances.hpp"
#include "dbnd/lp.hpp"
#include "dbnd/rng.hpp"

namespace dbnd::testing {

struct EdgeSpec {
  VertexId from, to;
  Cost cost;
};

DirectedInstance make_dst(std::int32_t n, const std::vector<EdgeSpec>& edges, std::vector<VertexId> terminals,
                          std::vector<std::int32_t> degree, VertexId root = 0);

GroupTreeInstance make_gst(std::vector<VertexId> parent, std::vector<Cost> cost, std::vector<std::int32_t> degree,
                           std::vector<std::vector<VertexId>> groups);

// Exhaustive search over edge subsets (m <= 20).
std::optional<Cost> brute_force_dst(const DirectedInstance& inst);

// Exhaustive search over vertex subsets (n <= 20). Children of a vertex are
// counted against its base degree bound; synthetic leaves are not counted.
std::optional<Cost> brute_force_gst(const GroupTreeInstance& inst);

// Brute-force balanced separator check: n/3 < |desc(v)| <= 2n/3 + 1.
bool separator_bound_holds(std::int32_t n, std::int32_t subtree_size);

// Average of `count` optimal vertices of the model under random objectives in
// [0, 1). Feasible by convexity; fractional whenever the vertices differ.
std::vector<double> fractional_point(const LPModel& model, std::int32_t count, std::uint64_t seed);

// Standard error of a Bernoulli frequency estimate with success probability p.
inline double bernoulli_sigma(double p, std::int64_t trials) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
}

// Random parent array of a binary tree on n nodes rooted at 0.
std::vector<std::int32_t> random_binary_tree(std::int32_t n, Rng& rng);

}  // namespace dbnd::testing
