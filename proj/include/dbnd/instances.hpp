#pragma once

// Problem instances for degree-bounded directed Steiner tree (DB-DST) and
// degree-bounded group Steiner tree on trees (DB-GST-T), plus the
// preprocessing both pipelines rely on.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dbnd {

using VertexId = std::int32_t;
using Cost = std::int64_t;

struct Edge {
  VertexId from = 0;
  VertexId to = 0;
  Cost cost = 0;
};

struct DirectedInstance {
  std::int32_t vertex_count = 0;
  std::vector<Edge> edges;
  VertexId root = 0;
  std::vector<VertexId> terminals;        // sorted, unique
  std::vector<std::int32_t> degree_bound;  // one per vertex

  // Throws Error(kInvalidArgument) naming the first violated invariant.
  void validate() const;
  std::int32_t max_degree_bound() const;
  std::int32_t terminal_count() const { return static_cast<std::int32_t>(terminals.size()); }
};

DirectedInstance parse_dst(std::string_view text);
std::string serialize_dst(const DirectedInstance& inst);

// How a vertex's original degree contribution is computed: vertices of the
// input graph (and terminal copies) count as one child of their parent,
// binarization gadget vertices pass their own original degree through.
enum class PhiKind : std::uint8_t { kConstOne, kIdentity };

enum class OriginKind : std::uint8_t { kOriginal, kTerminalCopy, kGadget };

struct VertexOrigin {
  OriginKind kind = OriginKind::kOriginal;
  VertexId vertex = 0;  // the input vertex (for gadgets: the vertex whose star was replaced)
};

// Terminals are sinks with exactly one in-edge; non-terminals have out-degree <= 2.
class NormalizedInstance {
 public:
  DirectedInstance graph;
  std::vector<VertexOrigin> origin;
  std::vector<PhiKind> phi;
  // Per normalized edge: index of the input edge whose cost it carries, or -1.
  std::vector<std::int32_t> source_edge;
  std::int32_t source_vertex_count = 0;

  // Must be called after the public fields are filled in.
  void index();

  std::int32_t vertex_count() const { return graph.vertex_count; }
  bool is_terminal(VertexId v) const { return terminal_flag_[static_cast<std::size_t>(v)] != 0; }
  // Out-edge indices of v, ordered by head id.
  const std::vector<std::int32_t>& out_edges(VertexId v) const {
    return out_edges_[static_cast<std::size_t>(v)];
  }
  // Edge index of (u, v) or -1.
  std::int32_t edge_index(VertexId u, VertexId v) const;
  std::int32_t apply_phi(VertexId v, std::int32_t rho) const {
    return phi[static_cast<std::size_t>(v)] == PhiKind::kConstOne ? 1 : rho;
  }
  std::int32_t degree_bound(VertexId v) const { return graph.degree_bound[static_cast<std::size_t>(v)]; }

 private:
  std::vector<std::uint8_t> terminal_flag_;
  std::vector<std::vector<std::int32_t>> out_edges_;
  std::unordered_map<std::int64_t, std::int32_t> edge_lookup_;
};

NormalizedInstance normalize(const DirectedInstance& inst);

// A tree whose nodes are labeled copies of graph vertices.
struct MultiTree {
  std::vector<VertexId> label;
  std::vector<std::int32_t> parent;  // -1 at the root
  std::int32_t root = -1;

  std::int32_t size() const { return static_cast<std::int32_t>(label.size()); }
  std::vector<std::vector<std::int32_t>> children() const;
};

// rho_a = 0 at leaves, otherwise the sum of phi_b(rho_b) over children b.
std::vector<std::int32_t> original_degree(const MultiTree& tree, const NormalizedInstance& inst);

// The normalized image of an out-arborescence of the input graph (edges in
// input ids): gadget paths replace edges out of binarized vertices and every
// terminal that was split gains its copy as a child.
MultiTree lift_tree(const NormalizedInstance& inst, const std::vector<std::pair<VertexId, VertexId>>& edges);

// Sum of edge costs. Throws if some tree edge is not a graph edge.
Cost multi_tree_cost(const MultiTree& tree, const NormalizedInstance& inst);

// Good multi-tree check: rooted at a copy of the root, every edge is a graph
// edge, leaves are terminal copies, 1 <= rho_a <= d_a at internal nodes.
// Returns an empty string when good, otherwise a description of the first defect.
std::string check_good_multi_tree(const MultiTree& tree, const NormalizedInstance& inst);

struct GroupTreeInstance {
  std::int32_t vertex_count = 0;
  std::vector<VertexId> parent;  // -1 at the root
  std::vector<Cost> cost;
  std::vector<std::vector<VertexId>> groups;
  std::vector<std::int32_t> degree_bound;
  std::vector<std::uint8_t> synthetic_leaf;

  VertexId root() const;
  std::int32_t group_count() const { return static_cast<std::int32_t>(groups.size()); }
  std::vector<std::vector<VertexId>> children() const;
  // Degree bounds excluding the slots added for synthetic leaves.
  std::vector<std::int32_t> base_degree_bounds() const;
  // Throws Error(kInvalidArgument). With strict set, also requires leaf-only,
  // pairwise disjoint groups.
  void validate(bool strict) const;
};

GroupTreeInstance parse_gst(std::string_view text);
std::string serialize_gst(const GroupTreeInstance& inst);

// Moves optional per-vertex edge costs (cost of the edge into v) onto v and
// replaces every group membership of an internal or multiply-grouped vertex by
// a fresh zero-cost synthetic leaf child.
GroupTreeInstance preprocess_gst(const GroupTreeInstance& inst,
                                 const std::vector<Cost>& edge_cost_into = {});

}  // namespace dbnd
