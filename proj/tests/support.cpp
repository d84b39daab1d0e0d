#include "support.hpp"

#include <algorithm>
#include <cstddef>

#include "dbnd/error.hpp"

namespace dbnd::testing {

DirectedInstance make_dst(std::int32_t n, const std::vector<EdgeSpec>& edges, std::vector<VertexId> terminals,
                          std::vector<std::int32_t> degree, VertexId root) {
  DirectedInstance inst;
  inst.vertex_count = n;
  inst.root = root;
  for (const auto& e : edges) inst.edges.push_back({e.from, e.to, e.cost});
  std::sort(terminals.begin(), terminals.end());
  inst.terminals = std::move(terminals);
  inst.degree_bound = std::move(degree);
  inst.validate();
  return inst;
}

GroupTreeInstance make_gst(std::vector<VertexId> parent, std::vector<Cost> cost, std::vector<std::int32_t> degree,
                           std::vector<std::vector<VertexId>> groups) {
  GroupTreeInstance inst;
  inst.vertex_count = static_cast<std::int32_t>(parent.size());
  inst.parent = std::move(parent);
  inst.cost = std::move(cost);
  inst.degree_bound = std::move(degree);
  inst.groups = std::move(groups);
  inst.synthetic_leaf.assign(static_cast<std::size_t>(inst.vertex_count), 0);
  inst.validate(false);
  return inst;
}

std::optional<Cost> brute_force_dst(const DirectedInstance& inst) {
  const auto m = inst.edges.size();
  require(m <= 20, ErrorCode::kInvalidArgument, "brute force limited to 20 edges");
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  std::optional<Cost> best;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<std::int32_t> indeg(n, 0), outdeg(n, 0);
    std::vector<std::vector<VertexId>> adj(n);
    Cost cost = 0;
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      const Edge& e = inst.edges[i];
      cost += e.cost;
      ++outdeg[static_cast<std::size_t>(e.from)];
      if (++indeg[static_cast<std::size_t>(e.to)] > 1) ok = false;
      adj[static_cast<std::size_t>(e.from)].push_back(e.to);
    }
    if (!ok || indeg[static_cast<std::size_t>(inst.root)] != 0) continue;
    if (best && cost >= *best) continue;
    for (std::size_t v = 0; v < n; ++v)
      if (outdeg[v] > inst.degree_bound[v]) ok = false;
    if (!ok) continue;
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<VertexId> stack{inst.root};
    seen[static_cast<std::size_t>(inst.root)] = 1;
    std::size_t reached_edges = 0;
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (VertexId v : adj[static_cast<std::size_t>(u)]) {
        ++reached_edges;
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    if (reached_edges != static_cast<std::size_t>(__builtin_popcount(mask))) continue;
    for (VertexId t : inst.terminals)
      if (!seen[static_cast<std::size_t>(t)]) ok = false;
    if (ok) best = cost;
  }
  return best;
}

std::optional<Cost> brute_force_gst(const GroupTreeInstance& inst) {
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  require(n <= 20, ErrorCode::kInvalidArgument, "brute force limited to 20 vertices");
  const VertexId root = inst.root();
  const auto bounds = inst.base_degree_bounds();
  std::optional<Cost> best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> root & 1u)) continue;
    bool ok = true;
    Cost cost = 0;
    std::vector<std::int32_t> kids(n, 0);
    for (std::size_t v = 0; v < n && ok; ++v) {
      if (!(mask >> v & 1u)) continue;
      cost += inst.cost[v];
      const VertexId p = inst.parent[v];
      if (p < 0) continue;
      if (!(mask >> p & 1u)) ok = false;
      if (inst.synthetic_leaf.empty() || !inst.synthetic_leaf[v]) ++kids[static_cast<std::size_t>(p)];
    }
    for (std::size_t v = 0; v < n && ok; ++v)
      if (kids[v] > bounds[v]) ok = false;
    for (const auto& g : inst.groups) {
      if (!ok) break;
      ok = std::any_of(g.begin(), g.end(), [&](VertexId v) { return (mask >> v & 1u) != 0; });
    }
    if (ok && (!best || cost < *best)) best = cost;
  }
  return best;
}

bool separator_bound_holds(std::int32_t n, std::int32_t s) { return 3 * s > n && 3 * s <= 2 * n + 3; }

std::vector<double> fractional_point(const LPModel& model, std::int32_t count, std::uint64_t seed) {
  LPModel m = model;
  std::vector<double> avg(static_cast<std::size_t>(model.variable_count()), 0.0);
  for (std::int32_t i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    for (auto& c : m.objective) c = rng.uniform();
    const LPSolution s = solve_lp(m);
    require(s.status == LPStatus::kOptimal, ErrorCode::kInfeasible, "random objective LP not optimal");
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += s.x[j] / count;
  }
  return avg;
}

std::vector<std::int32_t> random_binary_tree(std::int32_t n, Rng& rng) {
  std::vector<std::int32_t> parent(static_cast<std::size_t>(n), -1);
  std::vector<std::int32_t> kids(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> open{0};
  for (std::int32_t v = 1; v < n; ++v) {
    const auto i = static_cast<std::size_t>(rng.below(open.size()));
    const std::int32_t p = open[i];
    parent[static_cast<std::size_t>(v)] = p;
    if (++kids[static_cast<std::size_t>(p)] == 2) {
      open[i] = open.back();
      open.pop_back();
    }
    open.push_back(v);
  }
  return parent;
}

}  // namespace dbnd::testing
