#include "dbnd/bench.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dbnd/error.hpp"
#include "dbnd/rng.hpp"

namespace dbnd {

DirectedInstance gen_dst(const DstGenParams& p) {
  const auto n = static_cast<std::int64_t>(p.n);
  require(p.n >= 2, ErrorCode::kInvalidArgument, "gen_dst needs n >= 2");
  require(p.m >= p.n - 1 && p.m <= n * (n - 1), ErrorCode::kInvalidArgument, "gen_dst needs n - 1 <= m <= n(n-1)");
  require(p.k >= 1 && p.k <= p.n - 1, ErrorCode::kInvalidArgument, "gen_dst needs 1 <= k <= n - 1");
  require(p.d_max >= 1, ErrorCode::kInvalidArgument, "gen_dst needs d_max >= 1");
  require(p.cost_lo >= 0 && p.cost_lo <= p.cost_hi, ErrorCode::kInvalidArgument, "bad cost range");
  Rng rng(p.seed);

  DirectedInstance inst;
  inst.vertex_count = p.n;
  inst.root = 0;
  std::vector<VertexId> order(static_cast<std::size_t>(p.n - 1));
  std::iota(order.begin(), order.end(), 1);
  rng.shuffle(order.begin(), order.end());
  std::set<std::pair<VertexId, VertexId>> present;
  std::vector<VertexId> placed{0};
  for (VertexId v : order) {
    const VertexId u = placed[rng.below(placed.size())];
    inst.edges.push_back({u, v, rng.range(p.cost_lo, p.cost_hi)});
    present.insert({u, v});
    placed.push_back(v);
  }
  std::vector<std::pair<VertexId, VertexId>> missing;
  for (VertexId u = 0; u < p.n; ++u)
    for (VertexId v = 0; v < p.n; ++v)
      if (u != v && !present.count({u, v})) missing.push_back({u, v});
  rng.shuffle(missing.begin(), missing.end());
  for (std::int32_t i = 0; i < p.m - (p.n - 1); ++i) {
    auto [u, v] = missing[static_cast<std::size_t>(i)];
    inst.edges.push_back({u, v, rng.range(p.cost_lo, p.cost_hi)});
  }
  std::sort(inst.edges.begin(), inst.edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair{a.from, a.to} < std::pair{b.from, b.to}; });
  std::vector<VertexId> candidates(order);
  rng.shuffle(candidates.begin(), candidates.end());
  inst.terminals.assign(candidates.begin(), candidates.begin() + p.k);
  std::sort(inst.terminals.begin(), inst.terminals.end());
  for (std::int32_t v = 0; v < p.n; ++v) inst.degree_bound.push_back(static_cast<std::int32_t>(rng.range(1, p.d_max)));
  inst.validate();
  return inst;
}

namespace {

void assign_groups(GroupTreeInstance& inst, std::vector<VertexId> leaves, std::int32_t k, Rng& rng,
                   std::int32_t max_group_size) {
  require(static_cast<std::int32_t>(leaves.size()) >= k, ErrorCode::kInvalidArgument,
          "not enough leaves for the requested number of groups");
  rng.shuffle(leaves.begin(), leaves.end());
  inst.groups.assign(static_cast<std::size_t>(k), {});
  for (std::int32_t t = 0; t < k; ++t) inst.groups[static_cast<std::size_t>(t)].push_back(leaves[static_cast<std::size_t>(t)]);
  for (std::size_t i = static_cast<std::size_t>(k); i < leaves.size(); ++i) {
    if (rng.below(2) == 0) continue;
    auto& g = inst.groups[rng.below(static_cast<std::uint64_t>(k))];
    if (max_group_size > 0 && static_cast<std::int32_t>(g.size()) >= max_group_size) continue;
    g.push_back(leaves[i]);
  }
  for (auto& g : inst.groups) std::sort(g.begin(), g.end());
}

}  // namespace

GroupTreeInstance gen_gst(const GstGenParams& p) {
  require(p.depth >= 1 && p.n >= p.depth + 1, ErrorCode::kInvalidArgument, "gen_gst needs n >= depth + 1 >= 2");
  require(p.k >= 1, ErrorCode::kInvalidArgument, "gen_gst needs k >= 1");
  require(p.d_max >= 1, ErrorCode::kInvalidArgument, "gen_gst needs d_max >= 1");
  require(p.cost_lo >= 0 && p.cost_lo <= p.cost_hi, ErrorCode::kInvalidArgument, "bad cost range");
  Rng rng(p.seed);
  GroupTreeInstance inst;
  inst.vertex_count = p.n;
  inst.parent.assign(static_cast<std::size_t>(p.n), -1);
  std::vector<std::int32_t> depth(static_cast<std::size_t>(p.n), 0);
  std::vector<VertexId> open{0};  // vertices that may take children
  for (VertexId v = 1; v <= p.depth; ++v) {
    inst.parent[static_cast<std::size_t>(v)] = v - 1;
    depth[static_cast<std::size_t>(v)] = v;
    if (v < p.depth) open.push_back(v);
  }
  for (VertexId v = p.depth + 1; v < p.n; ++v) {
    const VertexId u = open[rng.below(open.size())];
    inst.parent[static_cast<std::size_t>(v)] = u;
    depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
    if (depth[static_cast<std::size_t>(v)] < p.depth) open.push_back(v);
  }
  inst.cost.assign(static_cast<std::size_t>(p.n), 0);
  for (VertexId v = 1; v < p.n; ++v) inst.cost[static_cast<std::size_t>(v)] = rng.range(p.cost_lo, p.cost_hi);
  for (VertexId v = 0; v < p.n; ++v) inst.degree_bound.push_back(static_cast<std::int32_t>(rng.range(1, p.d_max)));
  inst.synthetic_leaf.assign(static_cast<std::size_t>(p.n), 0);
  std::vector<std::int32_t> kids(static_cast<std::size_t>(p.n), 0);
  for (VertexId v = 1; v < p.n; ++v) ++kids[static_cast<std::size_t>(inst.parent[static_cast<std::size_t>(v)])];
  std::vector<VertexId> leaves;
  for (VertexId v = 1; v < p.n; ++v)
    if (kids[static_cast<std::size_t>(v)] == 0) leaves.push_back(v);
  assign_groups(inst, leaves, p.k, rng, 0);
  // Raise bounds so that the root paths of one random member per group form
  // a feasible solution.
  std::vector<std::uint8_t> in_witness(static_cast<std::size_t>(p.n), 0);
  std::vector<std::int32_t> witness_kids(static_cast<std::size_t>(p.n), 0);
  in_witness[0] = 1;
  for (const auto& g : inst.groups) {
    for (VertexId v = g[rng.below(g.size())]; !in_witness[static_cast<std::size_t>(v)];
         v = inst.parent[static_cast<std::size_t>(v)]) {
      in_witness[static_cast<std::size_t>(v)] = 1;
      ++witness_kids[static_cast<std::size_t>(inst.parent[static_cast<std::size_t>(v)])];
    }
  }
  for (std::size_t v = 0; v < static_cast<std::size_t>(p.n); ++v)
    inst.degree_bound[v] = std::max(inst.degree_bound[v], witness_kids[v]);
  inst.validate(true);
  return inst;
}

GroupTreeInstance gen_broom(const BroomParams& p) {
  require(p.handle >= 0 && p.bristles >= p.k && p.k >= 1 && p.group_size >= 1, ErrorCode::kInvalidArgument,
          "bad broom parameters");
  Rng rng(p.seed);
  GroupTreeInstance inst;
  const std::int32_t hub = p.handle + 1;
  inst.vertex_count = hub + 1 + p.bristles;
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  inst.parent.assign(n, -1);
  for (VertexId v = 1; v <= hub; ++v) inst.parent[static_cast<std::size_t>(v)] = v - 1;
  for (VertexId v = hub + 1; v < inst.vertex_count; ++v) inst.parent[static_cast<std::size_t>(v)] = hub;
  inst.cost.assign(n, 0);
  for (std::size_t v = 1; v < n; ++v) inst.cost[v] = rng.range(p.cost_lo, p.cost_hi);
  inst.degree_bound.assign(n, 1);
  inst.degree_bound[static_cast<std::size_t>(hub)] = p.hub_degree > 0 ? p.hub_degree : p.k;
  inst.synthetic_leaf.assign(n, 0);
  std::vector<VertexId> leaves(static_cast<std::size_t>(p.bristles));
  std::iota(leaves.begin(), leaves.end(), hub + 1);
  // Partial Fisher-Yates: only the first k * group_size picks matter.
  const auto want = std::min<std::size_t>(leaves.size(), static_cast<std::size_t>(p.k) * static_cast<std::size_t>(p.group_size));
  for (std::size_t i = 0; i < want; ++i) std::swap(leaves[i], leaves[i + rng.below(leaves.size() - i)]);
  inst.groups.assign(static_cast<std::size_t>(p.k), {});
  for (std::size_t i = 0; i < want; ++i) inst.groups[i % static_cast<std::size_t>(p.k)].push_back(leaves[i]);
  for (auto& g : inst.groups) std::sort(g.begin(), g.end());
  inst.validate(true);
  return inst;
}

VerifyResult verify_dst_tree(const DirectedInstance& inst, std::span<const std::pair<VertexId, VertexId>> edges) {
  VerifyResult res;
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  std::map<std::pair<VertexId, VertexId>, Cost> cost_of;
  for (const Edge& e : inst.edges) cost_of[{e.from, e.to}] = e.cost;
  std::vector<std::int32_t> indeg(n, 0), outdeg(n, 0);
  std::vector<std::vector<VertexId>> kids(n);
  std::set<std::pair<VertexId, VertexId>> seen;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
      res.problems.push_back("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
      continue;
    }
    auto it = cost_of.find({u, v});
    if (it == cost_of.end()) {
      res.problems.push_back("(" + std::to_string(u) + "," + std::to_string(v) + ") is not a graph edge");
      continue;
    }
    if (!seen.insert({u, v}).second) {
      res.problems.push_back("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
      continue;
    }
    res.cost += it->second;
    ++indeg[static_cast<std::size_t>(v)];
    ++outdeg[static_cast<std::size_t>(u)];
    kids[static_cast<std::size_t>(u)].push_back(v);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] > 1) res.problems.push_back("vertex " + std::to_string(v) + " has in-degree " + std::to_string(indeg[v]));
  if (indeg[static_cast<std::size_t>(inst.root)] != 0) res.problems.push_back("root has an incoming edge");
  std::vector<std::uint8_t> reached(n, 0);
  std::vector<VertexId> stack{inst.root};
  reached[static_cast<std::size_t>(inst.root)] = 1;
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    for (VertexId v : kids[static_cast<std::size_t>(u)])
      if (!reached[static_cast<std::size_t>(v)]) {
        reached[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!reached[v] && (indeg[v] > 0 || outdeg[v] > 0))
      res.problems.push_back("vertex " + std::to_string(v) + " is not connected to the root");
  for (VertexId t : inst.terminals)
    if (reached[static_cast<std::size_t>(t)]) res.covered.push_back(t);
  for (std::size_t v = 0; v < n; ++v)
    if (outdeg[v] > inst.degree_bound[v])
      res.degree_ratio[static_cast<VertexId>(v)] = static_cast<double>(outdeg[v]) / inst.degree_bound[v];
  return res;
}

VerifyResult verify_gst_tree(const GroupTreeInstance& inst, std::span<const VertexId> vertices) {
  VerifyResult res;
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  std::vector<std::uint8_t> in(n, 0);
  for (VertexId v : vertices) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) {
      res.problems.push_back("vertex " + std::to_string(v) + " out of range");
      continue;
    }
    if (in[static_cast<std::size_t>(v)]) {
      res.problems.push_back("duplicate vertex " + std::to_string(v));
      continue;
    }
    in[static_cast<std::size_t>(v)] = 1;
    res.cost += inst.cost[static_cast<std::size_t>(v)];
  }
  const VertexId r = inst.root();
  if (!vertices.empty() && !in[static_cast<std::size_t>(r)]) res.problems.push_back("root is not selected");
  std::vector<std::int32_t> children(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!in[v] || static_cast<VertexId>(v) == r) continue;
    const VertexId p = inst.parent[v];
    if (!in[static_cast<std::size_t>(p)]) {
      res.problems.push_back("vertex " + std::to_string(v) + " is selected without its parent");
      continue;
    }
    const bool synthetic = !inst.synthetic_leaf.empty() && inst.synthetic_leaf[v];
    if (!synthetic) ++children[static_cast<std::size_t>(p)];
  }
  const auto base = inst.base_degree_bounds();
  for (std::size_t t = 0; t < inst.groups.size(); ++t)
    if (std::any_of(inst.groups[t].begin(), inst.groups[t].end(), [&](VertexId v) { return in[static_cast<std::size_t>(v)] != 0; }))
      res.covered.push_back(static_cast<std::int32_t>(t));
  for (std::size_t v = 0; v < n; ++v)
    if (children[v] > base[v]) res.degree_ratio[static_cast<VertexId>(v)] = static_cast<double>(children[v]) / base[v];
  return res;
}

}  // namespace dbnd
