#include "dbnd/oracle.hpp"

#include <algorithm>
#include <limits>

#include "dbnd/error.hpp"

namespace dbnd {

namespace {

constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;

class DstSearch {
 public:
  explicit DstSearch(const DirectedInstance& inst) : inst_(inst) {
    const auto n = static_cast<std::size_t>(inst.vertex_count);
    in_tree_.assign(n, 0);
    outdeg_.assign(n, 0);
    excluded_.assign(inst.edges.size(), 0);
    is_terminal_.assign(n, 0);
    for (VertexId t : inst.terminals) is_terminal_[static_cast<std::size_t>(t)] = 1;
    in_edges_.assign(n, {});
    out_edges_.assign(n, {});
    for (std::size_t i = 0; i < inst.edges.size(); ++i) {
      in_edges_[static_cast<std::size_t>(inst.edges[i].to)].push_back(static_cast<std::int32_t>(i));
      out_edges_[static_cast<std::size_t>(inst.edges[i].from)].push_back(static_cast<std::int32_t>(i));
    }
  }

  ExactDstResult run() {
    in_tree_[static_cast<std::size_t>(inst_.root)] = 1;
    uncovered_ = inst_.terminal_count();
    search(0);
    ExactDstResult res;
    if (best_cost_ >= kInf) return res;
    res.status = ExactStatus::kOptimal;
    res.cost = best_cost_;
    // Zero-cost dead branches can survive the search; strip non-terminal leaves.
    std::vector<std::int32_t> kept = best_;
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<std::int32_t> outdeg(static_cast<std::size_t>(inst_.vertex_count), 0);
      for (std::int32_t e : kept) ++outdeg[static_cast<std::size_t>(inst_.edges[static_cast<std::size_t>(e)].from)];
      std::vector<std::int32_t> next;
      for (std::int32_t e : kept) {
        const VertexId v = inst_.edges[static_cast<std::size_t>(e)].to;
        if (outdeg[static_cast<std::size_t>(v)] == 0 && !is_terminal_[static_cast<std::size_t>(v)]) {
          res.cost -= inst_.edges[static_cast<std::size_t>(e)].cost;
          changed = true;
        } else {
          next.push_back(e);
        }
      }
      kept = std::move(next);
    }
    for (std::int32_t e : kept) res.edges.push_back({inst_.edges[static_cast<std::size_t>(e)].from, inst_.edges[static_cast<std::size_t>(e)].to});
    std::sort(res.edges.begin(), res.edges.end());
    return res;
  }

 private:
  // Each uncovered terminal still needs its own in-edge from outside the tree.
  Cost lower_bound() const {
    Cost lb = 0;
    for (VertexId t : inst_.terminals) {
      if (in_tree_[static_cast<std::size_t>(t)]) continue;
      Cost best = kInf;
      for (std::int32_t e : in_edges_[static_cast<std::size_t>(t)])
        if (!excluded_[static_cast<std::size_t>(e)]) best = std::min(best, inst_.edges[static_cast<std::size_t>(e)].cost);
      if (best >= kInf) return kInf;
      lb += best;
    }
    return lb;
  }

  // First edge leaving the tree that is neither excluded nor blocked.
  std::int32_t next_candidate() const {
    for (std::size_t i = 0; i < inst_.edges.size(); ++i) {
      const Edge& e = inst_.edges[i];
      if (excluded_[i] || !in_tree_[static_cast<std::size_t>(e.from)] || in_tree_[static_cast<std::size_t>(e.to)]) continue;
      if (outdeg_[static_cast<std::size_t>(e.from)] >= inst_.degree_bound[static_cast<std::size_t>(e.from)]) continue;
      return static_cast<std::int32_t>(i);
    }
    return -1;
  }

  void search(Cost cost) {
    if (uncovered_ == 0) {
      if (cost < best_cost_) {
        best_cost_ = cost;
        best_ = chosen_;
      }
      return;
    }
    const Cost lb = lower_bound();
    if (lb >= kInf || cost + lb >= best_cost_) return;
    const std::int32_t e = next_candidate();
    if (e < 0) return;
    const Edge& edge = inst_.edges[static_cast<std::size_t>(e)];
    const auto u = static_cast<std::size_t>(edge.from), v = static_cast<std::size_t>(edge.to);
    in_tree_[v] = 1;
    ++outdeg_[u];
    uncovered_ -= is_terminal_[v];
    chosen_.push_back(e);
    search(cost + edge.cost);
    chosen_.pop_back();
    uncovered_ += is_terminal_[v];
    --outdeg_[u];
    in_tree_[v] = 0;
    excluded_[static_cast<std::size_t>(e)] = 1;
    search(cost);
    excluded_[static_cast<std::size_t>(e)] = 0;
  }

  const DirectedInstance& inst_;
  std::vector<std::uint8_t> in_tree_, excluded_, is_terminal_;
  std::vector<std::int32_t> outdeg_;
  std::vector<std::vector<std::int32_t>> in_edges_, out_edges_;
  std::vector<std::int32_t> chosen_, best_;
  std::int32_t uncovered_ = 0;
  Cost best_cost_ = kInf;
};

}  // namespace

ExactDstResult exact_dst(const DirectedInstance& inst, const ExactDstLimits& limits) {
  inst.validate();
  require(inst.vertex_count <= limits.max_vertices && static_cast<std::int32_t>(inst.edges.size()) <= limits.max_edges,
          ErrorCode::kInvalidArgument,
          "exact_dst refuses instances beyond n <= " + std::to_string(limits.max_vertices) +
              ", |E| <= " + std::to_string(limits.max_edges));
  return DstSearch(inst).run();
}

ExactGstResult exact_gst(const GroupTreeInstance& inst) {
  inst.validate(false);
  const std::int32_t k = inst.group_count();
  require(k <= kExactGstMaxGroups, ErrorCode::kInvalidArgument,
          "exact_gst supports at most " + std::to_string(kExactGstMaxGroups) + " groups");
  ExactGstResult res;
  for (const auto& g : inst.groups)
    if (g.empty()) return res;
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  const std::size_t full = (std::size_t{1} << k) - 1;
  const std::size_t masks = full + 1;
  std::vector<std::uint32_t> own(n, 0);
  for (std::int32_t t = 0; t < k; ++t)
    for (VertexId v : inst.groups[static_cast<std::size_t>(t)]) own[static_cast<std::size_t>(v)] |= 1u << t;
  const auto ch = inst.children();

  // F[u][mask]: cheapest subtree at u (u included) covering at least mask.
  std::vector<std::vector<Cost>> F(n);
  // choice[u][i][j][mask]: part of mask assigned to child i when j children
  // are used among the first i + 1; ~0u marks "child i not used".
  std::vector<std::vector<std::vector<std::vector<std::uint32_t>>>> choice(n);
  std::vector<std::vector<std::size_t>> best_used(n);  // children count achieving F[u][mask]

  std::vector<VertexId> order;
  {
    std::vector<VertexId> stack{inst.root()};
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (VertexId c : ch[static_cast<std::size_t>(u)]) stack.push_back(c);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto u = static_cast<std::size_t>(*it);
    const auto& kids = ch[u];
    const auto d = static_cast<std::size_t>(std::min<std::int64_t>(inst.degree_bound[u], static_cast<std::int64_t>(kids.size())));
    // G[j][mask]: using exactly j of the processed children.
    std::vector<std::vector<Cost>> G(d + 1, std::vector<Cost>(masks, kInf));
    G[0][0] = 0;
    choice[u].assign(kids.size(), {});
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const auto& fc = F[static_cast<std::size_t>(kids[i])];
      auto next = G;
      auto& pick = choice[u][i];
      pick.assign(d + 1, std::vector<std::uint32_t>(masks, ~0u));
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t m = 0; m < masks; ++m) {
          // Split m into (rest for earlier children, s for child i).
          for (std::size_t s = m;; s = (s - 1) & m) {
            const Cost a = G[j][m & ~s];
            const Cost b = fc[s];
            if (a < kInf && b < kInf && a + b < next[j + 1][m]) {
              next[j + 1][m] = a + b;
              pick[j + 1][m] = static_cast<std::uint32_t>(s);
            }
            if (s == 0) break;
          }
        }
      }
      G = std::move(next);
    }
    auto& f = F[u];
    f.assign(masks, kInf);
    best_used[u].assign(masks, 0);
    for (std::size_t m = 0; m < masks; ++m) {
      const std::size_t need = m & ~static_cast<std::size_t>(own[u]);
      Cost best = kInf;
      for (std::size_t j = 0; j <= d; ++j) {
        if (G[j][need] < best) {
          best = G[j][need];
          best_used[u][need] = j;
        }
      }
      if (best < kInf) f[m] = best + inst.cost[u];
    }
  }

  const auto r = static_cast<std::size_t>(inst.root());
  if (F[r][full] >= kInf) return res;
  res.status = ExactStatus::kOptimal;
  res.cost = F[r][full];

  std::vector<std::pair<VertexId, std::size_t>> work{{inst.root(), full}};
  while (!work.empty()) {
    auto [v, mask] = work.back();
    work.pop_back();
    const auto u = static_cast<std::size_t>(v);
    res.vertices.push_back(v);
    std::size_t m = mask & ~static_cast<std::size_t>(own[u]);
    std::size_t j = best_used[u][m];
    for (std::size_t i = ch[u].size(); i-- > 0 && j > 0;) {
      const std::uint32_t s = choice[u][i][j][m];
      if (s == ~0u) continue;
      work.push_back({ch[u][i], s});
      m &= ~static_cast<std::size_t>(s);
      --j;
    }
  }
  std::sort(res.vertices.begin(), res.vertices.end());
  return res;
}

}  // namespace dbnd
