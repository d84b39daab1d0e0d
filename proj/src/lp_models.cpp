#include "dbnd/lp_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dbnd/error.hpp"

namespace dbnd {

namespace {

using Terms = std::vector<std::pair<std::int32_t, double>>;

// Merges duplicate variables and drops zero coefficients.
Terms combine(Terms terms) {
  std::sort(terms.begin(), terms.end());
  Terms out;
  for (auto [j, a] : terms) {
    if (!out.empty() && out.back().first == j)
      out.back().second += a;
    else
      out.push_back({j, a});
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::int32_t find(std::int32_t x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace

std::vector<double> DstLp::node_values(std::span<const double> x) const {
  std::vector<double> out(node_var.size());
  for (std::size_t p = 0; p < node_var.size(); ++p) out[p] = x[static_cast<std::size_t>(node_var[p])];
  return out;
}

DstLp build_dst_lp(const SuperTree& tree, const NormalizedInstance& inst, LpForm form) {
  DstLp lp;
  const auto n = static_cast<std::size_t>(tree.size());
  const auto& terminals = inst.graph.terminals;
  lp.terminal_nodes.assign(terminals.size(), {});
  {
    std::vector<std::int32_t> terminal_index(static_cast<std::size_t>(inst.vertex_count()), -1);
    for (std::size_t i = 0; i < terminals.size(); ++i) terminal_index[static_cast<std::size_t>(terminals[i])] = static_cast<std::int32_t>(i);
    for (std::int32_t p = 0; p < tree.size(); ++p) {
      const auto& node = tree.nodes[static_cast<std::size_t>(p)];
      if (node.kind != SuperKind::kBase) continue;
      for (std::int32_t e : node.edges) {
        if (e < 0) continue;
        const std::int32_t ti = terminal_index[static_cast<std::size_t>(inst.graph.edges[static_cast<std::size_t>(e)].to)];
        if (ti >= 0) lp.terminal_nodes[static_cast<std::size_t>(ti)].push_back(p);
      }
    }
  }
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    if (lp.terminal_nodes[i].empty() && !lp.infeasible) {
      lp.infeasible = true;
      lp.infeasible_reason = "no base node involves terminal " + std::to_string(terminals[i]);
    }
  }

  auto kids = [&](std::int32_t p) { return tree.children(p); };
  auto kind = [&](std::int32_t p) { return tree.nodes[static_cast<std::size_t>(p)].kind; };

  if (form == LpForm::kFull) {
    lp.node_var.resize(n);
    for (std::int32_t p = 0; p < tree.size(); ++p) {
      const auto& node = tree.nodes[static_cast<std::size_t>(p)];
      lp.node_var[static_cast<std::size_t>(p)] =
          lp.model.add_variable(node.kind == SuperKind::kBase ? static_cast<double>(node.cost) : 0.0, 0.0, 1.0,
                                "n" + std::to_string(p));
    }
    for (std::int32_t p = 0; p < tree.size(); ++p) {
      if (kind(p) == SuperKind::kSuper || kind(p) == SuperKind::kState) {
        Terms t{{p, -1.0}};
        for (std::int32_t c : kids(p)) t.push_back({c, 1.0});
        lp.model.add_row(std::move(t), Relation::kEqual, 0.0, "one_child_" + std::to_string(p));
      } else if (kind(p) == SuperKind::kVirtual) {
        for (std::int32_t c : kids(p))
          lp.model.add_row({{c, 1.0}, {p, -1.0}}, Relation::kEqual, 0.0,
                           "both_children_" + std::to_string(p) + "_" + std::to_string(c));
      }
    }
    for (std::size_t ti = 0; ti < terminals.size(); ++ti) {
      std::vector<Terms> rows(n);
      for (std::int32_t o : lp.terminal_nodes[ti])
        for (std::int32_t a = tree.nodes[static_cast<std::size_t>(o)].parent; a >= 0; a = tree.nodes[static_cast<std::size_t>(a)].parent)
          rows[static_cast<std::size_t>(a)].push_back({o, 1.0});
      for (std::int32_t p = 0; p < tree.size(); ++p) {
        auto& t = rows[static_cast<std::size_t>(p)];
        if (t.empty()) continue;
        t.push_back({p, -1.0});
        lp.model.add_row(combine(std::move(t)), Relation::kLessEqual, 0.0,
                         "at_most_one_" + std::to_string(p) + "_t" + std::to_string(terminals[ti]));
      }
      Terms cover;
      for (std::int32_t o : lp.terminal_nodes[ti]) cover.push_back({o, 1.0});
      lp.model.add_row(combine(std::move(cover)), Relation::kEqual, 1.0, "cover_t" + std::to_string(terminals[ti]));
    }
    return lp;
  }

  // Reduced form: virtual nodes, their children, and single-child state
  // chains carry one shared value.
  UnionFind uf(n);
  for (std::int32_t p = 0; p < tree.size(); ++p) {
    const auto ch = kids(p);
    if (kind(p) == SuperKind::kVirtual || ((kind(p) == SuperKind::kState || kind(p) == SuperKind::kSuper) && ch.size() == 1))
      for (std::int32_t c : ch) uf.unite(p, c);
  }
  lp.node_var.assign(n, -1);
  std::vector<std::int32_t> class_var(n, -1);
  for (std::int32_t p = 0; p < tree.size(); ++p) {
    const auto root = static_cast<std::size_t>(uf.find(p));
    if (class_var[root] < 0) class_var[root] = lp.model.add_variable(0.0, 0.0, 1.0, "g" + std::to_string(root));
    lp.node_var[static_cast<std::size_t>(p)] = class_var[root];
    const auto& node = tree.nodes[static_cast<std::size_t>(p)];
    if (node.kind == SuperKind::kBase) lp.model.objective[static_cast<std::size_t>(class_var[root])] += static_cast<double>(node.cost);
  }
  auto var = [&](std::int32_t p) { return lp.node_var[static_cast<std::size_t>(p)]; };
  for (std::int32_t p = 0; p < tree.size(); ++p) {
    const auto ch = kids(p);
    if ((kind(p) == SuperKind::kState || kind(p) == SuperKind::kSuper) && ch.size() >= 2) {
      Terms t{{var(p), -1.0}};
      for (std::int32_t c : ch) t.push_back({var(c), 1.0});
      lp.model.add_row(combine(std::move(t)), Relation::kEqual, 0.0, "one_child_" + std::to_string(p));
    } else if (kind(p) != SuperKind::kBase && ch.empty()) {
      lp.model.upper[static_cast<std::size_t>(var(p))] = 0.0;
    }
  }
  std::vector<std::uint8_t> has(n);
  for (std::size_t ti = 0; ti < terminals.size(); ++ti) {
    const auto& ot = lp.terminal_nodes[ti];
    std::fill(has.begin(), has.end(), 0);
    for (std::int32_t o : ot)
      for (std::int32_t a = o; a >= 0 && !has[static_cast<std::size_t>(a)]; a = tree.nodes[static_cast<std::size_t>(a)].parent)
        has[static_cast<std::size_t>(a)] = 1;
    std::vector<Terms> rows(n);
    for (std::int32_t o : ot) {
      for (std::int32_t a = tree.nodes[static_cast<std::size_t>(o)].parent; a >= 0; a = tree.nodes[static_cast<std::size_t>(a)].parent) {
        if (kind(a) != SuperKind::kVirtual) continue;
        const auto ch = kids(a);
        if (has[static_cast<std::size_t>(ch[0])] && has[static_cast<std::size_t>(ch[1])]) rows[static_cast<std::size_t>(a)].push_back({var(o), 1.0});
      }
    }
    for (std::int32_t p = 0; p < tree.size(); ++p) {
      auto& t = rows[static_cast<std::size_t>(p)];
      if (t.empty()) continue;
      t.push_back({var(p), -1.0});
      auto terms = combine(std::move(t));
      if (terms.empty()) continue;
      lp.model.add_row(std::move(terms), Relation::kLessEqual, 0.0,
                       "at_most_one_" + std::to_string(p) + "_t" + std::to_string(terminals[ti]));
    }
    Terms cover;
    for (std::int32_t o : ot) cover.push_back({var(o), 1.0});
    lp.model.add_row(combine(std::move(cover)), Relation::kEqual, 1.0, "cover_t" + std::to_string(terminals[ti]));
  }
  return lp;
}

std::vector<double> GstLp::vertex_values(std::span<const double> x) const {
  std::vector<double> out(vertex_var.size(), 0.0);
  for (std::size_t v = 0; v < vertex_var.size(); ++v)
    if (vertex_var[v] >= 0) out[v] = x[static_cast<std::size_t>(vertex_var[v])];
  return out;
}

GstLp build_gst_lp(const GroupTreeInstance& inst, LpForm form) {
  inst.validate(true);
  GstLp lp;
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  const auto ch = inst.children();
  const VertexId r = inst.root();
  for (std::size_t t = 0; t < inst.groups.size(); ++t) {
    if (inst.groups[t].empty() && !lp.infeasible) {
      lp.infeasible = true;
      lp.infeasible_reason = "group " + std::to_string(t) + " is empty";
    }
  }
  std::vector<VertexId> order;  // parents before children
  {
    std::vector<VertexId> stack{r};
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (VertexId c : ch[static_cast<std::size_t>(u)]) stack.push_back(c);
    }
  }
  std::vector<std::uint8_t> member(n, 0);
  for (const auto& g : inst.groups)
    for (VertexId v : g) member[static_cast<std::size_t>(v)] = 1;
  // live: some group member in the subtree (always true in the full form).
  std::vector<std::uint8_t> live(n, form == LpForm::kFull ? 1 : 0);
  if (form == LpForm::kReduced) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto u = static_cast<std::size_t>(*it);
      if (member[u]) live[u] = 1;
      if (live[u] && inst.parent[u] >= 0) live[static_cast<std::size_t>(inst.parent[u])] = 1;
    }
    live[static_cast<std::size_t>(r)] = 1;
  }
  lp.vertex_var.assign(n, -1);
  for (VertexId u = 0; u < inst.vertex_count; ++u)
    if (live[static_cast<std::size_t>(u)])
      lp.vertex_var[static_cast<std::size_t>(u)] =
          lp.model.add_variable(static_cast<double>(inst.cost[static_cast<std::size_t>(u)]), 0.0, 1.0, "v" + std::to_string(u));
  auto var = [&](VertexId v) { return lp.vertex_var[static_cast<std::size_t>(v)]; };

  for (VertexId u : order) {
    if (!live[static_cast<std::size_t>(u)]) continue;
    std::vector<VertexId> kids;
    for (VertexId c : ch[static_cast<std::size_t>(u)])
      if (live[static_cast<std::size_t>(c)]) kids.push_back(c);
    for (VertexId c : kids)
      lp.model.add_row({{var(c), 1.0}, {var(u), -1.0}}, Relation::kLessEqual, 0.0,
                       "monotone_" + std::to_string(c));
    const auto d = inst.degree_bound[static_cast<std::size_t>(u)];
    const bool degree_row = form == LpForm::kFull ? !kids.empty() : static_cast<std::int32_t>(kids.size()) > d;
    if (degree_row) {
      Terms t{{var(u), -static_cast<double>(d)}};
      for (VertexId c : kids) t.push_back({var(c), 1.0});
      lp.model.add_row(std::move(t), Relation::kLessEqual, 0.0, "degree_" + std::to_string(u));
    }
  }
  std::vector<std::int32_t> owner(n, -1);
  for (std::size_t t = 0; t < inst.groups.size(); ++t)
    for (VertexId v : inst.groups[t]) owner[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(t);
  std::vector<std::uint8_t> has(n);
  for (std::size_t t = 0; t < inst.groups.size(); ++t) {
    const auto& g = inst.groups[t];
    std::fill(has.begin(), has.end(), 0);
    for (VertexId o : g)
      for (VertexId a = o; a >= 0 && !has[static_cast<std::size_t>(a)]; a = inst.parent[static_cast<std::size_t>(a)])
        has[static_cast<std::size_t>(a)] = 1;
    std::vector<Terms> rows(n);
    for (VertexId o : g) {
      for (VertexId a = inst.parent[static_cast<std::size_t>(o)]; a >= 0; a = inst.parent[static_cast<std::size_t>(a)]) {
        bool emit = true;
        if (form == LpForm::kReduced) {
          std::int32_t branches = 0;
          for (VertexId c : ch[static_cast<std::size_t>(a)]) branches += has[static_cast<std::size_t>(c)];
          emit = branches >= 2;
        }
        if (emit) rows[static_cast<std::size_t>(a)].push_back({var(o), 1.0});
      }
    }
    for (VertexId u : order) {
      auto& terms = rows[static_cast<std::size_t>(u)];
      if (terms.empty()) continue;
      terms.push_back({var(u), -1.0});
      lp.model.add_row(combine(std::move(terms)), Relation::kLessEqual, 0.0,
                       "subtree_" + std::to_string(u) + "_g" + std::to_string(t));
    }
    Terms cover;
    for (VertexId o : g) cover.push_back({var(o), 1.0});
    lp.model.add_row(combine(std::move(cover)), Relation::kEqual, 1.0, "cover_g" + std::to_string(t));
  }
  return lp;
}

std::vector<double> modify_gst_solution(const GroupTreeInstance& inst, std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(inst.vertex_count), ErrorCode::kInvalidArgument,
          "solution size mismatch");
  const double threshold = 1.0 / (2.0 * inst.vertex_count);
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (x[v] < threshold) continue;
    int e = 0;
    const double mant = std::frexp(x[v], &e);  // x = mant * 2^e, mant in [0.5, 1)
    double p = std::ldexp(1.0, e);
    if (mant == 0.5 || (mant - 0.5) <= 0.5 * 1e-9) p = std::ldexp(1.0, e - 1);
    out[v] = std::min(p, 1.0);
  }
  return out;
}

std::vector<std::string> check_modified_solution(const GroupTreeInstance& inst, std::span<const double> x,
                                                 std::span<const double> modified, double tol) {
  std::vector<std::string> bad;
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  require(x.size() == n && modified.size() == n, ErrorCode::kInvalidArgument, "solution size mismatch");
  const auto ch = inst.children();
  const double floor_value = 1.0 / (2.0 * inst.vertex_count);
  for (std::size_t v = 0; v < n; ++v) {
    const double y = modified[v];
    if (y == 0.0) continue;
    int e = 0;
    const double mant = std::frexp(y, &e);
    if (mant != 0.5 || y > 1.0 || y < floor_value) {
      bad.push_back("P1 at vertex " + std::to_string(v));
      break;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    const VertexId p = inst.parent[v];
    if (p >= 0 && modified[v] > modified[static_cast<std::size_t>(p)]) {
      bad.push_back("P2 at vertex " + std::to_string(v));
      break;
    }
  }
  for (std::size_t t = 0; t < inst.groups.size(); ++t) {
    double s = 0.0;
    for (VertexId o : inst.groups[t]) s += modified[static_cast<std::size_t>(o)];
    if (s < 0.5 - tol || s > 2.0 + tol) {
      bad.push_back("P3 at group " + std::to_string(t));
      break;
    }
  }
  {
    bool p4 = true;
    for (std::size_t t = 0; t < inst.groups.size() && p4; ++t) {
      std::vector<double> below(n, 0.0);
      for (VertexId o : inst.groups[t])
        for (VertexId a = o; a >= 0; a = inst.parent[static_cast<std::size_t>(a)]) below[static_cast<std::size_t>(a)] += modified[static_cast<std::size_t>(o)];
      for (std::size_t u = 0; u < n && p4; ++u)
        if (modified[u] > 0.0 && below[u] > 2.0 * modified[u] + tol) {
          bad.push_back("P4 at vertex " + std::to_string(u) + " group " + std::to_string(t));
          p4 = false;
        }
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (modified[u] == 0.0) continue;
    double s = 0.0;
    for (VertexId c : ch[u]) s += modified[static_cast<std::size_t>(c)];
    if (s > 2.0 * inst.degree_bound[u] * modified[u] + tol) {
      bad.push_back("P5 at vertex " + std::to_string(u));
      break;
    }
  }
  double before = 0.0, after = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    before += static_cast<double>(inst.cost[v]) * x[v];
    after += static_cast<double>(inst.cost[v]) * modified[v];
  }
  if (after > 2.0 * before + tol * std::max(1.0, before)) bad.push_back("P6");
  return bad;
}

}  // namespace dbnd
