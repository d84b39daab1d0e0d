#include "dbnd/dst_round.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "json.hpp"

#include "dbnd/error.hpp"
#include "dbnd/treekit.hpp"

namespace dbnd {

DstRounder::DstRounder(const SuperTree& tree, std::span<const double> node_x, double tolerance) : tree_(&tree) {
  const auto n = static_cast<std::size_t>(tree.size());
  require(node_x.size() == n, ErrorCode::kInvalidArgument, "node value count does not match the super-tree");
  require(n > 0 && std::abs(node_x[0] - 1.0) <= tolerance, ErrorCode::kInvariantViolation,
          "super node value is not 1");
  offset_.assign(n + 1, 0);
  for (std::size_t p = 0; p < n; ++p) {
    offset_[p] = static_cast<std::int32_t>(choice_.size());
    const auto kind = tree.nodes[p].kind;
    if (kind != SuperKind::kSuper && kind != SuperKind::kState) continue;
    double total = 0.0;
    for (std::int32_t c : tree.children(static_cast<std::int32_t>(p))) {
      const double xc = node_x[static_cast<std::size_t>(c)];
      if (xc <= 0.0) continue;
      total += xc;
      choice_.push_back(c);
      cumulative_.push_back(total);
    }
    if (std::abs(total - node_x[p]) > tolerance)
      fail(ErrorCode::kInvariantViolation, "children of node " + std::to_string(p) + " carry " + std::to_string(total) +
                                               " but the node carries " + std::to_string(node_x[p]));
    for (auto i = static_cast<std::size_t>(offset_[p]); i < cumulative_.size(); ++i) cumulative_[i] /= total;
  }
  offset_[n] = static_cast<std::int32_t>(choice_.size());
}

std::vector<std::int32_t> DstRounder::sample(Rng& rng) const {
  std::vector<std::int32_t> selected;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t p = stack.back();
    stack.pop_back();
    selected.push_back(p);
    const auto& node = tree_->nodes[static_cast<std::size_t>(p)];
    if (node.kind == SuperKind::kVirtual) {
      for (std::int32_t c : tree_->children(p)) stack.push_back(c);
    } else if (node.kind != SuperKind::kBase) {
      const auto b = static_cast<std::size_t>(offset_[static_cast<std::size_t>(p)]);
      const auto e = static_cast<std::size_t>(offset_[static_cast<std::size_t>(p) + 1]);
      require(b < e, ErrorCode::kInvariantViolation, "selected node " + std::to_string(p) + " has no positive child");
      const double u = rng.uniform();
      auto it = std::upper_bound(cumulative_.begin() + static_cast<std::ptrdiff_t>(b),
                                 cumulative_.begin() + static_cast<std::ptrdiff_t>(e), u);
      if (it == cumulative_.begin() + static_cast<std::ptrdiff_t>(e)) --it;  // u above a rounded-down last sum
      stack.push_back(choice_[static_cast<std::size_t>(it - cumulative_.begin())]);
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<std::int32_t> copy_counts(const SuperTree& tree, const NormalizedInstance& inst,
                                      std::span<const std::int32_t> selected) {
  std::vector<std::int32_t> copies(static_cast<std::size_t>(inst.source_vertex_count), 0);
  copies[static_cast<std::size_t>(inst.graph.root)] = 1;
  for (std::int32_t p : selected) {
    const auto& node = tree.nodes[static_cast<std::size_t>(p)];
    if (node.kind != SuperKind::kBase) continue;
    for (std::int32_t e : node.edges) {
      if (e < 0) continue;
      const VertexId head = inst.graph.edges[static_cast<std::size_t>(e)].to;
      if (head < inst.source_vertex_count) ++copies[static_cast<std::size_t>(head)];
    }
  }
  return copies;
}

RoundingOutcome make_outcome(const SuperTree& tree, const NormalizedInstance& inst, std::vector<std::int32_t> selected) {
  RoundingOutcome out;
  out.selected = std::move(selected);
  out.state_tree = extract_state_tree(tree, out.selected);
  const auto problems = validate_state_tree(out.state_tree, inst, tree.height);
  if (!problems.empty())
    fail(ErrorCode::kInvariantViolation, "sampled state tree is not good at node " +
                                             std::to_string(problems.front().node) + ": " + problems.front().what);
  out.multi_tree = stitch_multi_tree(out.state_tree, inst);
  if (const auto why = check_good_multi_tree(out.multi_tree, inst); !why.empty())
    fail(ErrorCode::kInvariantViolation, "sampled multi-tree is not good: " + why);
  out.cost = multi_tree_cost(out.multi_tree, inst);
  out.copies = copy_counts(tree, inst, out.selected);
  std::vector<std::int32_t> by_label(out.copies.size(), 0);
  for (VertexId v : out.multi_tree.label)
    if (v < inst.source_vertex_count) ++by_label[static_cast<std::size_t>(v)];
  require(by_label == out.copies, ErrorCode::kInvariantViolation, "copy counts disagree with the stitched multi-tree");
  return out;
}

RoundingOutcome round_super_tree(const SuperTree& tree, const NormalizedInstance& inst, std::span<const double> node_x,
                                 Rng& rng) {
  const DstRounder rounder(tree, node_x);
  return make_outcome(tree, inst, rounder.sample(rng));
}

double mgf_parameter(std::int32_t root_level) {
  require(root_level >= 1, ErrorCode::kInvalidArgument, "root level must be positive");
  return std::log1p(1.0 / (2.0 * root_level));
}

MgfStats concentration_stats(std::span<const std::vector<std::int32_t>> copies, double s) {
  require(!copies.empty(), ErrorCode::kInvalidArgument, "no outcomes");
  MgfStats stats;
  stats.s = s;
  stats.trials = static_cast<std::int64_t>(copies.size());
  const std::size_t n = copies.front().size();
  stats.mean.assign(n, 0.0);
  stats.stddev.assign(n, 0.0);
  stats.max_copies.assign(n, 0);
  std::vector<double> sum_sq(n, 0.0);
  for (const auto& m : copies) {
    require(m.size() == n, ErrorCode::kInvalidArgument, "copy count vectors differ in length");
    for (std::size_t v = 0; v < n; ++v) {
      const double y = std::exp(s * m[v]);
      stats.mean[v] += y;
      sum_sq[v] += y * y;
      stats.max_copies[v] = std::max(stats.max_copies[v], m[v]);
    }
  }
  const auto t = static_cast<double>(stats.trials);
  for (std::size_t v = 0; v < n; ++v) {
    stats.mean[v] /= t;
    if (stats.trials > 1) stats.stddev[v] = std::sqrt(std::max(0.0, (sum_sq[v] - t * stats.mean[v] * stats.mean[v]) / (t - 1)));
  }
  return stats;
}

std::int32_t default_repetitions(std::int32_t height, std::int32_t terminal_count) {
  require(height >= 0 && terminal_count >= 1, ErrorCode::kInvalidArgument, "need height >= 0 and at least one terminal");
  return std::max(1, static_cast<std::int32_t>(std::ceil((height + 1) * std::log(10.0 * terminal_count))));
}

std::vector<std::pair<VertexId, VertexId>> extract_tree(const DirectedInstance& inst,
                                                        std::span<const std::int32_t> edge_indices) {
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  std::vector<std::vector<VertexId>> out(n);
  for (std::int32_t e : edge_indices) {
    const auto& edge = inst.edges[static_cast<std::size_t>(e)];
    out[static_cast<std::size_t>(edge.from)].push_back(edge.to);
  }
  for (auto& list : out) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  std::vector<VertexId> parent(n, -1);
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<VertexId> order;
  std::deque<VertexId> queue{inst.root};
  seen[static_cast<std::size_t>(inst.root)] = 1;
  while (!queue.empty()) {
    const VertexId u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (VertexId w : out[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      parent[static_cast<std::size_t>(w)] = u;
      queue.push_back(w);
    }
  }
  std::vector<std::uint8_t> keep(n, 0);
  for (VertexId t : inst.terminals) keep[static_cast<std::size_t>(t)] = seen[static_cast<std::size_t>(t)];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId v = *it;
    if (keep[static_cast<std::size_t>(v)] && parent[static_cast<std::size_t>(v)] >= 0)
      keep[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])] = 1;
  }
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId v : order)
    if (keep[static_cast<std::size_t>(v)] && parent[static_cast<std::size_t>(v)] >= 0)
      edges.push_back({parent[static_cast<std::size_t>(v)], v});
  std::sort(edges.begin(), edges.end());
  return edges;
}

DstPrepared prepare_dst(const DirectedInstance& inst, std::int32_t height, std::int64_t node_cap, LpForm form) {
  inst.validate();
  require(!inst.terminals.empty(), ErrorCode::kInvalidArgument, "instance has no terminals");
  DstPrepared prep;
  prep.norm = normalize(inst);
  prep.height = height >= 0 ? height : default_height(prep.norm.vertex_count());
  prep.tree = build_super_tree(prep.norm, {prep.height, node_cap, true});
  prep.lp = build_dst_lp(prep.tree, prep.norm, form);
  if (prep.lp.infeasible) fail(ErrorCode::kInfeasible, prep.lp.infeasible_reason);
  prep.solution = solve_lp(prep.lp.model);
  if (prep.solution.status != LPStatus::kOptimal) fail(ErrorCode::kInfeasible, "the LP relaxation is infeasible");
  const LPViolation violation = max_violation(prep.lp.model, prep.solution.x);
  if (violation.amount > 1e-9)
    fail(ErrorCode::kInvariantViolation, "LP solution violates row " + std::to_string(violation.row) + " by " +
                                             std::to_string(violation.amount));
  prep.node_x = prep.lp.node_values(prep.solution.x);
  return prep;
}

DstTrialStats dst_trials(const DstPrepared& prep, std::int64_t trials, std::uint64_t seed, bool check) {
  require(trials >= 1, ErrorCode::kInvalidArgument, "need at least one trial");
  const auto& tree = prep.tree;
  const auto& norm = prep.norm;
  DstTrialStats stats;
  stats.trials = trials;
  stats.seed = seed;
  stats.lp_cost = prep.solution.objective;
  stats.coverage_bound = 1.0 / (prep.height + 1);
  const auto k = norm.graph.terminals.size();
  for (VertexId t : norm.graph.terminals) stats.terminals.push_back(norm.origin[static_cast<std::size_t>(t)].vertex);
  // Base node -> terminal slot.
  std::vector<std::int32_t> slot(static_cast<std::size_t>(tree.size()), -1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::int32_t o : prep.lp.terminal_nodes[i]) slot[static_cast<std::size_t>(o)] = static_cast<std::int32_t>(i);
  std::vector<std::int64_t> hits(k, 0);
  std::int64_t all = 0;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<std::vector<std::int32_t>> copies;
  copies.reserve(static_cast<std::size_t>(trials));
  const DstRounder rounder(tree, prep.node_x);
  std::vector<std::uint8_t> hit(k);
  for (std::int64_t i = 0; i < trials; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    std::vector<std::int32_t> selected = rounder.sample(rng);
    std::fill(hit.begin(), hit.end(), 0);
    double cost = 0.0;
    for (std::int32_t p : selected) {
      const auto& node = tree.nodes[static_cast<std::size_t>(p)];
      if (node.kind != SuperKind::kBase) continue;
      cost += static_cast<double>(node.cost);
      if (slot[static_cast<std::size_t>(p)] >= 0) hit[static_cast<std::size_t>(slot[static_cast<std::size_t>(p)])] = 1;
    }
    bool every = true;
    for (std::size_t t = 0; t < k; ++t) {
      hits[t] += hit[t];
      every = every && hit[t];
    }
    all += every ? 1 : 0;
    sum += cost;
    sum_sq += cost * cost;
    copies.push_back(copy_counts(tree, norm, selected));
    if (check) make_outcome(tree, norm, std::move(selected));
  }
  const auto t = static_cast<double>(trials);
  for (std::size_t i = 0; i < k; ++i) stats.terminal_hit_rate.push_back(static_cast<double>(hits[i]) / t);
  stats.all_covered_rate = static_cast<double>(all) / t;
  stats.cost_mean = sum / t;
  stats.cost_stddev = trials > 1 ? std::sqrt(std::max(0.0, (sum_sq - t * stats.cost_mean * stats.cost_mean) / (t - 1))) : 0.0;
  const std::int32_t h_prime = tree.root_level();
  stats.mgf = concentration_stats(copies, mgf_parameter(h_prime));
  stats.mgf_bound = 1.0 + 2.0 / h_prime;
  return stats;
}

DstRunReport run_dst(const DirectedInstance& inst, const DstRunParams& params) {
  inst.validate();
  DstRunReport report;
  report.instance_name = params.instance_name;
  report.seed = params.seed;
  report.terminal_count = inst.terminal_count();
  if (inst.terminals.empty()) {
    report.height = params.height >= 0 ? params.height : default_height(normalize(inst).vertex_count());
    report.repetitions = std::max(params.repetitions, 1);
    report.repetition_costs.assign(static_cast<std::size_t>(report.repetitions), 0);
    std::vector<std::vector<std::int32_t>> copies(static_cast<std::size_t>(report.repetitions),
                                                  std::vector<std::int32_t>(static_cast<std::size_t>(inst.vertex_count), 0));
    for (auto& c : copies) c[static_cast<std::size_t>(inst.root)] = 1;
    report.mgf = concentration_stats(copies, 0.0);
    return report;
  }
  const DstPrepared prep = prepare_dst(inst, params.height, params.node_cap, params.form);
  const auto& norm = prep.norm;
  const auto& tree = prep.tree;
  report.height = prep.height;
  report.super_tree_nodes = tree.size();
  report.root_level = tree.root_level();
  report.lp_rows = prep.lp.model.row_count();
  report.lp_columns = prep.lp.model.variable_count();
  report.lp_cost = prep.solution.objective;
  const auto& node_x = prep.node_x;
  const DstRounder rounder(tree, node_x);
  report.repetitions = params.repetitions > 0 ? params.repetitions : default_repetitions(report.height, report.terminal_count);
  std::vector<std::vector<std::int32_t>> copies;
  std::vector<std::int32_t> union_edges;
  for (std::int32_t i = 0; i < report.repetitions; ++i) {
    Rng rng = Rng::stream(params.seed, static_cast<std::uint64_t>(i));
    std::vector<std::int32_t> selected = rounder.sample(rng);
    Cost cost = 0;
    for (std::int32_t p : selected) {
      const auto& node = tree.nodes[static_cast<std::size_t>(p)];
      if (node.kind != SuperKind::kBase) continue;
      cost += node.cost;
      for (std::int32_t e : node.edges)
        if (e >= 0 && norm.source_edge[static_cast<std::size_t>(e)] >= 0)
          union_edges.push_back(norm.source_edge[static_cast<std::size_t>(e)]);
    }
    if (params.check) {
      const RoundingOutcome outcome = make_outcome(tree, norm, selected);
      require(outcome.cost == cost, ErrorCode::kInvariantViolation, "multi-tree cost differs from the base-node cost");
    }
    report.repetition_costs.push_back(cost);
    copies.push_back(copy_counts(tree, norm, selected));
  }
  std::sort(union_edges.begin(), union_edges.end());
  union_edges.erase(std::unique(union_edges.begin(), union_edges.end()), union_edges.end());
  for (std::int32_t e : union_edges) report.union_cost += inst.edges[static_cast<std::size_t>(e)].cost;

  report.tree_edges = extract_tree(inst, union_edges);
  std::map<std::pair<VertexId, VertexId>, Cost> cheapest;
  for (std::int32_t e : union_edges) {
    const auto& edge = inst.edges[static_cast<std::size_t>(e)];
    auto [it, fresh] = cheapest.try_emplace({edge.from, edge.to}, edge.cost);
    if (!fresh) it->second = std::min(it->second, edge.cost);
  }
  std::vector<std::uint8_t> in_tree(static_cast<std::size_t>(inst.vertex_count), 0);
  for (const auto& uv : report.tree_edges) {
    in_tree[static_cast<std::size_t>(uv.second)] = 1;
    ++report.out_degree[uv.first];
    report.tree_cost += cheapest.at(uv);
  }
  for (VertexId t : inst.terminals) report.terminals_covered += in_tree[static_cast<std::size_t>(t)];
  for (auto [v, deg] : report.out_degree) {
    const double ratio = static_cast<double>(deg) / inst.degree_bound[static_cast<std::size_t>(v)];
    if (ratio > 1.0) report.degree_violations[v] = ratio;
  }
  report.mgf = concentration_stats(copies, mgf_parameter(report.root_level));
  return report;
}

std::int32_t state_tree_depth(const DirectedInstance& inst, std::span<const std::pair<VertexId, VertexId>> edges) {
  const NormalizedInstance norm = normalize(inst);
  const MultiTree lifted = lift_tree(norm, {edges.begin(), edges.end()});
  return gen_state_tree(lifted, norm, -1).depth();
}

std::string to_json(const DstRunReport& r) {
  using nlohmann::json;
  json j;
  j["schema_version"] = 1;
  j["problem"] = "dst";
  j["instance"] = r.instance_name;
  j["seed"] = r.seed;
  j["h"] = r.height;
  j["h_prime"] = r.root_level;
  j["Q"] = r.repetitions;
  j["super_tree_nodes"] = r.super_tree_nodes;
  j["lp"] = {{"rows", r.lp_rows}, {"columns", r.lp_columns}};
  j["lp_cost"] = r.lp_cost;
  j["repetition_costs"] = r.repetition_costs;
  double mean = 0.0, sq = 0.0;
  for (Cost c : r.repetition_costs) {
    mean += static_cast<double>(c);
    sq += static_cast<double>(c) * static_cast<double>(c);
  }
  const auto t = static_cast<double>(r.repetition_costs.size());
  if (t > 0) mean /= t;
  j["repetition_cost_stats"] = {{"mean", mean},
                                {"stddev", t > 1 ? std::sqrt(std::max(0.0, (sq - t * mean * mean) / (t - 1))) : 0.0},
                                {"trials", r.repetition_costs.size()}};
  j["union_cost"] = r.union_cost;
  j["tree_cost"] = r.tree_cost;
  j["tree_edges"] = r.tree_edges;
  j["coverage"] = {{"covered", r.terminals_covered}, {"total", r.terminal_count}};
  json degrees = json::object(), violations = json::object();
  for (auto [v, d] : r.out_degree) degrees[std::to_string(v)] = d;
  for (auto [v, ratio] : r.degree_violations) violations[std::to_string(v)] = ratio;
  j["out_degree"] = degrees;
  j["degree_violations"] = violations;
  json vertices = json::array();
  for (std::size_t v = 0; v < r.mgf.mean.size(); ++v)
    vertices.push_back({{"vertex", v}, {"mean", r.mgf.mean[v]}, {"stddev", r.mgf.stddev[v]}, {"max_copies", r.mgf.max_copies[v]}});
  j["mgf_stats"] = {{"s", r.mgf.s},
                    {"trials", r.mgf.trials},
                    {"bound", r.root_level > 0 ? 1.0 + 2.0 / r.root_level : 1.0},
                    {"vertices", vertices}};
  return j.dump(2) + "\n";
}

std::string to_json(const DstTrialStats& st) {
  using nlohmann::json;
  json j;
  j["trials"] = st.trials;
  j["seed"] = st.seed;
  json terms = json::array();
  for (std::size_t i = 0; i < st.terminals.size(); ++i) {
    const double p = st.terminal_hit_rate[i];
    terms.push_back({{"terminal", st.terminals[i]},
                     {"hit_rate", p},
                     {"stddev", std::sqrt(p * (1.0 - p) / static_cast<double>(st.trials))}});
  }
  j["terminals"] = terms;
  j["coverage_bound"] = st.coverage_bound;
  j["all_covered_rate"] = st.all_covered_rate;
  j["cost"] = {{"mean", st.cost_mean}, {"stddev", st.cost_stddev}, {"lp_cost", st.lp_cost}};
  json vertices = json::array();
  for (std::size_t v = 0; v < st.mgf.mean.size(); ++v)
    vertices.push_back({{"vertex", v}, {"mean", st.mgf.mean[v]}, {"stddev", st.mgf.stddev[v]}, {"max_copies", st.mgf.max_copies[v]}});
  j["mgf_stats"] = {{"s", st.mgf.s}, {"bound", st.mgf_bound}, {"vertices", vertices}};
  return j.dump(2) + "\n";
}

}  // namespace dbnd
