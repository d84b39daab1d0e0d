#include "dbnd/gst_round.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "json.hpp"

#include "dbnd/error.hpp"

namespace dbnd {

GstScaleParameters gst_scale_parameters(std::int32_t vertex_count) {
  require(vertex_count >= 1, ErrorCode::kInvalidArgument, "vertex count must be positive");
  GstScaleParameters p;
  const auto two_n = 2 * static_cast<std::uint64_t>(vertex_count);
  p.L = static_cast<std::int32_t>(std::bit_width(two_n - 1));  // smallest L with 2^L >= 2n
  p.gamma = std::max(static_cast<std::int32_t>(std::bit_width(static_cast<std::uint32_t>(p.L))) - 1 - 2, 0);
  return p;
}

namespace {

// Vertices in an order where parents come first.
std::vector<VertexId> top_down_order(const GroupTreeInstance& inst, const std::vector<std::vector<VertexId>>& ch) {
  std::vector<VertexId> order;
  order.reserve(static_cast<std::size_t>(inst.vertex_count));
  std::vector<VertexId> stack{inst.root()};
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    order.push_back(u);
    for (VertexId c : ch[static_cast<std::size_t>(u)]) stack.push_back(c);
  }
  return order;
}

}  // namespace

std::vector<std::int32_t> compute_hop_levels(const GroupTreeInstance& inst, std::span<const double> xt) {
  require(xt.size() == static_cast<std::size_t>(inst.vertex_count), ErrorCode::kInvalidArgument, "solution size mismatch");
  const auto ch = inst.children();
  std::vector<std::int32_t> level(xt.size(), 0);
  for (VertexId u : top_down_order(inst, ch)) {
    const VertexId p = inst.parent[static_cast<std::size_t>(u)];
    if (p < 0) continue;
    const auto uu = static_cast<std::size_t>(u);
    const auto pp = static_cast<std::size_t>(p);
    level[uu] = level[pp] + (xt[uu] > 0.0 && xt[uu] < xt[pp] ? 1 : 0);
  }
  return level;
}

std::vector<double> scale_solution(std::span<const double> xt, std::span<const std::int32_t> levels,
                                   std::int32_t gamma) {
  require(xt.size() == levels.size(), ErrorCode::kInvalidArgument, "level count mismatch");
  std::vector<double> out(xt.size());
  for (std::size_t v = 0; v < xt.size(); ++v) out[v] = std::ldexp(xt[v], std::min(levels[v], gamma));
  return out;
}

std::vector<std::pair<VertexId, VertexId>> monotonicity_violations(const GroupTreeInstance& inst,
                                                                   std::span<const double> scaled) {
  std::vector<std::pair<VertexId, VertexId>> bad;
  for (VertexId v = 0; v < inst.vertex_count; ++v) {
    const VertexId p = inst.parent[static_cast<std::size_t>(v)];
    if (p >= 0 && scaled[static_cast<std::size_t>(v)] > scaled[static_cast<std::size_t>(p)]) bad.push_back({p, v});
  }
  return bad;
}

std::vector<VertexId> branching_violations(const GroupTreeInstance& inst, std::span<const double> scaled, double tol) {
  std::vector<double> mass(scaled.size(), 0.0);
  for (VertexId v = 0; v < inst.vertex_count; ++v) {
    const VertexId p = inst.parent[static_cast<std::size_t>(v)];
    if (p >= 0 && scaled[static_cast<std::size_t>(p)] > 0.0)
      mass[static_cast<std::size_t>(p)] += scaled[static_cast<std::size_t>(v)] / scaled[static_cast<std::size_t>(p)];
  }
  std::vector<VertexId> bad;
  for (VertexId u = 0; u < inst.vertex_count; ++u)
    if (mass[static_cast<std::size_t>(u)] > 4.0 * inst.degree_bound[static_cast<std::size_t>(u)] + tol) bad.push_back(u);
  return bad;
}

GstRounder::GstRounder(const GroupTreeInstance& inst, std::span<const double> scaled, double tol) : root_(inst.root()) {
  const auto n = static_cast<std::size_t>(inst.vertex_count);
  require(scaled.size() == n, ErrorCode::kInvalidArgument, "solution size mismatch");
  require(std::abs(scaled[static_cast<std::size_t>(root_)] - 1.0) <= tol, ErrorCode::kInvariantViolation,
          "scaled root value is not 1");
  const auto ch = inst.children();
  offset_.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    offset_[u] = static_cast<std::int32_t>(child_.size());
    if (scaled[u] <= 0.0) continue;
    for (VertexId v : ch[u]) {
      const double ratio = scaled[static_cast<std::size_t>(v)] / scaled[u];
      if (ratio > 1.0 + tol)
        fail(ErrorCode::kInvariantViolation,
             "child " + std::to_string(v) + " has a larger scaled value than its parent " + std::to_string(u));
      if (ratio <= 0.0) continue;
      child_.push_back(v);
      probability_.push_back(std::min(ratio, 1.0));
    }
  }
  offset_[n] = static_cast<std::int32_t>(child_.size());
}

std::vector<VertexId> GstRounder::sample(Rng& rng) const {
  std::vector<VertexId> selected;
  std::vector<VertexId> stack{root_};
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    selected.push_back(u);
    const auto b = static_cast<std::size_t>(offset_[static_cast<std::size_t>(u)]);
    const auto e = static_cast<std::size_t>(offset_[static_cast<std::size_t>(u) + 1]);
    for (std::size_t i = b; i < e; ++i)
      if (probability_[i] >= 1.0 || rng.uniform() < probability_[i]) stack.push_back(child_[i]);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<VertexId> recursive_round(const GroupTreeInstance& inst, std::span<const double> scaled, Rng& rng) {
  return GstRounder(inst, scaled).sample(rng);
}

std::vector<double> alpha_sequence(std::int32_t L, std::int32_t gamma) {
  require(L >= 1 && gamma >= 0, ErrorCode::kInvalidArgument, "need L >= 1 and gamma >= 0");
  std::vector<double> alpha(static_cast<std::size_t>(gamma) + 1);
  alpha[static_cast<std::size_t>(gamma)] = 1.0 / (2.0 * L);
  for (std::int32_t l = gamma - 1; l >= 0; --l) {
    const double next = alpha[static_cast<std::size_t>(l) + 1];
    alpha[static_cast<std::size_t>(l)] = 2.0 * next - 4.0 * next * next;
  }
  return alpha;
}

std::int32_t default_gst_repetitions(double alpha0, std::int32_t group_count) {
  require(alpha0 > 0.0 && alpha0 < 2.0 && group_count >= 1, ErrorCode::kInvalidArgument,
          "need alpha0 in (0, 2) and at least one group");
  return std::max(1, static_cast<std::int32_t>(std::ceil(std::log(10.0 * group_count) / -std::log1p(-alpha0 / 2.0))));
}

GstPreparedSolution prepare_gst_point(const GroupTreeInstance& inst, std::span<const double> x, bool check,
                                      std::int32_t gamma_cap) {
  require(x.size() == static_cast<std::size_t>(inst.vertex_count), ErrorCode::kInvalidArgument,
          "solution size mismatch");
  GstPreparedSolution out;
  out.x.assign(x.begin(), x.end());
  for (VertexId v = 0; v < inst.vertex_count; ++v)
    out.lp_cost += static_cast<double>(inst.cost[static_cast<std::size_t>(v)]) * out.x[static_cast<std::size_t>(v)];
  out.modified = modify_gst_solution(inst, out.x);
  out.scale = gst_scale_parameters(inst.vertex_count);
  if (gamma_cap >= 0) out.scale.gamma = std::min(out.scale.gamma, gamma_cap);
  out.levels = compute_hop_levels(inst, out.modified);
  out.scaled = scale_solution(out.modified, out.levels, out.scale.gamma);
  if (check) {
    const auto bad = check_modified_solution(inst, out.x, out.modified);
    if (!bad.empty()) fail(ErrorCode::kInvariantViolation, "modified solution violates " + bad.front());
    if (!monotonicity_violations(inst, out.scaled).empty())
      fail(ErrorCode::kInvariantViolation, "scaled solution is not monotone");
    if (const auto b = branching_violations(inst, out.scaled); !b.empty())
      fail(ErrorCode::kInvariantViolation, "branching mass above 4 d_u at vertex " + std::to_string(b.front()));
    for (std::int32_t l : out.levels)
      require(l <= out.scale.L, ErrorCode::kInvariantViolation, "hop level above L");
  }
  return out;
}

GstPreparedSolution prepare_gst(const GroupTreeInstance& inst, LpForm form, bool check, std::int32_t gamma_cap) {
  const GstLp lp = build_gst_lp(inst, form);
  if (lp.infeasible) fail(ErrorCode::kInfeasible, lp.infeasible_reason);
  const LPSolution solution = solve_lp(lp.model);
  if (solution.status != LPStatus::kOptimal) fail(ErrorCode::kInfeasible, "the LP relaxation is infeasible");
  const LPViolation violation = max_violation(lp.model, solution.x);
  if (violation.amount > 1e-9)
    fail(ErrorCode::kInvariantViolation, "LP solution violates row " + std::to_string(violation.row) + " by " +
                                             std::to_string(violation.amount));
  GstPreparedSolution out = prepare_gst_point(inst, lp.vertex_values(solution.x), check, gamma_cap);
  out.lp_cost = solution.objective;
  out.lp_rows = lp.model.row_count();
  out.lp_columns = lp.model.variable_count();
  return out;
}

GstRunReport run_gst(const GroupTreeInstance& inst, const GstRunParams& params) {
  GstRunReport report;
  report.instance_name = params.instance_name;
  report.seed = params.seed;
  report.vertex_count = inst.vertex_count;
  const GstPreparedSolution prep = prepare_gst(inst, params.form, params.check, params.gamma_cap);
  report.scale = prep.scale;
  report.lp_rows = prep.lp_rows;
  report.lp_columns = prep.lp_columns;
  report.lp_cost = prep.lp_cost;
  for (VertexId v = 0; v < inst.vertex_count; ++v) {
    const auto c = static_cast<double>(inst.cost[static_cast<std::size_t>(v)]);
    report.modified_cost += c * prep.modified[static_cast<std::size_t>(v)];
    report.scaled_cost += c * prep.scaled[static_cast<std::size_t>(v)];
  }
  report.alpha = alpha_sequence(prep.scale.L, prep.scale.gamma);
  const auto k = inst.group_count();
  report.repetitions = params.repetitions > 0 ? params.repetitions
                       : k > 0                ? default_gst_repetitions(report.alpha.front(), k)
                                              : 1;
  for (const auto& g : inst.groups) {
    double z = 0.0;
    for (VertexId o : g) z += prep.modified[static_cast<std::size_t>(o)];
    report.z_root.push_back(z);
  }

  const GstRounder rounder(inst, prep.scaled);
  std::vector<std::uint8_t> in_union(static_cast<std::size_t>(inst.vertex_count), 0);
  for (std::int32_t i = 0; i < report.repetitions; ++i) {
    Rng rng = Rng::stream(params.seed, static_cast<std::uint64_t>(i));
    std::vector<VertexId> selected = rounder.sample(rng);
    Cost cost = 0;
    for (VertexId v : selected) {
      cost += inst.cost[static_cast<std::size_t>(v)];
      in_union[static_cast<std::size_t>(v)] = 1;
    }
    report.repetition_costs.push_back(cost);
    report.repetition_vertices.push_back(std::move(selected));
  }
  for (VertexId v = 0; v < inst.vertex_count; ++v) {
    if (!in_union[static_cast<std::size_t>(v)]) continue;
    report.union_vertices.push_back(v);
    report.union_cost += inst.cost[static_cast<std::size_t>(v)];
  }
  for (const auto& g : inst.groups) {
    bool hit = false;
    for (VertexId o : g) hit = hit || in_union[static_cast<std::size_t>(o)];
    report.group_covered.push_back(hit ? 1 : 0);
  }
  const auto base = inst.base_degree_bounds();
  for (VertexId v : report.union_vertices) {
    const VertexId p = inst.parent[static_cast<std::size_t>(v)];
    const bool synthetic = !inst.synthetic_leaf.empty() && inst.synthetic_leaf[static_cast<std::size_t>(v)];
    if (p >= 0 && !synthetic) ++report.child_count[p];
  }
  for (auto [u, c] : report.child_count) {
    const double ratio = static_cast<double>(c) / std::max(base[static_cast<std::size_t>(u)], 1);
    report.max_degree_ratio = std::max(report.max_degree_ratio, ratio);
    if (ratio > 1.0) report.degree_violations[u] = ratio;
  }
  return report;
}

std::string to_json(const GstRunReport& r) {
  using nlohmann::json;
  json j;
  j["schema_version"] = 1;
  j["problem"] = "gst";
  j["instance"] = r.instance_name;
  j["seed"] = r.seed;
  j["n"] = r.vertex_count;
  j["L"] = r.scale.L;
  j["gamma"] = r.scale.gamma;
  j["alpha"] = r.alpha;
  j["alpha0"] = r.alpha.empty() ? 0.0 : r.alpha.front();
  j["M"] = r.repetitions;
  j["lp"] = {{"rows", r.lp_rows}, {"columns", r.lp_columns}};
  j["lp_cost"] = r.lp_cost;
  j["modified_cost"] = r.modified_cost;
  j["scaled_cost"] = r.scaled_cost;
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
  j["union_vertices"] = r.union_vertices;
  j["coverage"] = r.group_covered;
  j["z_root"] = r.z_root;
  json counts = json::object(), violations = json::object();
  for (auto [v, c] : r.child_count) counts[std::to_string(v)] = c;
  for (auto [v, ratio] : r.degree_violations) violations[std::to_string(v)] = ratio;
  j["child_count"] = counts;
  j["degree_violations"] = violations;
  j["max_degree_ratio"] = r.max_degree_ratio;
  return j.dump(2) + "\n";
}

GstTrialStats gst_trials(const GroupTreeInstance& inst, const GstPreparedSolution& prep, std::int64_t trials,
                         std::uint64_t seed) {
  require(trials >= 1, ErrorCode::kInvalidArgument, "need at least one trial");
  GstTrialStats st;
  st.trials = trials;
  st.seed = seed;
  st.alpha0 = alpha_sequence(prep.scale.L, prep.scale.gamma).front();
  const auto k = static_cast<std::size_t>(inst.group_count());
  std::vector<std::int32_t> owner(static_cast<std::size_t>(inst.vertex_count), -1);
  for (std::size_t t = 0; t < k; ++t) {
    double z = 0.0;
    for (VertexId o : inst.groups[t]) {
      owner[static_cast<std::size_t>(o)] = static_cast<std::int32_t>(t);
      z += prep.modified[static_cast<std::size_t>(o)];
    }
    st.z_root.push_back(z);
    st.hit_bound.push_back(st.alpha0 * z / 2.0);
  }
  for (VertexId v = 0; v < inst.vertex_count; ++v)
    st.scaled_cost += static_cast<double>(inst.cost[static_cast<std::size_t>(v)]) * prep.scaled[static_cast<std::size_t>(v)];
  const GstRounder rounder(inst, prep.scaled);
  std::vector<std::int64_t> hits(k, 0);
  std::vector<std::uint8_t> hit(k);
  std::int64_t all = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t i = 0; i < trials; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    std::fill(hit.begin(), hit.end(), 0);
    double cost = 0.0;
    for (VertexId v : rounder.sample(rng)) {
      cost += static_cast<double>(inst.cost[static_cast<std::size_t>(v)]);
      if (owner[static_cast<std::size_t>(v)] >= 0) hit[static_cast<std::size_t>(owner[static_cast<std::size_t>(v)])] = 1;
    }
    bool every = true;
    for (std::size_t t = 0; t < k; ++t) {
      hits[t] += hit[t];
      every = every && hit[t];
    }
    all += every ? 1 : 0;
    sum += cost;
    sum_sq += cost * cost;
  }
  const auto t = static_cast<double>(trials);
  for (std::size_t g = 0; g < k; ++g) st.group_hit_rate.push_back(static_cast<double>(hits[g]) / t);
  st.all_covered_rate = static_cast<double>(all) / t;
  st.cost_mean = sum / t;
  st.cost_stddev = trials > 1 ? std::sqrt(std::max(0.0, (sum_sq - t * st.cost_mean * st.cost_mean) / (t - 1))) : 0.0;
  return st;
}

std::string to_json(const GstTrialStats& st) {
  using nlohmann::json;
  json j;
  j["trials"] = st.trials;
  j["seed"] = st.seed;
  j["alpha0"] = st.alpha0;
  json groups = json::array();
  for (std::size_t g = 0; g < st.group_hit_rate.size(); ++g) {
    const double p = st.group_hit_rate[g];
    groups.push_back({{"group", g},
                      {"hit_rate", p},
                      {"stddev", std::sqrt(p * (1.0 - p) / static_cast<double>(st.trials))},
                      {"z_root", st.z_root[g]},
                      {"bound", st.hit_bound[g]}});
  }
  j["groups"] = groups;
  j["all_covered_rate"] = st.all_covered_rate;
  j["cost"] = {{"mean", st.cost_mean}, {"stddev", st.cost_stddev}, {"scaled_cost", st.scaled_cost}};
  return j.dump(2) + "\n";
}

}  // namespace dbnd
