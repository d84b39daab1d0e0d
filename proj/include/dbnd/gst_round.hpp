#pragma once

// Hop levels, capped scaling, and repeated recursive rounding for group
// Steiner trees on trees.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dbnd/instances.hpp"
#include "dbnd/lp_models.hpp"
#include "dbnd/rng.hpp"

namespace dbnd {

struct GstScaleParameters {
  std::int32_t L = 0;      // ceil(log2(2n))
  std::int32_t gamma = 0;  // max(floor(log2 L) - 2, 0)
};

GstScaleParameters gst_scale_parameters(std::int32_t vertex_count);

// l_v = number of strict decreases of xt along the root path of v. Vertices
// with xt = 0 keep their parent's level.
std::vector<std::int32_t> compute_hop_levels(const GroupTreeInstance& inst, std::span<const double> xt);

// x'_u = 2^min(l_u, gamma) * xt_u.
std::vector<double> scale_solution(std::span<const double> xt, std::span<const std::int32_t> levels,
                                   std::int32_t gamma);

// Edges (parent, child) where the child's scaled value exceeds the parent's.
std::vector<std::pair<VertexId, VertexId>> monotonicity_violations(const GroupTreeInstance& inst,
                                                                   std::span<const double> scaled);

// Vertices u with sum over children of x'_v / x'_u above 4 d_u.
std::vector<VertexId> branching_violations(const GroupTreeInstance& inst, std::span<const double> scaled,
                                           double tol = 1e-9);

// Independent top-down rounding: each child v of a selected u joins with
// probability x'_v / x'_u. Construction throws Error(kInvariantViolation) if
// some ratio exceeds 1 or the root value is not 1.
class GstRounder {
 public:
  GstRounder(const GroupTreeInstance& inst, std::span<const double> scaled, double tol = 1e-9);

  // Selected vertices in increasing order; always contains the root.
  std::vector<VertexId> sample(Rng& rng) const;

 private:
  VertexId root_ = 0;
  std::vector<std::int32_t> offset_;
  std::vector<VertexId> child_;
  std::vector<double> probability_;
};

std::vector<VertexId> recursive_round(const GroupTreeInstance& inst, std::span<const double> scaled, Rng& rng);

// alpha[l] for l = 0..gamma: alpha_gamma = 1/(2L), alpha_l = 2 alpha_{l+1} - 4 alpha_{l+1}^2.
std::vector<double> alpha_sequence(std::int32_t L, std::int32_t gamma);

// ceil(ln(10 k) / -ln(1 - alpha0 / 2)), at least 1.
std::int32_t default_gst_repetitions(double alpha0, std::int32_t group_count);

struct GstRunParams {
  std::int32_t repetitions = 0;  // 0: default_gst_repetitions
  std::uint64_t seed = 0;
  LpForm form = LpForm::kReduced;
  // Check P1..P6, monotonicity and branching mass; violations throw.
  bool check = true;
  // Negative: gamma from gst_scale_parameters; otherwise gamma is at most this.
  std::int32_t gamma_cap = -1;
  std::string instance_name;
};

struct GstRunReport {
  std::string instance_name;
  std::uint64_t seed = 0;
  std::int32_t vertex_count = 0;
  GstScaleParameters scale;
  std::vector<double> alpha;
  std::int32_t repetitions = 0;
  std::int32_t lp_rows = 0;
  std::int32_t lp_columns = 0;
  double lp_cost = 0.0;
  double modified_cost = 0.0;
  double scaled_cost = 0.0;  // sum of c_u x'_u, the expected cost of one repetition
  std::vector<Cost> repetition_costs;
  std::vector<std::vector<VertexId>> repetition_vertices;
  std::vector<VertexId> union_vertices;
  Cost union_cost = 0;
  std::vector<std::uint8_t> group_covered;
  std::vector<double> z_root;  // sum of xt over each group
  std::map<VertexId, std::int32_t> child_count;   // distinct non-synthetic children in the union
  std::map<VertexId, double> degree_violations;   // child_count / d_u where above 1
  double max_degree_ratio = 0.0;
};

// Solves the LP, modifies and scales the solution, and unions `repetitions`
// independent roundings. Throws Error(kInfeasible) if some group is empty.
GstRunReport run_gst(const GroupTreeInstance& inst, const GstRunParams& params);

std::string to_json(const GstRunReport& report);

// Output of the LP stages of run_gst, exposed for statistics.
struct GstPreparedSolution {
  std::vector<double> x;         // LP values per vertex
  std::vector<double> modified;  // xt
  std::vector<std::int32_t> levels;
  std::vector<double> scaled;    // x'
  GstScaleParameters scale;
  double lp_cost = 0.0;
  std::int32_t lp_rows = 0;
  std::int32_t lp_columns = 0;
};

GstPreparedSolution prepare_gst(const GroupTreeInstance& inst, LpForm form = LpForm::kReduced, bool check = true,
                                std::int32_t gamma_cap = -1);

// The stages after the LP solve, applied to a given feasible point x (one
// value per vertex). lp_cost is the cost of x.
GstPreparedSolution prepare_gst_point(const GroupTreeInstance& inst, std::span<const double> x, bool check = true,
                                      std::int32_t gamma_cap = -1);

struct GstTrialStats {
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  double alpha0 = 0.0;
  std::vector<double> group_hit_rate;
  std::vector<double> z_root;     // sum of xt over the group
  std::vector<double> hit_bound;  // alpha0 * z_root / 2
  double all_covered_rate = 0.0;
  double cost_mean = 0.0;
  double cost_stddev = 0.0;
  double scaled_cost = 0.0;  // sum of c_u x'_u
};

// Single roundings with streams (seed, 0..trials-1).
GstTrialStats gst_trials(const GroupTreeInstance& inst, const GstPreparedSolution& prep, std::int64_t trials,
                         std::uint64_t seed);

std::string to_json(const GstTrialStats& stats);

}  // namespace dbnd
