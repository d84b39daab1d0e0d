#pragma once

// Randomized rounding of the super-tree LP and the repeated-rounding DB-DST
// pipeline.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dbnd/instances.hpp"
#include "dbnd/lp_models.hpp"
#include "dbnd/rng.hpp"
#include "dbnd/states.hpp"

namespace dbnd {

inline constexpr double kProbabilityTolerance = 1e-6;

// Top-down sampler over a super-tree with fixed node values. Construction
// checks that the super node has value 1 and that the positive child values of
// every state or super node sum to the node's value; it throws
// Error(kInvariantViolation) otherwise.
class DstRounder {
 public:
  DstRounder(const SuperTree& tree, std::span<const double> node_x, double tolerance = kProbabilityTolerance);

  // Selected node ids in increasing order.
  std::vector<std::int32_t> sample(Rng& rng) const;

 private:
  const SuperTree* tree_;
  // Per state or super node: candidate children and cumulative probabilities.
  std::vector<std::int32_t> offset_;
  std::vector<std::int32_t> choice_;
  std::vector<double> cumulative_;
};

struct RoundingOutcome {
  std::vector<std::int32_t> selected;  // super-tree nodes, increasing
  StateTree state_tree;
  MultiTree multi_tree;
  Cost cost = 0;
  // Copies of each input vertex in the multi-tree, indexed by input vertex id.
  std::vector<std::int32_t> copies;
};

// Converts a selection into its state tree and multi-tree. Throws
// Error(kInvariantViolation) when the state tree or the multi-tree is not
// good.
RoundingOutcome make_outcome(const SuperTree& tree, const NormalizedInstance& inst, std::vector<std::int32_t> selected);

RoundingOutcome round_super_tree(const SuperTree& tree, const NormalizedInstance& inst, std::span<const double> node_x,
                                 Rng& rng);

// Copies of each input vertex in a selection (edge heads of selected base
// nodes, plus one for the root).
std::vector<std::int32_t> copy_counts(const SuperTree& tree, const NormalizedInstance& inst,
                                      std::span<const std::int32_t> selected);

struct MgfStats {
  double s = 0.0;
  std::int64_t trials = 0;
  std::vector<double> mean;    // empirical E[exp(s * m_v)] per input vertex
  std::vector<double> stddev;  // sample standard deviation of exp(s * m_v)
  std::vector<std::int32_t> max_copies;
};

// s = ln(1 + 1 / (2 h')).
double mgf_parameter(std::int32_t root_level);

MgfStats concentration_stats(std::span<const std::vector<std::int32_t>> copies, double s);

// ceil((h + 1) * ln(10 k)), at least 1.
std::int32_t default_repetitions(std::int32_t height, std::int32_t terminal_count);

struct DstRunParams {
  std::int32_t height = -1;  // negative: default_height of the normalized vertex count
  std::int32_t repetitions = 0;  // 0: default_repetitions
  std::uint64_t seed = 0;
  std::int64_t node_cap = 5'000'000;
  LpForm form = LpForm::kReduced;
  // Convert and check every sampled selection (state tree, goodness).
  bool check = true;
  std::string instance_name;
};

struct DstRunReport {
  std::string instance_name;
  std::uint64_t seed = 0;
  std::int32_t height = 0;
  std::int32_t root_level = 0;
  std::int32_t repetitions = 0;
  std::int64_t super_tree_nodes = 0;
  std::int32_t lp_rows = 0;
  std::int32_t lp_columns = 0;
  double lp_cost = 0.0;
  std::vector<Cost> repetition_costs;
  Cost union_cost = 0;
  Cost tree_cost = 0;
  std::vector<std::pair<VertexId, VertexId>> tree_edges;  // input edges, sorted
  std::int32_t terminals_covered = 0;
  std::int32_t terminal_count = 0;
  std::map<VertexId, std::int32_t> out_degree;      // vertices with children in the tree
  std::map<VertexId, double> degree_violations;     // out-degree / d_v where above 1
  MgfStats mgf;
};

// Super-tree, LP and LP solution of an instance with at least one terminal.
struct DstPrepared {
  NormalizedInstance norm;
  std::int32_t height = 0;
  SuperTree tree;
  DstLp lp;
  LPSolution solution;
  std::vector<double> node_x;  // LP value of every super-tree node
};

// Throws Error(kInfeasible) when the LP is infeasible, Error(kCapExceeded)
// when the super-tree is too large, and Error(kInvariantViolation) when the
// solver's answer violates a row by more than 1e-9.
DstPrepared prepare_dst(const DirectedInstance& inst, std::int32_t height, std::int64_t node_cap,
                        LpForm form = LpForm::kReduced);

struct DstTrialStats {
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<VertexId> terminals;     // input terminal ids
  std::vector<double> terminal_hit_rate;
  double coverage_bound = 0.0;         // 1 / (h + 1)
  double all_covered_rate = 0.0;
  double cost_mean = 0.0;
  double cost_stddev = 0.0;
  double lp_cost = 0.0;
  MgfStats mgf;
  double mgf_bound = 0.0;              // 1 + 2 / h'
};

// Single roundings with streams (seed, 0..trials-1). With check set every
// sample is converted and checked as in make_outcome.
DstTrialStats dst_trials(const DstPrepared& prep, std::int64_t trials, std::uint64_t seed, bool check);

// Builds the super-tree, solves the LP, rounds it repetitions times, and
// extracts a tree from the union. Throws Error(kInfeasible) when the LP is
// infeasible and Error(kCapExceeded) when the super-tree is too large.
DstRunReport run_dst(const DirectedInstance& inst, const DstRunParams& params);

// Steiner arborescence inside a set of input edges: breadth-first parents from
// the root, then only vertices on root-terminal paths are kept.
std::vector<std::pair<VertexId, VertexId>> extract_tree(const DirectedInstance& inst,
                                                        std::span<const std::int32_t> edge_indices);

// Depth of the state tree of an out-arborescence (input edges), the smallest
// height whose super-tree contains it.
std::int32_t state_tree_depth(const DirectedInstance& inst, std::span<const std::pair<VertexId, VertexId>> edges);

std::string to_json(const DstRunReport& report);
std::string to_json(const DstTrialStats& stats);

}  // namespace dbnd
