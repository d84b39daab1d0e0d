#pragma once

// LP relaxations of both problems and the power-of-two modification of GST
// solutions.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbnd/instances.hpp"
#include "dbnd/lp.hpp"
#include "dbnd/states.hpp"

namespace dbnd {

enum class LpForm : std::uint8_t {
  kFull,     // one variable per node, every constraint family written out
  kReduced,  // same optimum, implied rows dropped and equal variables merged
};

struct DstLp {
  LPModel model;
  std::vector<std::int32_t> node_var;  // per super-tree node
  // O_t per terminal, aligned with inst.graph.terminals.
  std::vector<std::vector<std::int32_t>> terminal_nodes;
  bool infeasible = false;
  std::string infeasible_reason;

  // x value of every super-tree node.
  std::vector<double> node_values(std::span<const double> x) const;
};

DstLp build_dst_lp(const SuperTree& tree, const NormalizedInstance& inst, LpForm form = LpForm::kReduced);

struct GstLp {
  LPModel model;
  std::vector<std::int32_t> vertex_var;  // -1 for vertices fixed at zero by the presolve
  bool infeasible = false;
  std::string infeasible_reason;

  std::vector<double> vertex_values(std::span<const double> x) const;
};

// kReduced fixes vertices without a group member below them at zero and keeps
// only the non-implied subtree and degree rows.
GstLp build_gst_lp(const GroupTreeInstance& inst, LpForm form = LpForm::kReduced);

// Zeroes values below 1/(2n) and rounds the rest up to powers of two. Values
// within a relative 1e-9 of a power of two snap to it.
std::vector<double> modify_gst_solution(const GroupTreeInstance& inst, std::span<const double> x);

// Names of the violated properties P1..P6 (empty when all hold). x is the LP
// solution the modification started from.
std::vector<std::string> check_modified_solution(const GroupTreeInstance& inst, std::span<const double> x,
                                                 std::span<const double> modified, double tol = 1e-9);

}  // namespace dbnd
