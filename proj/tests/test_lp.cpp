#include <cmath>
#include <vector>

#include "doctest.h"

#include "dbnd/bench.hpp"
#include "dbnd/error.hpp"
#include "dbnd/lp.hpp"
#include "dbnd/lp_models.hpp"
#include "dbnd/oracle.hpp"
#include "dbnd/states.hpp"
#include "support.hpp"

using namespace dbnd;
using dbnd::testing::make_dst;
using dbnd::testing::make_gst;

TEST_CASE("simplex on forced and empty polytopes") {
  LPModel forced;
  const auto x = forced.add_variable(1.0, 0.0, 1.0, "x");
  forced.add_row({{x, 1.0}}, Relation::kGreaterEqual, 1.0);
  const auto s = solve_lp(forced);
  REQUIRE(s.status == LPStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(1.0));

  LPModel empty;
  const auto y = empty.add_variable(0.0, 0.0, 1.0, "x");
  empty.add_row({{y, 1.0}}, Relation::kGreaterEqual, 2.0);
  CHECK(solve_lp(empty).status == LPStatus::kInfeasible);
}

TEST_CASE("simplex on a small textbook LP") {
  // max 3a + 5b s.t. a <= 4, 2b <= 12, 3a + 2b <= 18 -> (2, 6), value 36.
  LPModel m;
  const auto a = m.add_variable(-3.0, 0.0, 100.0);
  const auto b = m.add_variable(-5.0, 0.0, 100.0);
  m.add_row({{a, 1.0}}, Relation::kLessEqual, 4.0);
  m.add_row({{b, 2.0}}, Relation::kLessEqual, 12.0);
  m.add_row({{a, 3.0}, {b, 2.0}}, Relation::kLessEqual, 18.0);
  const auto s = solve_lp(m);
  REQUIRE(s.status == LPStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(-36.0));
  CHECK(s.x[0] == doctest::Approx(2.0));
  CHECK(s.x[1] == doctest::Approx(6.0));
  CHECK(max_violation(m, s.x).amount <= 1e-9);
}

TEST_CASE("simplex detects unboundedness and validates models") {
  LPModel m;
  const auto a = m.add_variable(-1.0, 0.0, kInfinity);
  m.add_row({{a, 1.0}}, Relation::kGreaterEqual, 1.0);
  CHECK(solve_lp(m).status == LPStatus::kUnbounded);

  LPModel bad;
  bad.add_variable(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("MPS dump lists every row and column") {
  LPModel m;
  const auto a = m.add_variable(1.0, 0.0, 1.0, "a");
  const auto b = m.add_variable(2.0, 0.0, 1.0, "b");
  m.add_row({{a, 1.0}, {b, 1.0}}, Relation::kEqual, 1.0, "cover");
  const auto text = dump_mps(m, "T");
  CHECK(text.find("NAME") != std::string::npos);
  CHECK(text.find("cover") != std::string::npos);
  CHECK(text.find("ENDATA") != std::string::npos);
}

TEST_CASE("DST LP on the single-edge instance") {
  const auto norm = normalize(make_dst(2, {{0, 1, 6}}, {1}, {1, 1}));
  const auto tree = build_super_tree(norm, {2, 1000, true});
  const auto lp = build_dst_lp(tree, norm, LpForm::kFull);
  CHECK(lp.model.variable_count() == 3);
  const auto s = solve_lp(lp.model);
  REQUIRE(s.status == LPStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(6.0));
  for (double x : lp.node_values(s.x)) CHECK(x == doctest::Approx(1.0));
}

TEST_CASE("DST LP forces the super node to 1") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto norm = normalize(gen_dst({5, 7, 2, 2, 1, 9, seed}));
    const auto tree = build_super_tree(norm, {3, 200'000, true});
    for (auto form : {LpForm::kFull, LpForm::kReduced}) {
      const auto lp = build_dst_lp(tree, norm, form);
      if (lp.infeasible) continue;
      // Minimizing and maximizing x_r both give 1.
      for (double sign : {1.0, -1.0}) {
        LPModel m = lp.model;
        std::fill(m.objective.begin(), m.objective.end(), 0.0);
        m.objective[static_cast<std::size_t>(lp.node_var[0])] = sign;
        const auto s = solve_lp(m);
        if (s.status != LPStatus::kOptimal) continue;
        CHECK(lp.node_values(s.x)[0] == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("DST LP flags an unreachable terminal") {
  // Terminal 2 has no in-edge.
  DirectedInstance inst;
  inst.vertex_count = 3;
  inst.edges = {{0, 1, 1}};
  inst.terminals = {1, 2};
  inst.degree_bound = {1, 1, 1};
  const auto norm = normalize(inst);
  const auto tree = build_super_tree(norm, {2, 1000, true});
  const auto lp = build_dst_lp(tree, norm);
  CHECK(lp.infeasible);
  CHECK_FALSE(lp.infeasible_reason.empty());
}

TEST_CASE("reduced and full DST LPs agree and lie below the oracle") {
  int bounded = 0;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = gen_dst({6, 9, 2, 2, 1, 9, seed});
    const auto ex = exact_dst(inst);
    if (ex.status != ExactStatus::kOptimal) continue;
    const auto norm = normalize(inst);
    const auto h = gen_state_tree(lift_tree(norm, ex.edges), norm, -1).depth();
    const auto tree = build_super_tree(norm, {h, 500'000, true});
    const auto reduced = solve_lp(build_dst_lp(tree, norm, LpForm::kReduced).model);
    REQUIRE(reduced.status == LPStatus::kOptimal);
    CHECK(reduced.objective <= static_cast<double>(ex.cost) + 1e-6);
    ++bounded;
    // The full form has one column per node; keep its solves small.
    if (tree.size() > 2000) continue;
    const auto full = solve_lp(build_dst_lp(tree, norm, LpForm::kFull).model);
    REQUIRE(full.status == LPStatus::kOptimal);
    CHECK(full.objective == doctest::Approx(reduced.objective).epsilon(1e-9));
    ++compared;
  }
  CHECK(bounded >= 20);
  CHECK(compared >= 10);
}

TEST_CASE("GST LP hand examples") {
  SUBCASE("two leaves in one group, the cheap one wins") {
    const auto inst = make_gst({-1, 0, 0}, {0, 3, 5}, {1, 1, 1}, {{1, 2}});
    for (auto form : {LpForm::kFull, LpForm::kReduced}) {
      const auto s = solve_lp(build_gst_lp(inst, form).model);
      REQUIRE(s.status == LPStatus::kOptimal);
      CHECK(s.objective == doctest::Approx(3.0));
    }
  }
  SUBCASE("single path is forced") {
    const auto inst = make_gst({-1, 0, 1}, {2, 3, 4}, {1, 1, 1}, {{2}});
    for (auto form : {LpForm::kFull, LpForm::kReduced}) {
      const auto lp = build_gst_lp(inst, form);
      const auto s = solve_lp(lp.model);
      REQUIRE(s.status == LPStatus::kOptimal);
      CHECK(s.objective == doctest::Approx(9.0));
      for (double x : lp.vertex_values(s.x)) CHECK(x == doctest::Approx(1.0));
    }
  }
  SUBCASE("disjoint leaf groups under the root") {
    // Groups {1,2}, {3,4}, {5}; cheapest leaves 2, 1, 6.
    const auto inst = make_gst({-1, 0, 0, 0, 0, 0}, {0, 4, 2, 1, 7, 6}, {3, 1, 1, 1, 1, 1}, {{1, 2}, {3, 4}, {5}});
    const auto s = solve_lp(build_gst_lp(inst).model);
    REQUIRE(s.status == LPStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(9.0));
    CHECK(exact_gst(inst).cost == 9);
  }
  SUBCASE("empty group") {
    const auto inst = make_gst({-1, 0}, {0, 1}, {1, 1}, {{1}, {}});
    CHECK(build_gst_lp(inst).infeasible);
  }
}

TEST_CASE("reduced and full GST LPs agree and lie below the oracle") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto inst = gen_gst({30, 4, 5, 2, 1, 9, seed});
    const auto full = solve_lp(build_gst_lp(inst, LpForm::kFull).model);
    const auto reduced = solve_lp(build_gst_lp(inst, LpForm::kReduced).model);
    REQUIRE(full.status == LPStatus::kOptimal);
    REQUIRE(reduced.status == LPStatus::kOptimal);
    CHECK(full.objective == doctest::Approx(reduced.objective).epsilon(1e-9));
    const auto ex = exact_gst(inst);
    REQUIRE(ex.status == ExactStatus::kOptimal);
    CHECK(full.objective <= static_cast<double>(ex.cost) * (1 + 1e-6) + 1e-9);
  }
}

TEST_CASE("modify_gst_solution rounds to powers of two") {
  // Path root -> 1 -> 2 with n = 3, threshold 1/6.
  const auto inst = make_gst({-1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {{2}});
  const auto out = modify_gst_solution(inst, std::vector<double>{1.0, 0.3, 0.5});
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.5);
  CHECK(out[2] == 0.5);
  const double quarter_n = 1.0 / (4 * 3);
  CHECK(modify_gst_solution(inst, std::vector<double>{1.0, 1.0, quarter_n})[2] == 0.0);
  CHECK(modify_gst_solution(inst, std::vector<double>{1.0, 1.0, 0.25 * (1 + 1e-12)})[2] == 0.25);
  CHECK(modify_gst_solution(inst, std::vector<double>{1.0, 1.0, 0.26})[2] == 0.5);
}

TEST_CASE("modified LP solutions satisfy P1 to P6") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = gen_gst({40, 4, 5, 2, 1, 9, seed});
    const auto lp = build_gst_lp(inst);
    const auto x = lp.vertex_values(dbnd::testing::fractional_point(lp.model, 6, seed));
    const auto xt = modify_gst_solution(inst, x);
    const auto bad = check_modified_solution(inst, x, xt);
    CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
  }
}
