#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"

#include "dbnd/bench.hpp"
#include "dbnd/error.hpp"
#include "dbnd/instances.hpp"
#include "support.hpp"

using namespace dbnd;
using dbnd::testing::make_dst;
using dbnd::testing::make_gst;

namespace {

bool all_reachable(const DirectedInstance& inst) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(inst.vertex_count), 0);
  std::vector<VertexId> stack{inst.root};
  seen[static_cast<std::size_t>(inst.root)] = 1;
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    for (const Edge& e : inst.edges)
      if (e.from == u && !seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = 1;
        stack.push_back(e.to);
      }
  }
  return std::all_of(inst.terminals.begin(), inst.terminals.end(),
                     [&](VertexId t) { return seen[static_cast<std::size_t>(t)] != 0; });
}

}  // namespace

TEST_CASE("gen_dst forced shape and determinism") {
  const auto inst = gen_dst({2, 1, 1, 1, 5, 5, 9});
  REQUIRE(inst.edges.size() == 1);
  CHECK(inst.edges[0].from == 0);
  CHECK(inst.edges[0].to == 1);
  CHECK(inst.edges[0].cost == 5);
  CHECK(inst.terminals == std::vector<VertexId>{1});
  CHECK(serialize_dst(gen_dst({9, 17, 3, 3, 1, 9, 42})) == serialize_dst(gen_dst({9, 17, 3, 3, 1, 9, 42})));
  CHECK(serialize_dst(gen_dst({9, 17, 3, 3, 1, 9, 42})) != serialize_dst(gen_dst({9, 17, 3, 3, 1, 9, 43})));
}

TEST_CASE("gen_dst validator sweep") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = gen_dst({10, 20, 4, 3, 1, 9, seed});
    CHECK_NOTHROW(parse_dst(serialize_dst(inst)));
    CHECK(all_reachable(inst));
    CHECK(inst.edges.size() == 20);
    for (auto d : inst.degree_bound) CHECK((d >= 1 && d <= 3));
  }
  CHECK_THROWS_AS(gen_dst({3, 1, 1, 2, 1, 9, 0}), Error);
  CHECK_THROWS_AS(gen_dst({3, 7, 1, 2, 1, 9, 0}), Error);
}

TEST_CASE("gen_gst forced shape, determinism, disjoint leaf groups") {
  const auto p = gen_gst({3, 1, 2, 1, 1, 9, 5});
  CHECK(p.parent == std::vector<VertexId>{-1, 0, 1});
  CHECK(p.groups == std::vector<std::vector<VertexId>>{{2}});
  CHECK(serialize_gst(gen_gst({50, 4, 5, 3, 1, 9, 8})) == serialize_gst(gen_gst({50, 4, 5, 3, 1, 9, 8})));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = gen_gst({60, 5, 6, 3, 1, 9, seed});
    CHECK_NOTHROW(inst.validate(true));
    const auto ch = inst.children();
    std::set<VertexId> seen;
    for (const auto& g : inst.groups) {
      CHECK_FALSE(g.empty());
      for (VertexId v : g) {
        CHECK(ch[static_cast<std::size_t>(v)].empty());
        CHECK(seen.insert(v).second);
      }
    }
  }
}

TEST_CASE("gen_broom shape") {
  const auto b = gen_broom({3, 100, 4, 5, 0, 1, 9, 1});
  CHECK(b.vertex_count == 1 + 3 + 1 + 100);
  CHECK(b.group_count() == 4);
  CHECK(b.degree_bound[4] == 4);
  for (const auto& g : b.groups) CHECK(g.size() == 5);
  CHECK_NOTHROW(b.validate(true));
}

TEST_CASE("verify_dst_tree") {
  const auto inst = make_dst(4, {{0, 1, 1}, {0, 2, 2}, {1, 3, 3}, {2, 3, 4}}, {3}, {1, 1, 1, 1});
  SUBCASE("valid path") {
    const std::vector<std::pair<VertexId, VertexId>> t{{0, 1}, {1, 3}};
    const auto r = verify_dst_tree(inst, t);
    CHECK(r.ok());
    CHECK(r.cost == 4);
    CHECK(r.covered == std::vector<std::int32_t>{3});
  }
  SUBCASE("degree excess is reported, not rejected") {
    const std::vector<std::pair<VertexId, VertexId>> t{{0, 1}, {0, 2}, {1, 3}};
    const auto r = verify_dst_tree(inst, t);
    CHECK(r.ok());
    CHECK(r.degree_ratio.at(0) == 2.0);
  }
  SUBCASE("structural defects") {
    CHECK_FALSE(verify_dst_tree(inst, std::vector<std::pair<VertexId, VertexId>>{{0, 1}, {1, 3}, {2, 3}}).ok());
    CHECK_FALSE(verify_dst_tree(inst, std::vector<std::pair<VertexId, VertexId>>{{0, 3}}).ok());
    CHECK_FALSE(verify_dst_tree(inst, std::vector<std::pair<VertexId, VertexId>>{{1, 3}}).ok());
  }
}

TEST_CASE("verify_gst_tree") {
  const auto inst = make_gst({-1, 0, 0, 1}, {1, 2, 3, 4}, {1, 1, 1, 1}, {{3}, {2}});
  CHECK(verify_gst_tree(inst, std::vector<VertexId>{0, 1, 3}).ok());
  CHECK(verify_gst_tree(inst, std::vector<VertexId>{0, 1, 3}).cost == 7);
  const auto both = verify_gst_tree(inst, std::vector<VertexId>{0, 1, 2, 3});
  CHECK(both.ok());
  CHECK(both.degree_ratio.at(0) == 2.0);
  CHECK_FALSE(verify_gst_tree(inst, std::vector<VertexId>{0, 3}).ok());
  CHECK_FALSE(verify_gst_tree(inst, std::vector<VertexId>{1, 3}).ok());
}
