#include <string>

#include "doctest.h"

#include "dbnd/bench.hpp"
#include "dbnd/error.hpp"
#include "dbnd/instances.hpp"
#include "support.hpp"

using namespace dbnd;
using dbnd::testing::make_dst;
using dbnd::testing::make_gst;

namespace {

const char* kSingleEdge =
    "DBDST 1\n"
    "2 1 1\n"
    "root 0\n"
    "vertex 0 1\n"
    "vertex 1 1\n"
    "edge 0 1 5\n"
    "terminal 1\n";

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST_CASE("parse_dst reads the minimal single-edge file") {
  const auto inst = parse_dst(kSingleEdge);
  CHECK(inst.vertex_count == 2);
  REQUIRE(inst.edges.size() == 1);
  CHECK(inst.edges[0].from == 0);
  CHECK(inst.edges[0].to == 1);
  CHECK(inst.edges[0].cost == 5);
  CHECK(inst.root == 0);
  CHECK(inst.terminals == std::vector<VertexId>{1});
}

TEST_CASE("serialize_dst inverts parse_dst up to whitespace") {
  const std::string messy =
      "DBDST   1\n\n2 1 1\n  root 0\nvertex 0 1\nvertex 1   1\nedge 0 1 5\n\nterminal 1\n";
  CHECK(serialize_dst(parse_dst(messy)) == kSingleEdge);
  const auto gen = gen_dst({7, 12, 3, 3, 1, 9, 4});
  CHECK(serialize_dst(parse_dst(serialize_dst(gen))) == serialize_dst(gen));
}

TEST_CASE("parse_dst rejects a terminal id equal to n") {
  std::string bad = kSingleEdge;
  bad.replace(bad.find("terminal 1"), 10, "terminal 2");
  try {
    parse_dst(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("id out of range") != std::string::npos);
  }
}

TEST_CASE("parse errors carry the IO code") {
  CHECK(code_of([] { parse_dst("DBDST 2\n"); }) == ErrorCode::kIo);
  CHECK(code_of([] { parse_dst("DBDST 1\n2 1 1\nroot 0\nvertex 0 1\nvertex 1 1\nedge 0 1 -3\nterminal 1\n"); }) ==
        ErrorCode::kIo);
  CHECK(code_of([] { parse_gst("DBGST 1\n2 1\nroot 0\nvertex 0 -1 0 1\nvertex 1 -1 0 1\ngroup 0 1 1\n"); }) ==
        ErrorCode::kIo);
}

TEST_CASE("normalize binarizes a star with one gadget vertex") {
  // r=0 with out-edges to a=1, b=2, c=3, costs 1, 2, 3; all three are terminals.
  const auto inst = make_dst(4, {{0, 1, 1}, {0, 2, 2}, {0, 3, 3}}, {1, 2, 3}, {3, 1, 1, 1});
  const auto norm = normalize(inst);
  REQUIRE(norm.vertex_count() == 5);
  const VertexId g = 4;
  CHECK(norm.origin[g].kind == OriginKind::kGadget);
  CHECK(norm.origin[g].vertex == 0);
  CHECK(norm.phi[g] == PhiKind::kIdentity);
  CHECK(norm.out_edges(0).size() == 2);
  const auto e_rg = norm.edge_index(0, g);
  REQUIRE(e_rg >= 0);
  CHECK(norm.graph.edges[static_cast<std::size_t>(e_rg)].cost == 0);
  CHECK(norm.source_edge[static_cast<std::size_t>(e_rg)] == -1);
  for (VertexId leaf = 1; leaf <= 3; ++leaf) {
    const VertexId tail = leaf == 3 ? 0 : g;
    const auto e = norm.edge_index(tail, leaf);
    REQUIRE(e >= 0);
    CHECK(norm.graph.edges[static_cast<std::size_t>(e)].cost == leaf);
    CHECK(norm.source_edge[static_cast<std::size_t>(e)] == leaf - 1);
  }
  for (VertexId v = 0; v < norm.vertex_count(); ++v) CHECK(norm.out_edges(v).size() <= 2);
  CHECK(norm.graph.terminals == std::vector<VertexId>{1, 2, 3});
}

TEST_CASE("normalize splits a terminal with an out-edge") {
  // 0 -> 1 -> 2, terminals {1, 2}; 1 has an out-edge.
  const auto inst = make_dst(3, {{0, 1, 4}, {1, 2, 6}}, {1, 2}, {1, 1, 1});
  const auto norm = normalize(inst);
  REQUIRE(norm.vertex_count() == 4);
  const VertexId copy = 3;
  CHECK(norm.origin[copy].kind == OriginKind::kTerminalCopy);
  CHECK(norm.origin[copy].vertex == 1);
  CHECK(norm.degree_bound(copy) == 0);
  CHECK(norm.degree_bound(1) == 2);
  CHECK(norm.edge_index(1, copy) >= 0);
  CHECK(norm.graph.terminals == std::vector<VertexId>{2, copy});
  CHECK(norm.is_terminal(copy));
  CHECK_FALSE(norm.is_terminal(1));
}

TEST_CASE("normalize leaves binary instances with sink terminals unchanged") {
  const auto inst = make_dst(4, {{0, 1, 1}, {0, 2, 2}, {1, 3, 3}}, {2, 3}, {2, 1, 1, 1});
  const auto norm = normalize(inst);
  CHECK(norm.vertex_count() == 4);
  CHECK(norm.graph.edges.size() == 3);
  CHECK(norm.graph.terminals == inst.terminals);
  CHECK(norm.graph.degree_bound == inst.degree_bound);
  for (std::size_t i = 0; i < 3; ++i) CHECK(norm.source_edge[i] >= 0);
}

TEST_CASE("original_degree follows the phi transform") {
  // Star of three terminals: root 0 -> gadget 4 -> {1, 2}, root 0 -> 3.
  const auto norm = normalize(make_dst(4, {{0, 1, 1}, {0, 2, 2}, {0, 3, 3}}, {1, 2, 3}, {3, 1, 1, 1}));
  SUBCASE("single leaf") {
    MultiTree t{{1}, {-1}, 0};
    CHECK(original_degree(t, norm) == std::vector<std::int32_t>{0});
  }
  SUBCASE("gadget passes its degree through") {
    // nodes: 0:root(0) 1:gadget(4) 2:leaf(1) 3:leaf(2)
    MultiTree t{{0, 4, 1, 2}, {-1, 0, 1, 1}, 0};
    const auto rho = original_degree(t, norm);
    CHECK(rho[1] == 2);
    CHECK(rho[0] == 2);
    CHECK(rho[2] == 0);
  }
  SUBCASE("original children count one each") {
    MultiTree t{{0, 4, 1, 2, 3}, {-1, 0, 1, 1, 0}, 0};
    CHECK(original_degree(t, norm)[0] == 3);
  }
}

TEST_CASE("preprocess_gst") {
  SUBCASE("leaf in one group is a fixed point") {
    const auto inst = make_gst({-1, 0, 0}, {0, 3, 5}, {2, 1, 1}, {{1}, {2}});
    const auto out = preprocess_gst(inst);
    CHECK(out.vertex_count == 3);
    CHECK(out.groups == inst.groups);
    CHECK(out.degree_bound == inst.degree_bound);
  }
  SUBCASE("internal member moves to a synthetic leaf") {
    const auto inst = make_gst({-1, 0, 1}, {0, 2, 4}, {1, 1, 1}, {{}, {}, {}, {1}});
    const auto out = preprocess_gst(inst);
    REQUIRE(out.vertex_count == 4);
    CHECK(out.parent[3] == 1);
    CHECK(out.cost[3] == 0);
    CHECK(out.synthetic_leaf[3] == 1);
    CHECK(out.groups[3] == std::vector<VertexId>{3});
    CHECK(out.degree_bound[1] == 2);
    CHECK(out.base_degree_bounds()[1] == 1);
  }
  SUBCASE("leaf in two groups gets two synthetic leaves") {
    const auto inst = make_gst({-1, 0}, {0, 7}, {1, 1}, {{1}, {1}});
    const auto out = preprocess_gst(inst);
    REQUIRE(out.vertex_count == 4);
    CHECK(out.groups[0] == std::vector<VertexId>{2});
    CHECK(out.groups[1] == std::vector<VertexId>{3});
    CHECK(out.degree_bound[1] == 3);
    out.validate(true);
  }
  SUBCASE("edge costs move onto the child vertex") {
    const auto inst = make_gst({-1, 0, 1}, {1, 2, 3}, {1, 1, 1}, {{2}});
    const auto out = preprocess_gst(inst, {100, 10, 20});
    CHECK(out.cost == std::vector<Cost>{1, 12, 23});
  }
}

TEST_CASE("gst serialization round-trips") {
  const auto inst = gen_gst({40, 4, 5, 3, 1, 9, 11});
  CHECK(serialize_gst(parse_gst(serialize_gst(inst))) == serialize_gst(inst));
}

TEST_CASE("validate rejects broken instances") {
  DirectedInstance inst = make_dst(2, {{0, 1, 5}}, {1}, {1, 1});
  inst.terminals = {0};
  CHECK(code_of([&] { inst.validate(); }) == ErrorCode::kInvalidArgument);
  GroupTreeInstance g = make_gst({-1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {{2}});
  g.groups = {{1}};
  CHECK(code_of([&] { g.validate(true); }) == ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(g.validate(false));
}
