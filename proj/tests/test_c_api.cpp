#include <cstring>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "dbnd/dbnd.h"

using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  dbnd_string_free(s);
  return out;
}

const char* kSingleEdge =
    "DBDST 1\n2 1 1\nroot 0\nvertex 0 1\nvertex 1 1\nedge 0 1 7\nterminal 1\n";

const char* kPathGst =
    "DBGST 1\n3 1\nroot 0\nvertex 0 -1 1 1\nvertex 1 0 2 1\nvertex 2 1 3 1\ngroup 0 1 2\n";

}  // namespace

TEST_CASE("C API parse, serialize and free") {
  dbnd_dst* d = nullptr;
  REQUIRE(dbnd_dst_parse(kSingleEdge, &d) == DBND_OK);
  CHECK(dbnd_dst_vertex_count(d) == 2);
  CHECK(dbnd_dst_terminal_count(d) == 1);
  char* text = nullptr;
  REQUIRE(dbnd_dst_serialize(d, &text) == DBND_OK);
  CHECK(take(text) == kSingleEdge);
  dbnd_dst_free(d);

  dbnd_gst* g = nullptr;
  REQUIRE(dbnd_gst_parse(kPathGst, &g) == DBND_OK);
  CHECK(dbnd_gst_vertex_count(g) == 3);
  CHECK(dbnd_gst_group_count(g) == 1);
  dbnd_gst_free(g);
  dbnd_dst_free(nullptr);
  dbnd_gst_free(nullptr);
}

TEST_CASE("C API error codes and messages") {
  dbnd_dst* d = nullptr;
  CHECK(dbnd_dst_parse("DBDST 9\n", &d) == DBND_IO);
  CHECK(d == nullptr);
  CHECK(std::strlen(dbnd_last_error()) > 0);
  CHECK(dbnd_dst_load("/nonexistent/file.dst", &d) == DBND_IO);
  CHECK(dbnd_dst_parse(nullptr, &d) == DBND_INVALID_ARGUMENT);
  CHECK(dbnd_dst_generate(3, 1, 5, 2, 1, 9, 0, &d) == DBND_INVALID_ARGUMENT);
  char* out = nullptr;
  CHECK(dbnd_dst_run(nullptr, nullptr, &out) == DBND_INVALID_ARGUMENT);

  REQUIRE(dbnd_dst_generate(8, 14, 3, 2, 1, 9, 1, &d) == DBND_OK);
  dbnd_dst_options o;
  dbnd_dst_options_init(&o);
  o.height = 6;
  o.node_cap = 1000;
  CHECK(dbnd_dst_run(d, &o, &out) == DBND_CAP_EXCEEDED);
  dbnd_dst_free(d);

  dbnd_gst* g = nullptr;
  REQUIRE(dbnd_gst_parse("DBGST 1\n2 2\nroot 0\nvertex 0 -1 0 1\nvertex 1 0 1 1\ngroup 0 1 1\ngroup 1 0\n", &g) ==
          DBND_OK);
  CHECK(dbnd_gst_run(g, nullptr, &out) == DBND_INFEASIBLE);
  dbnd_gst_free(g);
}

TEST_CASE("C API DST pipeline, oracle, statistics and verify") {
  dbnd_dst* d = nullptr;
  REQUIRE(dbnd_dst_parse(kSingleEdge, &d) == DBND_OK);
  dbnd_dst_options o;
  dbnd_dst_options_init(&o);
  o.height = 2;
  o.seed = 5;
  char* out = nullptr;
  REQUIRE(dbnd_dst_run(d, &o, &out) == DBND_OK);
  const std::string report = take(out);
  const auto r = json::parse(report);
  CHECK(r.at("tree_cost") == 7);
  CHECK(r.at("lp_cost").get<double>() == doctest::Approx(7.0));

  REQUIRE(dbnd_dst_verify(d, report.c_str(), 1, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("ok") == true);

  REQUIRE(dbnd_dst_oracle(d, &out) == DBND_OK);
  const auto oracle = json::parse(take(out));
  CHECK(oracle.at("status") == "optimal");
  CHECK(oracle.at("cost") == 7);
  CHECK(oracle.at("state_tree_depth") == 0);

  REQUIRE(dbnd_dst_trials(d, &o, 100, &out) == DBND_OK);
  const auto st = json::parse(take(out));
  CHECK(st.at("trials") == 100);
  CHECK(st.at("terminals").at(0).at("hit_rate") == 1.0);

  REQUIRE(dbnd_dst_dump_supertree(d, 2, 1000, &out) == DBND_OK);
  CHECK(take(out).find("super") != std::string::npos);
  REQUIRE(dbnd_dst_dump_lp(d, &o, &out) == DBND_OK);
  CHECK(take(out).find("ENDATA") != std::string::npos);
  dbnd_dst_free(d);
}

TEST_CASE("C API verify flags undeclared and strict degree excess") {
  dbnd_dst* d = nullptr;
  REQUIRE(dbnd_dst_parse("DBDST 1\n3 2 2\nroot 0\nvertex 0 1\nvertex 1 1\nvertex 2 1\n"
                         "edge 0 1 1\nedge 0 2 1\nterminal 1\nterminal 2\n",
                         &d) == DBND_OK);
  char* out = nullptr;
  REQUIRE(dbnd_dst_verify(d, R"({"edges": [[0,1],[0,2]]})", 0, &out) == DBND_OK);
  auto v = json::parse(take(out));
  CHECK(v.at("ok") == false);
  CHECK(v.at("problems").at(0).get<std::string>().find("degree bound") != std::string::npos);

  const char* declared = R"({"edges": [[0,1],[0,2]], "degree_violations": {"0": 2.0}, "cost": 2})";
  REQUIRE(dbnd_dst_verify(d, declared, 0, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("ok") == true);
  REQUIRE(dbnd_dst_verify(d, declared, 1, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("ok") == false);

  REQUIRE(dbnd_dst_verify(d, R"({"edges": [[0,1]], "cost": 5})", 0, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("ok") == false);
  CHECK(dbnd_dst_verify(d, "not json", 0, &out) == DBND_IO);
  CHECK(dbnd_dst_verify(d, "{}", 0, &out) == DBND_IO);
  dbnd_dst_free(d);
}

TEST_CASE("C API GST pipeline") {
  dbnd_gst* g = nullptr;
  REQUIRE(dbnd_gst_parse(kPathGst, &g) == DBND_OK);
  dbnd_gst_options o;
  dbnd_gst_options_init(&o);
  o.seed = 3;
  char* out = nullptr;
  REQUIRE(dbnd_gst_run(g, &o, &out) == DBND_OK);
  const std::string report = take(out);
  CHECK(json::parse(report).at("union_cost") == 6);
  REQUIRE(dbnd_gst_verify(g, report.c_str(), 0, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("ok") == true);
  REQUIRE(dbnd_gst_oracle(g, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("cost") == 6);
  REQUIRE(dbnd_gst_trials(g, &o, 50, &out) == DBND_OK);
  CHECK(json::parse(take(out)).at("groups").at(0).at("hit_rate") == 1.0);
  REQUIRE(dbnd_gst_dump_lp(g, 1, &out) == DBND_OK);
  CHECK(take(out).find("ENDATA") != std::string::npos);
  dbnd_gst_free(g);

  REQUIRE(dbnd_gst_generate_broom(2, 64, 2, 3, 0, 1, &g) == DBND_OK);
  CHECK(dbnd_gst_vertex_count(g) == 1 + 2 + 1 + 64);
  dbnd_gst_free(g);
  REQUIRE(dbnd_gst_generate(20, 2, 4, 2, 1, 9, 1, &g) == DBND_OK);
  dbnd_gst_free(g);
}

TEST_CASE("C API reports are deterministic") {
  dbnd_dst* d = nullptr;
  REQUIRE(dbnd_dst_generate(6, 9, 2, 2, 1, 9, 3, &d) == DBND_OK);
  dbnd_dst_options o;
  dbnd_dst_options_init(&o);
  o.height = 3;
  o.seed = 9;
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(dbnd_dst_run(d, &o, &a) == DBND_OK);
  REQUIRE(dbnd_dst_run(d, &o, &b) == DBND_OK);
  CHECK(take(a) == take(b));
  dbnd_dst_free(d);
}
