#include "dbnd/dbnd.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dbnd/bench.hpp"
#include "dbnd/dst_round.hpp"
#include "dbnd/error.hpp"
#include "dbnd/gst_round.hpp"
#include "dbnd/instances.hpp"
#include "dbnd/lp_models.hpp"
#include "dbnd/oracle.hpp"
#include "dbnd/states.hpp"
#include "dbnd/treekit.hpp"

struct dbnd_dst {
  dbnd::DirectedInstance inst;
};

struct dbnd_gst {
  dbnd::GroupTreeInstance inst;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

dbnd_status set_error(dbnd_status status, const std::string& what) {
  last_error = what;
  return status;
}

template <typename F>
dbnd_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DBND_OK;
  } catch (const dbnd::Error& e) {
    return set_error(static_cast<dbnd_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return set_error(DBND_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DBND_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DBND_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) dbnd::fail(dbnd::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

void emit(const std::string& s, char** out) {
  auto* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (buf == nullptr) throw std::bad_alloc();
  std::memcpy(buf, s.c_str(), s.size() + 1);
  *out = buf;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) dbnd::fail(dbnd::ErrorCode::kIo, std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) dbnd::fail(dbnd::ErrorCode::kIo, std::string("cannot read ") + path);
  return ss.str();
}

dbnd::DstRunParams dst_params(const dbnd_dst_options* o) {
  dbnd_dst_options d;
  dbnd_dst_options_init(&d);
  if (o == nullptr) o = &d;
  dbnd::DstRunParams p;
  p.height = o->height;
  p.repetitions = o->repetitions;
  p.seed = o->seed;
  p.node_cap = o->node_cap;
  p.form = o->full_lp ? dbnd::LpForm::kFull : dbnd::LpForm::kReduced;
  p.check = o->check != 0;
  if (o->instance_name) p.instance_name = o->instance_name;
  dbnd::require(p.repetitions >= 0, dbnd::ErrorCode::kInvalidArgument, "repetitions must be nonnegative");
  dbnd::require(p.node_cap >= 1, dbnd::ErrorCode::kInvalidArgument, "node cap must be positive");
  return p;
}

dbnd::GstRunParams gst_params(const dbnd_gst_options* o) {
  dbnd_gst_options d;
  dbnd_gst_options_init(&d);
  if (o == nullptr) o = &d;
  dbnd::GstRunParams p;
  p.repetitions = o->repetitions;
  p.seed = o->seed;
  p.form = o->full_lp ? dbnd::LpForm::kFull : dbnd::LpForm::kReduced;
  p.check = o->check != 0;
  p.gamma_cap = o->gamma_cap;
  if (o->instance_name) p.instance_name = o->instance_name;
  dbnd::require(p.repetitions >= 0, dbnd::ErrorCode::kInvalidArgument, "repetitions must be nonnegative");
  return p;
}

// A run output nests the pipeline report under "report".
json parse_solution(const char* text) {
  need(text, "solution");
  json j = json::parse(text);
  if (j.is_object() && j.contains("report") && j.at("report").is_object()) return j.at("report");
  return j;
}

const json* first_key(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (j.is_object() && j.contains(k)) return &j.at(k);
  return nullptr;
}

std::map<dbnd::VertexId, double> declared_violations(const json& sol) {
  std::map<dbnd::VertexId, double> out;
  if (const json* d = first_key(sol, {"degree_violations"})) {
    for (auto it = d->begin(); it != d->end(); ++it) out[std::stoi(it.key())] = it.value().get<double>();
  }
  return out;
}

// Adds cost and degree problems to a structural verdict.
json finish_verdict(const dbnd::VerifyResult& res, const json& sol, bool strict,
                    std::initializer_list<const char*> cost_keys) {
  std::vector<std::string> problems = res.problems;
  if (res.problems.empty()) {
    if (const json* c = first_key(sol, cost_keys); c && c->is_number()) {
      const double claimed = c->get<double>();
      if (claimed != static_cast<double>(res.cost))
        problems.push_back("claimed cost " + c->dump() + " differs from recomputed cost " + std::to_string(res.cost));
    }
    const auto declared = declared_violations(sol);
    for (auto [v, ratio] : res.degree_ratio) {
      const std::string where = "vertex " + std::to_string(v) + " exceeds its degree bound (ratio " +
                                std::to_string(ratio) + ")";
      if (strict) {
        problems.push_back(where);
      } else {
        auto it = declared.find(v);
        if (it == declared.end())
          problems.push_back(where + " without declaring it");
        else if (std::abs(it->second - ratio) > 1e-9)
          problems.push_back(where + " but declares ratio " + std::to_string(it->second));
      }
    }
  }
  json ratios = json::object();
  for (auto [v, r] : res.degree_ratio) ratios[std::to_string(v)] = r;
  return json{{"ok", problems.empty()},
              {"problems", problems},
              {"cost", res.cost},
              {"covered", res.covered},
              {"degree_ratio", ratios}};
}

}  // namespace

extern "C" {

const char* dbnd_last_error(void) { return last_error.c_str(); }

void dbnd_string_free(char* s) { std::free(s); }

const char* dbnd_version(void) { return "1.0.0"; }

dbnd_status dbnd_dst_parse(const char* text, dbnd_dst** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    auto h = std::make_unique<dbnd_dst>();
    h->inst = dbnd::parse_dst(text);
    *out = h.release();
  });
}

dbnd_status dbnd_dst_load(const char* path, dbnd_dst** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<dbnd_dst>();
    h->inst = dbnd::parse_dst(read_file(path));
    *out = h.release();
  });
}

dbnd_status dbnd_dst_generate(int32_t n, int32_t m, int32_t k, int32_t d_max, int64_t cost_lo, int64_t cost_hi,
                              uint64_t seed, dbnd_dst** out) {
  return guarded([&] {
    need(out, "out");
    auto h = std::make_unique<dbnd_dst>();
    h->inst = dbnd::gen_dst({n, m, k, d_max, cost_lo, cost_hi, seed});
    *out = h.release();
  });
}

dbnd_status dbnd_dst_serialize(const dbnd_dst* inst, char** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    emit(dbnd::serialize_dst(inst->inst), out);
  });
}

int32_t dbnd_dst_vertex_count(const dbnd_dst* inst) { return inst ? inst->inst.vertex_count : 0; }

int32_t dbnd_dst_terminal_count(const dbnd_dst* inst) { return inst ? inst->inst.terminal_count() : 0; }

void dbnd_dst_free(dbnd_dst* inst) { delete inst; }

dbnd_status dbnd_gst_parse(const char* text, dbnd_gst** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    auto h = std::make_unique<dbnd_gst>();
    h->inst = dbnd::parse_gst(text);
    *out = h.release();
  });
}

dbnd_status dbnd_gst_load(const char* path, dbnd_gst** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<dbnd_gst>();
    h->inst = dbnd::parse_gst(read_file(path));
    *out = h.release();
  });
}

dbnd_status dbnd_gst_generate(int32_t n, int32_t k, int32_t depth, int32_t d_max, int64_t cost_lo, int64_t cost_hi,
                              uint64_t seed, dbnd_gst** out) {
  return guarded([&] {
    need(out, "out");
    auto h = std::make_unique<dbnd_gst>();
    h->inst = dbnd::gen_gst({n, k, depth, d_max, cost_lo, cost_hi, seed});
    *out = h.release();
  });
}

dbnd_status dbnd_gst_generate_broom(int32_t handle, int32_t bristles, int32_t k, int32_t group_size,
                                    int32_t hub_degree, uint64_t seed, dbnd_gst** out) {
  return guarded([&] {
    need(out, "out");
    dbnd::BroomParams p;
    p.handle = handle;
    p.bristles = bristles;
    p.k = k;
    p.group_size = group_size;
    p.hub_degree = hub_degree;
    p.seed = seed;
    auto h = std::make_unique<dbnd_gst>();
    h->inst = dbnd::gen_broom(p);
    *out = h.release();
  });
}

dbnd_status dbnd_gst_serialize(const dbnd_gst* inst, char** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    emit(dbnd::serialize_gst(inst->inst), out);
  });
}

int32_t dbnd_gst_vertex_count(const dbnd_gst* inst) { return inst ? inst->inst.vertex_count : 0; }

int32_t dbnd_gst_group_count(const dbnd_gst* inst) { return inst ? inst->inst.group_count() : 0; }

void dbnd_gst_free(dbnd_gst* inst) { delete inst; }

void dbnd_dst_options_init(dbnd_dst_options* o) {
  if (o == nullptr) return;
  o->height = -1;
  o->repetitions = 0;
  o->seed = 0;
  o->node_cap = 5'000'000;
  o->full_lp = 0;
  o->check = 1;
  o->instance_name = nullptr;
}

void dbnd_gst_options_init(dbnd_gst_options* o) {
  if (o == nullptr) return;
  o->repetitions = 0;
  o->seed = 0;
  o->full_lp = 0;
  o->check = 1;
  o->gamma_cap = -1;
  o->instance_name = nullptr;
}

dbnd_status dbnd_dst_run(const dbnd_dst* inst, const dbnd_dst_options* options, char** report) {
  return guarded([&] {
    need(inst, "instance");
    need(report, "report");
    emit(dbnd::to_json(dbnd::run_dst(inst->inst, dst_params(options))), report);
  });
}

dbnd_status dbnd_gst_run(const dbnd_gst* inst, const dbnd_gst_options* options, char** report) {
  return guarded([&] {
    need(inst, "instance");
    need(report, "report");
    emit(dbnd::to_json(dbnd::run_gst(inst->inst, gst_params(options))), report);
  });
}

dbnd_status dbnd_dst_trials(const dbnd_dst* inst, const dbnd_dst_options* options, int64_t trials, char** stats) {
  return guarded([&] {
    need(inst, "instance");
    need(stats, "stats");
    const auto p = dst_params(options);
    const auto prep = dbnd::prepare_dst(inst->inst, p.height, p.node_cap, p.form);
    json j = json::parse(dbnd::to_json(dbnd::dst_trials(prep, trials, p.seed, p.check)));
    j["schema_version"] = 1;
    j["problem"] = "dst";
    j["instance"] = p.instance_name;
    j["h"] = prep.height;
    j["h_prime"] = prep.tree.root_level();
    j["super_tree_nodes"] = prep.tree.size();
    emit(j.dump(2) + "\n", stats);
  });
}

dbnd_status dbnd_gst_trials(const dbnd_gst* inst, const dbnd_gst_options* options, int64_t trials, char** stats) {
  return guarded([&] {
    need(inst, "instance");
    need(stats, "stats");
    const auto p = gst_params(options);
    inst->inst.validate(false);
    const auto prep = dbnd::prepare_gst(inst->inst, p.form, p.check, p.gamma_cap);
    json j = json::parse(dbnd::to_json(dbnd::gst_trials(inst->inst, prep, trials, p.seed)));
    j["schema_version"] = 1;
    j["problem"] = "gst";
    j["instance"] = p.instance_name;
    j["n"] = inst->inst.vertex_count;
    j["L"] = prep.scale.L;
    j["gamma"] = prep.scale.gamma;
    j["lp_cost"] = prep.lp_cost;
    emit(j.dump(2) + "\n", stats);
  });
}

dbnd_status dbnd_dst_oracle(const dbnd_dst* inst, char** result) {
  return guarded([&] {
    need(inst, "instance");
    need(result, "result");
    inst->inst.validate();
    const dbnd::ExactDstLimits limits;
    if (inst->inst.vertex_count > limits.max_vertices || static_cast<std::int32_t>(inst->inst.edges.size()) > limits.max_edges)
      dbnd::fail(dbnd::ErrorCode::kCapExceeded, "instance exceeds the oracle limits (" +
                                                    std::to_string(limits.max_vertices) + " vertices, " +
                                                    std::to_string(limits.max_edges) + " edges)");
    const auto r = dbnd::exact_dst(inst->inst, limits);
    json j{{"schema_version", 1}, {"problem", "dst"}};
    j["status"] = r.status == dbnd::ExactStatus::kOptimal ? "optimal" : "infeasible";
    j["cost"] = r.cost;
    j["edges"] = r.edges;
    if (r.status == dbnd::ExactStatus::kOptimal && !inst->inst.terminals.empty())
      j["state_tree_depth"] = dbnd::state_tree_depth(inst->inst, r.edges);
    emit(j.dump(2) + "\n", result);
  });
}

dbnd_status dbnd_gst_oracle(const dbnd_gst* inst, char** result) {
  return guarded([&] {
    need(inst, "instance");
    need(result, "result");
    inst->inst.validate(false);
    if (inst->inst.group_count() > dbnd::kExactGstMaxGroups)
      dbnd::fail(dbnd::ErrorCode::kCapExceeded,
                 "instance exceeds the oracle limit of " + std::to_string(dbnd::kExactGstMaxGroups) + " groups");
    const auto r = dbnd::exact_gst(inst->inst);
    json j{{"schema_version", 1}, {"problem", "gst"}};
    j["status"] = r.status == dbnd::ExactStatus::kOptimal ? "optimal" : "infeasible";
    j["cost"] = r.cost;
    j["vertices"] = r.vertices;
    emit(j.dump(2) + "\n", result);
  });
}

dbnd_status dbnd_dst_dump_supertree(const dbnd_dst* inst, int32_t height, int64_t node_cap, char** text) {
  return guarded([&] {
    need(inst, "instance");
    need(text, "text");
    inst->inst.validate();
    const auto norm = dbnd::normalize(inst->inst);
    const std::int32_t h = height >= 0 ? height : dbnd::default_height(norm.vertex_count());
    const auto tree = dbnd::build_super_tree(norm, {h, node_cap, true});
    emit(dbnd::dump_super_tree(tree, norm), text);
  });
}

dbnd_status dbnd_dst_dump_lp(const dbnd_dst* inst, const dbnd_dst_options* options, char** mps) {
  return guarded([&] {
    need(inst, "instance");
    need(mps, "mps");
    const auto p = dst_params(options);
    inst->inst.validate();
    const auto norm = dbnd::normalize(inst->inst);
    const std::int32_t h = p.height >= 0 ? p.height : dbnd::default_height(norm.vertex_count());
    const auto tree = dbnd::build_super_tree(norm, {h, p.node_cap, true});
    const auto lp = dbnd::build_dst_lp(tree, norm, p.form);
    emit(dbnd::dump_mps(lp.model, "DBDST"), mps);
  });
}

dbnd_status dbnd_gst_dump_lp(const dbnd_gst* inst, int32_t full_lp, char** mps) {
  return guarded([&] {
    need(inst, "instance");
    need(mps, "mps");
    inst->inst.validate(false);
    const auto lp = dbnd::build_gst_lp(inst->inst, full_lp ? dbnd::LpForm::kFull : dbnd::LpForm::kReduced);
    emit(dbnd::dump_mps(lp.model, "DBGST"), mps);
  });
}

dbnd_status dbnd_dst_verify(const dbnd_dst* inst, const char* solution, int32_t strict, char** verdict) {
  return guarded([&] {
    need(inst, "instance");
    need(verdict, "verdict");
    inst->inst.validate();
    const json sol = parse_solution(solution);
    const json* e = first_key(sol, {"tree_edges", "edges"});
    if (e == nullptr) dbnd::fail(dbnd::ErrorCode::kIo, "solution has no tree_edges or edges array");
    const auto edges = e->get<std::vector<std::pair<dbnd::VertexId, dbnd::VertexId>>>();
    const auto res = dbnd::verify_dst_tree(inst->inst, edges);
    emit(finish_verdict(res, sol, strict != 0, {"tree_cost", "cost"}).dump(2) + "\n", verdict);
  });
}

dbnd_status dbnd_gst_verify(const dbnd_gst* inst, const char* solution, int32_t strict, char** verdict) {
  return guarded([&] {
    need(inst, "instance");
    need(verdict, "verdict");
    inst->inst.validate(false);
    const json sol = parse_solution(solution);
    const json* v = first_key(sol, {"union_vertices", "vertices"});
    if (v == nullptr) dbnd::fail(dbnd::ErrorCode::kIo, "solution has no union_vertices or vertices array");
    const auto vertices = v->get<std::vector<dbnd::VertexId>>();
    const auto res = dbnd::verify_gst_tree(inst->inst, vertices);
    emit(finish_verdict(res, sol, strict != 0, {"union_cost", "cost"}).dump(2) + "\n", verdict);
  });
}

}  // extern "C"
