// Command-line front end. Uses only the C interface.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dbnd/dbnd.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitCap = 3;
constexpr int kExitInvariant = 4;
constexpr int kExitIo = 5;
constexpr int kExitOther = 1;

int exit_code(dbnd_status s) {
  switch (s) {
    case DBND_OK: return kExitOk;
    case DBND_INFEASIBLE: return kExitInfeasible;
    case DBND_CAP_EXCEEDED: return kExitCap;
    case DBND_INVARIANT_VIOLATION: return kExitInvariant;
    case DBND_IO:
    case DBND_INVALID_ARGUMENT: return kExitIo;
    default: return kExitOther;
  }
}

struct CliFailure {
  int code;
};

void check(dbnd_status s, const char* what) {
  if (s == DBND_OK) return;
  std::cerr << "error: " << what << ": " << dbnd_last_error() << "\n";
  throw CliFailure{exit_code(s)};
}

[[noreturn]] void die(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  throw CliFailure{code};
}

struct DstDeleter {
  void operator()(dbnd_dst* p) const { dbnd_dst_free(p); }
};
struct GstDeleter {
  void operator()(dbnd_gst* p) const { dbnd_gst_free(p); }
};
using DstHandle = std::unique_ptr<dbnd_dst, DstDeleter>;
using GstHandle = std::unique_ptr<dbnd_gst, GstDeleter>;

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  dbnd_string_free(s);
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) die(kExitIo, "cannot write " + path);
}

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(kExitIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DstHandle load_dst(const std::string& path) {
  dbnd_dst* p = nullptr;
  check(dbnd_dst_load(path.c_str(), &p), "loading instance");
  return DstHandle(p);
}

GstHandle load_gst(const std::string& path) {
  dbnd_gst* p = nullptr;
  check(dbnd_gst_load(path.c_str(), &p), "loading instance");
  return GstHandle(p);
}

// "n=8,m=14,k=3" -> {n: 8, m: 14, k: 3}
std::map<std::string, std::int64_t> parse_gen_spec(const std::string& spec) {
  std::map<std::string, std::int64_t> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) die(kExitIo, "malformed generator item '" + item + "'");
    const std::string key = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const std::int64_t value = std::stoll(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing characters");
      out[key] = value;
    } catch (const std::exception&) {
      die(kExitIo, "malformed generator value in '" + item + "'");
    }
  }
  return out;
}

std::int64_t take_key(std::map<std::string, std::int64_t>& spec, const std::string& key, std::int64_t fallback) {
  auto it = spec.find(key);
  if (it == spec.end()) return fallback;
  const std::int64_t v = it->second;
  spec.erase(it);
  return v;
}

void reject_leftovers(const std::map<std::string, std::int64_t>& spec) {
  if (!spec.empty()) die(kExitIo, "unknown generator key '" + spec.begin()->first + "'");
}

DstHandle generate_dst(const std::string& text, std::uint64_t seed) {
  auto spec = parse_gen_spec(text);
  const auto n = static_cast<std::int32_t>(take_key(spec, "n", 8));
  const auto m = static_cast<std::int32_t>(take_key(spec, "m", 2 * n));
  const auto k = static_cast<std::int32_t>(take_key(spec, "k", 3));
  const auto d = static_cast<std::int32_t>(take_key(spec, "d", 2));
  const auto lo = take_key(spec, "cost_lo", 1);
  const auto hi = take_key(spec, "cost_hi", 10);
  seed = static_cast<std::uint64_t>(take_key(spec, "seed", static_cast<std::int64_t>(seed)));
  reject_leftovers(spec);
  dbnd_dst* p = nullptr;
  check(dbnd_dst_generate(n, m, k, d, lo, hi, seed, &p), "generating instance");
  return DstHandle(p);
}

GstHandle generate_gst(const std::string& text, std::uint64_t seed) {
  auto spec = parse_gen_spec(text);
  seed = static_cast<std::uint64_t>(take_key(spec, "seed", static_cast<std::int64_t>(seed)));
  dbnd_gst* p = nullptr;
  if (take_key(spec, "broom", 0) != 0) {
    const auto handle = static_cast<std::int32_t>(take_key(spec, "handle", 4));
    const auto bristles = static_cast<std::int32_t>(take_key(spec, "bristles", 1 << 15));
    const auto k = static_cast<std::int32_t>(take_key(spec, "k", 4));
    const auto gs = static_cast<std::int32_t>(take_key(spec, "group_size", 8));
    const auto hub = static_cast<std::int32_t>(take_key(spec, "hub_degree", 0));
    reject_leftovers(spec);
    check(dbnd_gst_generate_broom(handle, bristles, k, gs, hub, seed, &p), "generating instance");
  } else {
    const auto n = static_cast<std::int32_t>(take_key(spec, "n", 30));
    const auto k = static_cast<std::int32_t>(take_key(spec, "k", 3));
    const auto depth = static_cast<std::int32_t>(take_key(spec, "depth", 4));
    const auto d = static_cast<std::int32_t>(take_key(spec, "d", 2));
    const auto lo = take_key(spec, "cost_lo", 1);
    const auto hi = take_key(spec, "cost_hi", 10);
    reject_leftovers(spec);
    check(dbnd_gst_generate(n, k, depth, d, lo, hi, seed, &p), "generating instance");
  }
  return GstHandle(p);
}

struct Common {
  std::string instance;
  std::string out;
  std::uint64_t seed = 0;
};

struct DstFlags {
  std::int32_t q = 0;
  std::int32_t height = -1;
  std::int64_t node_cap = 5'000'000;
  bool full_lp = false;
  bool no_check = false;
};

struct GstFlags {
  std::int32_t m = 0;
  std::int32_t gamma_cap = -1;
  bool full_lp = false;
  bool no_check = false;
};

dbnd_dst_options dst_options(const DstFlags& f, std::uint64_t seed, const std::string& name) {
  dbnd_dst_options o;
  dbnd_dst_options_init(&o);
  o.height = f.height;
  o.repetitions = f.q;
  o.seed = seed;
  o.node_cap = f.node_cap;
  o.full_lp = f.full_lp ? 1 : 0;
  o.check = f.no_check ? 0 : 1;
  o.instance_name = name.c_str();
  return o;
}

dbnd_gst_options gst_options(const GstFlags& f, std::uint64_t seed, const std::string& name) {
  dbnd_gst_options o;
  dbnd_gst_options_init(&o);
  o.repetitions = f.m;
  o.seed = seed;
  o.full_lp = f.full_lp ? 1 : 0;
  o.check = f.no_check ? 0 : 1;
  o.gamma_cap = f.gamma_cap;
  o.instance_name = name.c_str();
  return o;
}

void add_dst_flags(CLI::App* cmd, DstFlags& f) {
  cmd->add_option("--q", f.q, "Repetitions (0: ceil((h+1) ln(10k)))")->check(CLI::NonNegativeNumber);
  cmd->add_option("--height", f.height, "Decomposition height (negative: default)");
  cmd->add_option("--node-cap", f.node_cap, "Super-tree node cap")->check(CLI::PositiveNumber);
  cmd->add_flag("--full-lp", f.full_lp, "Write every LP row");
  cmd->add_flag("--no-check", f.no_check, "Skip per-repetition goodness checks");
}

// With shared set, --full-lp and --no-check are left to add_dst_flags.
void add_gst_flags(CLI::App* cmd, GstFlags& f, bool shared = false) {
  cmd->add_option("--m", f.m, "Repetitions (0: calibrated)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--gamma-cap", f.gamma_cap, "Upper bound on gamma (negative: none)");
  if (shared) return;
  cmd->add_flag("--full-lp", f.full_lp, "Write every LP row");
  cmd->add_flag("--no-check", f.no_check, "Skip LP solution invariant checks");
}

std::string problem_of(const std::string& explicit_problem, const std::string& path) {
  if (!explicit_problem.empty()) return explicit_problem;
  auto ends = [&](const char* ext) {
    const std::string e(ext);
    return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
  };
  if (ends(".dst")) return "dst";
  if (ends(".gst")) return "gst";
  die(kExitIo, "cannot tell the problem from '" + path + "'; pass --problem");
}

// Oracle result or nullopt when the instance is beyond the oracle's limits.
std::optional<json> try_oracle(dbnd_status s, char* text) {
  if (s == DBND_CAP_EXCEEDED) return std::nullopt;
  check(s, "running the oracle");
  return json::parse(take(text));
}

int cmd_run(const std::string& problem, const std::string& gen, const Common& c, std::int64_t trials,
            const DstFlags& df, const GstFlags& gf) {
  if (c.instance.empty() == gen.empty()) die(kExitIo, "pass exactly one of --instance and --gen");
  const std::string name = c.instance.empty() ? "gen:" + gen : c.instance;
  json out{{"schema_version", 1}, {"problem", problem}, {"instance", name}, {"seed", c.seed}};
  bool violated = false;
  char* text = nullptr;
  if (problem == "dst") {
    DstHandle inst = c.instance.empty() ? generate_dst(gen, c.seed) : load_dst(c.instance);
    const dbnd_status oracle_status = dbnd_dst_oracle(inst.get(), &text);
    std::optional<json> oracle = try_oracle(oracle_status, text);
    // Without --height the optimal tree's state-tree depth is used when the oracle can provide it.
    DstFlags flags = df;
    std::string height_source = df.height >= 0 ? "flag" : "default";
    if (df.height < 0 && oracle && oracle->contains("state_tree_depth")) {
      flags.height = oracle->at("state_tree_depth").get<std::int32_t>();
      height_source = "oracle";
    }
    out["height_source"] = height_source;
    const auto opt = dst_options(flags, c.seed, name);
    check(dbnd_dst_run(inst.get(), &opt, &text), "running the pipeline");
    const std::string report_text = take(text);
    json report = json::parse(report_text);
    check(dbnd_dst_verify(inst.get(), report_text.c_str(), 0, &text), "verifying the tree");
    const json verdict = json::parse(take(text));
    violated = violated || !verdict.at("ok").get<bool>();
    out["report"] = report;
    out["verify"] = verdict;
    if (oracle) {
      const double opt_cost = oracle->at("cost").get<double>();
      const double lp = report.at("lp_cost").get<double>();
      const bool dominated = oracle->at("status") != "optimal" || lp <= opt_cost + 1e-6 * std::max(1.0, std::abs(opt_cost));
      violated = violated || !dominated;
      out["oracle"] = {{"status", oracle->at("status")}, {"cost", opt_cost}, {"lp_dominates", dominated}};
    }
    if (trials > 0 && dbnd_dst_terminal_count(inst.get()) > 0) {
      check(dbnd_dst_trials(inst.get(), &opt, trials, &text), "collecting statistics");
      out["statistics"] = json::parse(take(text));
    }
  } else if (problem == "gst") {
    GstHandle inst = c.instance.empty() ? generate_gst(gen, c.seed) : load_gst(c.instance);
    const auto opt = gst_options(gf, c.seed, name);
    check(dbnd_gst_run(inst.get(), &opt, &text), "running the pipeline");
    const std::string report_text = take(text);
    json report = json::parse(report_text);
    check(dbnd_gst_verify(inst.get(), report_text.c_str(), 0, &text), "verifying the tree");
    const json verdict = json::parse(take(text));
    violated = violated || !verdict.at("ok").get<bool>();
    out["report"] = report;
    out["verify"] = verdict;
    if (dbnd_gst_vertex_count(inst.get()) <= 4096) {
      const dbnd_status oracle_status = dbnd_gst_oracle(inst.get(), &text);
      if (auto oracle = try_oracle(oracle_status, text)) {
        const double opt_cost = oracle->at("cost").get<double>();
        const double lp = report.at("lp_cost").get<double>();
        const bool dominated =
            oracle->at("status") != "optimal" || lp <= opt_cost + 1e-6 * std::max(1.0, std::abs(opt_cost));
        violated = violated || !dominated;
        out["oracle"] = {{"status", oracle->at("status")}, {"cost", opt_cost}, {"lp_dominates", dominated}};
      }
    }
    if (trials > 0) {
      check(dbnd_gst_trials(inst.get(), &opt, trials, &text), "collecting statistics");
      out["statistics"] = json::parse(take(text));
    }
  } else {
    die(kExitIo, "unknown problem '" + problem + "'");
  }
  out["invariants_ok"] = !violated;
  write_output(c.out, out.dump(2) + "\n");
  if (violated) {
    std::cerr << "error: invariant violation (see verify / oracle in the report)\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_verify(const std::string& problem, const std::string& tree_path, const std::string& instance, bool strict,
               const std::string& out_path) {
  const std::string solution = read_input(tree_path);
  char* text = nullptr;
  if (problem == "dst") {
    auto inst = load_dst(instance);
    check(dbnd_dst_verify(inst.get(), solution.c_str(), strict ? 1 : 0, &text), "verifying");
  } else {
    auto inst = load_gst(instance);
    check(dbnd_gst_verify(inst.get(), solution.c_str(), strict ? 1 : 0, &text), "verifying");
  }
  const json verdict = json::parse(take(text));
  write_output(out_path, verdict.dump(2) + "\n");
  if (!verdict.at("ok").get<bool>()) {
    for (const auto& p : verdict.at("problems")) std::cerr << "violation: " << p.get<std::string>() << "\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Degree-bounded directed and group Steiner tree solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dbnd_version()));

  Common c;
  DstFlags df;
  GstFlags gf;
  std::int64_t trials = 0;
  std::string problem, gen, tree_path;
  bool strict = false;

  std::int32_t n = 8, m = 14, k = 3, d_max = 2, depth = 4;
  std::int64_t cost_lo = 1, cost_hi = 10;
  bool broom = false;
  std::int32_t handle = 4, bristles = 1 << 15, group_size = 8, hub_degree = 0;

  auto* gen_dst = app.add_subcommand("gen-dst", "Generate a random directed instance");
  gen_dst->add_option("--n", n, "Vertices");
  gen_dst->add_option("--m,--edges", m, "Edges");
  gen_dst->add_option("--k", k, "Terminals");
  gen_dst->add_option("--d-max", d_max, "Largest degree bound");
  gen_dst->add_option("--cost-lo", cost_lo);
  gen_dst->add_option("--cost-hi", cost_hi);
  gen_dst->add_option("--seed", c.seed);
  gen_dst->add_option("--out", c.out, "Output path (default stdout)");

  auto* gen_gst = app.add_subcommand("gen-gst", "Generate a random group instance on a tree");
  gen_gst->add_option("--n", n, "Vertices");
  gen_gst->add_option("--k", k, "Groups");
  gen_gst->add_option("--depth", depth, "Tree depth");
  gen_gst->add_option("--d-max", d_max, "Largest degree bound");
  gen_gst->add_option("--cost-lo", cost_lo);
  gen_gst->add_option("--cost-hi", cost_hi);
  gen_gst->add_flag("--broom", broom, "Generate a broom: a path, a hub and many leaves");
  gen_gst->add_option("--handle", handle, "Broom path length");
  gen_gst->add_option("--bristles", bristles, "Broom leaves");
  gen_gst->add_option("--group-size", group_size, "Broom group size");
  gen_gst->add_option("--hub-degree", hub_degree, "Broom hub degree bound (0: k)");
  gen_gst->add_option("--seed", c.seed);
  gen_gst->add_option("--out", c.out, "Output path (default stdout)");

  auto* solve_dst = app.add_subcommand("solve-dst", "Run the rounding pipeline on a directed instance");
  solve_dst->add_option("--instance", c.instance)->required();
  solve_dst->add_option("--seed", c.seed);
  solve_dst->add_option("--out", c.out, "Report path (default stdout)");
  add_dst_flags(solve_dst, df);

  auto* solve_gst = app.add_subcommand("solve-gst", "Run the rounding pipeline on a group instance");
  solve_gst->add_option("--instance", c.instance)->required();
  solve_gst->add_option("--seed", c.seed);
  solve_gst->add_option("--out", c.out, "Report path (default stdout)");
  add_gst_flags(solve_gst, gf);

  auto* oracle_dst = app.add_subcommand("oracle-dst", "Exact optimum of a small directed instance");
  oracle_dst->add_option("--instance", c.instance)->required();
  oracle_dst->add_option("--out", c.out);

  auto* oracle_gst = app.add_subcommand("oracle-gst", "Exact optimum of a group instance with few groups");
  oracle_gst->add_option("--instance", c.instance)->required();
  oracle_gst->add_option("--out", c.out);

  auto* run = app.add_subcommand("run", "Experiment: pipeline, verification, oracle comparison, statistics");
  run->add_option("--problem", problem)->required()->check(CLI::IsMember({"dst", "gst"}));
  run->add_option("--instance", c.instance, "Instance file");
  run->add_option("--gen", gen, "Generator spec, e.g. n=8,m=14,k=3");
  run->add_option("--seed", c.seed);
  run->add_option("--trials", trials, "Single-rounding trials for statistics (0: none)")->check(CLI::NonNegativeNumber);
  run->add_option("--out", c.out, "Report path (default stdout)");
  add_dst_flags(run, df);
  add_gst_flags(run, gf, true);

  auto* verify = app.add_subcommand("verify", "Check a tree against an instance");
  verify->add_option("--tree", tree_path, "Report or oracle JSON")->required();
  verify->add_option("--instance", c.instance)->required();
  verify->add_option("--problem", problem, "dst or gst (default: from the instance extension)")
      ->check(CLI::IsMember({"dst", "gst"}));
  verify->add_flag("--strict", strict, "Reject any degree excess, declared or not");
  verify->add_option("--out", c.out);

  auto* dump_st = app.add_subcommand("dump-supertree", "List the super-tree of a directed instance");
  dump_st->add_option("--instance", c.instance)->required();
  dump_st->add_option("--height", df.height);
  dump_st->add_option("--node-cap", df.node_cap)->check(CLI::PositiveNumber);
  dump_st->add_option("--out", c.out);

  auto* dump_lp = app.add_subcommand("dump-lp", "Write the LP relaxation in MPS format");
  dump_lp->add_option("--instance", c.instance)->required();
  dump_lp->add_option("--problem", problem)->check(CLI::IsMember({"dst", "gst"}));
  dump_lp->add_option("--height", df.height);
  dump_lp->add_option("--node-cap", df.node_cap)->check(CLI::PositiveNumber);
  dump_lp->add_flag("--full-lp", df.full_lp, "Write every LP row");
  dump_lp->add_option("--out", c.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  char* text = nullptr;
  if (*gen_dst) {
    dbnd_dst* p = nullptr;
    check(dbnd_dst_generate(n, m, k, d_max, cost_lo, cost_hi, c.seed, &p), "generating instance");
    DstHandle inst(p);
    check(dbnd_dst_serialize(inst.get(), &text), "serializing");
    write_output(c.out, take(text));
    return kExitOk;
  }
  if (*gen_gst) {
    dbnd_gst* p = nullptr;
    if (broom)
      check(dbnd_gst_generate_broom(handle, bristles, k, group_size, hub_degree, c.seed, &p), "generating instance");
    else
      check(dbnd_gst_generate(n, k, depth, d_max, cost_lo, cost_hi, c.seed, &p), "generating instance");
    GstHandle inst(p);
    check(dbnd_gst_serialize(inst.get(), &text), "serializing");
    write_output(c.out, take(text));
    return kExitOk;
  }
  if (*solve_dst) {
    auto inst = load_dst(c.instance);
    const auto opt = dst_options(df, c.seed, c.instance);
    check(dbnd_dst_run(inst.get(), &opt, &text), "running the pipeline");
    write_output(c.out, take(text));
    return kExitOk;
  }
  if (*solve_gst) {
    auto inst = load_gst(c.instance);
    const auto opt = gst_options(gf, c.seed, c.instance);
    check(dbnd_gst_run(inst.get(), &opt, &text), "running the pipeline");
    write_output(c.out, take(text));
    return kExitOk;
  }
  if (*oracle_dst) {
    auto inst = load_dst(c.instance);
    check(dbnd_dst_oracle(inst.get(), &text), "running the oracle");
    const std::string result = take(text);
    write_output(c.out, result);
    return json::parse(result).at("status") == "optimal" ? kExitOk : kExitInfeasible;
  }
  if (*oracle_gst) {
    auto inst = load_gst(c.instance);
    check(dbnd_gst_oracle(inst.get(), &text), "running the oracle");
    const std::string result = take(text);
    write_output(c.out, result);
    return json::parse(result).at("status") == "optimal" ? kExitOk : kExitInfeasible;
  }
  if (*run) {
    gf.full_lp = df.full_lp;
    gf.no_check = df.no_check;
  }
  if (*run) return cmd_run(problem, gen, c, trials, df, gf);
  if (*verify) return cmd_verify(problem_of(problem, c.instance), tree_path, c.instance, strict, c.out);
  if (*dump_st) {
    auto inst = load_dst(c.instance);
    check(dbnd_dst_dump_supertree(inst.get(), df.height, df.node_cap, &text), "building the super-tree");
    write_output(c.out, take(text));
    return kExitOk;
  }
  if (*dump_lp) {
    if (problem_of(problem, c.instance) == "dst") {
      auto inst = load_dst(c.instance);
      const auto opt = dst_options(df, c.seed, c.instance);
      check(dbnd_dst_dump_lp(inst.get(), &opt, &text), "building the LP");
    } else {
      auto inst = load_gst(c.instance);
      check(dbnd_gst_dump_lp(inst.get(), df.full_lp ? 1 : 0, &text), "building the LP");
    }
    write_output(c.out, take(text));
    return kExitOk;
  }
  return kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CliFailure& f) {
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
