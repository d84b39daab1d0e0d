// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dbnd/bench.hpp"
#include "dbnd/dst_round.hpp"
#include "dbnd/error.hpp"
#include "dbnd/gst_round.hpp"
#include "dbnd/lp_models.hpp"
#include "dbnd/oracle.hpp"
#include "dbnd/states.hpp"
#include "dbnd/treekit.hpp"
#include "support.hpp"

using namespace dbnd;
using dbnd::testing::bernoulli_sigma;
using dbnd::testing::fractional_point;

namespace {

constexpr double kSigmas = 3.0;
constexpr double kLpRelTol = 1e-6;
constexpr double kProbSlack = 1e-6;  // sampler tolerance on exact 0/1 values
constexpr std::int64_t kTrials = 10'000;
constexpr std::int64_t kDstNodeCap = 15'000;  // super-tree size at which instances are skipped
constexpr double kDstCoverRate = 0.80;
constexpr double kGstCoverRate = 0.90;
constexpr std::int32_t kFractionalVertices = 6;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail << "first failure: " << why << "; ";
    pass = false;
  }
};

int g_failures = 0;

void criterion(int id, const char* title, const std::function<void(Verdict&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s criterion %2d: %s [%s%.1f s]\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.str().c_str(), secs);
  std::fflush(stdout);
  if (!v.pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Two-sided z threshold whose family-wise error rate over `count` checks is
// the single-check rate at kSigmas (Bonferroni).
double family_z(std::int64_t count) {
  const double target = std::erfc(kSigmas / std::sqrt(2.0)) / static_cast<double>(std::max<std::int64_t>(count, 1));
  double lo = kSigmas, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > target ? lo : hi) = mid;
  }
  return hi;
}

struct DstCase {
  DirectedInstance inst;
  Cost opt = 0;
  std::int32_t h = 0;
};

// Random DST instances with an optimum whose super-tree at the optimum's
// state-tree depth stays under kDstNodeCap. `skipped` counts capped draws.
std::vector<DstCase> dst_cases(std::size_t count, std::uint64_t first_seed,
                               const std::function<DstGenParams(std::uint64_t)>& shape, std::int32_t& skipped) {
  std::vector<DstCase> out;
  for (std::uint64_t s = first_seed; out.size() < count && s < first_seed + 20 * count; ++s) {
    const auto inst = gen_dst(shape(s));
    const auto ex = exact_dst(inst);
    if (ex.status != ExactStatus::kOptimal) continue;
    const auto h = state_tree_depth(inst, ex.edges);
    try {
      build_super_tree(normalize(inst), {h, kDstNodeCap, true});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCapExceeded) throw;
      ++skipped;
      continue;
    }
    out.push_back({inst, ex.cost, h});
  }
  return out;
}

DstGenParams small_dst(std::uint64_t s) {
  const std::int32_t n = 6 + static_cast<std::int32_t>(s % 2);
  return {n, n + 3, 2, 2, 1, 9, s};
}

GstGenParams mid_gst(std::uint64_t s) {
  return {20 + static_cast<std::int32_t>(s % 41), 1 + static_cast<std::int32_t>(s % 8),
          3 + static_cast<std::int32_t>(s % 4), 2, 1, 9, s};
}

GstGenParams small_gamma0_gst(std::uint64_t s) { return {60, 6, 6, 3, 1, 9, s}; }

BroomParams big_broom(std::uint64_t s) { return {4, 1 << 15, 4, 8, 0, 1, 9, s}; }

// DST instance, its LP stages, and a fractional feasible point substituted
// for the LP optimum.
struct DstPoint {
  DstCase c;
  DstPrepared prep;
  double point_cost = 0.0;
};

std::vector<DstPoint> dst_point_suite(std::int32_t& skipped) {
  std::vector<DstPoint> out;
  auto cases = dst_cases(20, 1000, small_dst, skipped);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    auto& c = cases[i];
    auto prep = prepare_dst(c.inst, c.h, kDstNodeCap);
    const auto point = fractional_point(prep.lp.model, kFractionalVertices, 1000 + i);
    double cost = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) cost += prep.lp.model.objective[j] * point[j];
    prep.node_x = prep.lp.node_values(point);
    prep.solution.objective = cost;
    out.push_back({std::move(c), std::move(prep), cost});
  }
  return out;
}

void check_gst_invariants(const GroupTreeInstance& inst, const GstPreparedSolution& prep, Verdict& v,
                          const std::string& tag) {
  if (!monotonicity_violations(inst, prep.scaled).empty()) v.fail(tag + ": monotonicity");
  if (!branching_violations(inst, prep.scaled).empty()) v.fail(tag + ": branching mass above 4 d_u");
  for (auto l : prep.levels)
    if (l > prep.scale.L) v.fail(tag + ": level above L");
}

}  // namespace

int main() {
  std::int32_t dst_skipped = 0;
  const auto dst_suite = dst_point_suite(dst_skipped);

  criterion(1, "balanced separator bound on 1000 random binary trees", [](Verdict& v) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
      const auto n = static_cast<std::int32_t>(rng.range(3, 256));
      const RootedTree tree(dbnd::testing::random_binary_tree(n, rng));
      const auto sep = find_balanced_separator(tree);
      const auto size = tree.subtree_sizes()[static_cast<std::size_t>(sep)];
      if (!dbnd::testing::separator_bound_holds(n, size))
        v.fail("n=" + std::to_string(n) + " subtree=" + std::to_string(size));
    }
    v.detail << "1000 trees, n in [3,256]; ";
  });

  criterion(2, "state tree round trip on 100 oracle-optimal trees", [](Verdict& v) {
    int checked = 0;
    for (std::uint64_t s = 0; checked < 100 && s < 3000; ++s) {
      const std::int32_t n = 5 + static_cast<std::int32_t>(s % 8);
      const auto inst = gen_dst({n, n + 4, 2 + static_cast<std::int32_t>(s % 3), 2, 1, 9, s});
      const auto ex = exact_dst(inst);
      if (ex.status != ExactStatus::kOptimal) continue;
      ++checked;
      const auto norm = normalize(inst);
      const auto lifted = lift_tree(norm, ex.edges);
      const auto tag = "seed " + std::to_string(s);
      if (!check_good_multi_tree(lifted, norm).empty()) v.fail(tag + ": lifted tree not good");
      const auto st = gen_state_tree(lifted, norm, -1);
      if (!validate_state_tree(st, norm, -1).empty()) v.fail(tag + ": state tree invalid");
      const auto stitched = stitch_multi_tree(st, norm);
      if (!check_good_multi_tree(stitched, norm).empty()) v.fail(tag + ": stitched tree not good");
      if (multi_tree_cost(stitched, norm) != ex.cost || st.cost(norm) != ex.cost) v.fail(tag + ": cost changed");
      auto a = lifted.label, b = stitched.label;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) v.fail(tag + ": label multiset changed");
    }
    if (checked < 100) v.fail("only " + std::to_string(checked) + " optimal instances");
    v.detail << checked << " trees, n in [5,12]; ";
  });

  criterion(3, "LP optimum at most the oracle optimum (100 DST, 100 GST)", [](Verdict& v) {
    std::int32_t skipped = 0;
    const auto cases = dst_cases(100, 0, [](std::uint64_t s) {
      const std::int32_t n = 5 + static_cast<std::int32_t>(s % 6);
      return DstGenParams{n, n + 3, 2 + static_cast<std::int32_t>(s % 3), 2, 1, 9, s};
    }, skipped);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : cases) {
      const auto prep = prepare_dst(c.inst, c.h, kDstNodeCap);
      const double opt = static_cast<double>(c.opt);
      worst = std::max(worst, (prep.solution.objective - opt) / std::max(1.0, opt));
      if (prep.solution.objective > opt + kLpRelTol * std::max(1.0, opt)) v.fail("DST LP above oracle");
    }
    if (cases.size() < 100) v.fail("only " + std::to_string(cases.size()) + " DST instances");
    int gst = 0;
    for (std::uint64_t s = 0; gst < 100 && s < 2000; ++s) {
      const auto inst = gen_gst(mid_gst(s));
      const auto ex = exact_gst(inst);
      if (ex.status != ExactStatus::kOptimal) continue;
      ++gst;
      const double lp = prepare_gst(inst).lp_cost;
      const double opt = static_cast<double>(ex.cost);
      worst = std::max(worst, (lp - opt) / std::max(1.0, opt));
      if (lp > opt + kLpRelTol * std::max(1.0, opt)) v.fail("GST LP above oracle, seed " + std::to_string(s));
    }
    if (gst < 100) v.fail("only " + std::to_string(gst) + " GST instances");
    v.detail << cases.size() << " DST (n<=10, " << skipped << " skipped over the node cap), " << gst
             << " GST (n<=60, k<=8); max (lp-opt)/opt " << fmt("%.2e", worst) << "; ";
  });

  criterion(4, "rounding marginals match the fractional values on 20 DST instances", [&](Verdict& v) {
    std::int64_t checks = 0, fractional = 0;
    for (const auto& d : dst_suite) checks += d.prep.tree.size();
    const double z = family_z(checks);
    std::int64_t outside_plain = 0;
    double worst = 0.0;
    for (const auto& d : dst_suite) {
      const DstRounder rounder(d.prep.tree, d.prep.node_x);
      std::vector<std::int64_t> hits(static_cast<std::size_t>(d.prep.tree.size()), 0);
      for (std::int64_t i = 0; i < kTrials; ++i) {
        Rng rng = Rng::stream(40, static_cast<std::uint64_t>(i));
        for (auto p : rounder.sample(rng)) ++hits[static_cast<std::size_t>(p)];
      }
      for (std::int32_t p = 0; p < d.prep.tree.size(); ++p) {
        const double x = std::clamp(d.prep.node_x[static_cast<std::size_t>(p)], 0.0, 1.0);
        const double f = static_cast<double>(hits[static_cast<std::size_t>(p)]) / kTrials;
        const double sigma = bernoulli_sigma(x, kTrials);
        if (x > kProbSlack && x < 1.0 - kProbSlack) {
          ++fractional;
          worst = std::max(worst, std::abs(f - x) / sigma);
        }
        if (std::abs(f - x) > kSigmas * sigma + kProbSlack) ++outside_plain;
        if (std::abs(f - x) > z * sigma + kProbSlack) v.fail("node " + std::to_string(p) + fmt(" f=%.4f x=%.4f", f, x));
      }
    }
    if (fractional == 0) v.fail("no fractional node values");
    v.detail << dst_suite.size() << " instances (" << dst_skipped << " skipped over the node cap), " << checks
             << " nodes, " << fractional << " fractional; family-wise 3 sigma band is " << fmt("%.2f", z)
             << " sigma per node; max z " << fmt("%.2f", worst) << "; " << outside_plain << " nodes beyond 3 sigma; ";
  });

  std::vector<DstTrialStats> dst_stats;
  for (const auto& d : dst_suite) dst_stats.push_back(dst_trials(d.prep, kTrials, 50, true));

  criterion(5, "terminal hit rate at least 1/(h+1) - 3 sigma", [&](Verdict& v) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& st : dst_stats)
      for (double p : st.terminal_hit_rate) {
        const double lo = st.coverage_bound - kSigmas * bernoulli_sigma(p, st.trials);
        margin = std::min(margin, p - lo);
        if (p < lo) v.fail(fmt("hit %.4f below %.4f", p, lo));
      }
    v.detail << dst_stats.size() << " instances x " << kTrials << " roundings; min margin " << fmt("%.4f", margin)
             << "; ";
  });

  criterion(6, "mean rounding cost at most the point cost + 3 sigma", [&](Verdict& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dst_stats.size(); ++i) {
      const auto& st = dst_stats[i];
      const double band = kSigmas * st.cost_stddev / std::sqrt(static_cast<double>(st.trials));
      worst = std::max(worst, st.cost_mean - dst_suite[i].point_cost - band);
      if (st.cost_mean > dst_suite[i].point_cost + band + 1e-9)
        v.fail(fmt("mean %.4f above %.4f + %.4f", st.cost_mean, dst_suite[i].point_cost, band));
    }
    v.detail << "max (mean - cost - 3 sigma) " << fmt("%.4f", worst) << "; ";
  });

  criterion(7, "E[exp(s m_v)] at most 1 + 2/h' + 3 sigma", [&](Verdict& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& st : dst_stats)
      for (std::size_t u = 0; u < st.mgf.mean.size(); ++u) {
        const double band = kSigmas * st.mgf.stddev[u] / std::sqrt(static_cast<double>(st.mgf.trials));
        worst = std::max(worst, st.mgf.mean[u] - st.mgf_bound - band);
        if (st.mgf.mean[u] > st.mgf_bound + band) v.fail(fmt("vertex mean %.4f bound %.4f", st.mgf.mean[u], st.mgf_bound));
      }
    v.detail << "max (mean - bound - 3 sigma) " << fmt("%.4f", worst) << "; ";
  });

  criterion(8, "end-to-end DST: 50 seeded runs cover all terminals in >= 80% and verify", [](Verdict& v) {
    std::int32_t skipped = 0;
    const auto cases = dst_cases(50, 5000, [](std::uint64_t s) {
      const std::int32_t n = 6 + static_cast<std::int32_t>(s % 5);
      return DstGenParams{n, n + 3, 2 + static_cast<std::int32_t>(s % 3), 2, 1, 9, s};
    }, skipped);
    int covered = 0;
    double max_ratio = 1.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto& c = cases[i];
      const auto r = run_dst(c.inst, {c.h, 0, i, kDstNodeCap, LpForm::kReduced, true, ""});
      const auto k = static_cast<std::int32_t>(c.inst.terminals.size());
      if (r.repetitions != static_cast<std::int32_t>(std::ceil((c.h + 1) * std::log(10.0 * k))))
        v.fail("Q differs from ceil((h+1) ln(10k))");
      covered += r.terminals_covered == r.terminal_count ? 1 : 0;
      const auto ver = verify_dst_tree(c.inst, r.tree_edges);
      if (!ver.ok()) v.fail("verify failed on run " + std::to_string(i));
      if (ver.cost != r.tree_cost) v.fail("reported cost differs from verified cost");
      if (ver.degree_ratio != r.degree_violations) v.fail("degree excess not reported");
      for (const auto& [u, ratio] : r.degree_violations) max_ratio = std::max(max_ratio, ratio);
    }
    if (cases.size() < 50) v.fail("only " + std::to_string(cases.size()) + " runs");
    if (covered < kDstCoverRate * static_cast<double>(cases.size())) v.fail("coverage rate too low");
    v.detail << covered << "/" << cases.size() << " runs fully covered (n in [6,10], k in [2,4], " << skipped
             << " skipped over the node cap); max degree ratio " << fmt("%.2f", max_ratio) << "; ";
  });

  criterion(9, "GST scaling invariants on every suite instance", [](Verdict& v) {
    int count = 0;
    // prepare_* with checking on throws on any P1..P6, monotonicity,
    // branching or level violation; the explicit checks repeat the last three.
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto inst = gen_gst(mid_gst(s));
      const auto lp = build_gst_lp(inst);
      check_gst_invariants(inst, prepare_gst(inst), v, "optimum seed " + std::to_string(s));
      check_gst_invariants(inst, prepare_gst_point(inst, lp.vertex_values(fractional_point(lp.model, 8, s))), v,
                           "point seed " + std::to_string(s));
      count += 2;
    }
    for (std::uint64_t s = 0; s < 6; ++s) {
      const auto inst = gen_gst(small_gamma0_gst(s));
      const auto lp = build_gst_lp(inst);
      check_gst_invariants(inst, prepare_gst_point(inst, lp.vertex_values(fractional_point(lp.model, 8, s))), v,
                           "small seed " + std::to_string(s));
      ++count;
    }
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto inst = gen_broom(big_broom(s));
      const auto lp = build_gst_lp(inst);
      check_gst_invariants(inst, prepare_gst(inst), v, "broom optimum");
      check_gst_invariants(inst, prepare_gst_point(inst, lp.vertex_values(fractional_point(lp.model, 4, s))), v,
                           "broom point");
      count += 2;
    }
    v.detail << count << " LP solutions and fractional points; ";
  });

  criterion(10, "GST per-repetition group hit rate (broom with gamma >= 1, small n with gamma = 0)", [](Verdict& v) {
    double margin = std::numeric_limits<double>::infinity();
    int gamma_max = 0;
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto inst = gen_broom(big_broom(s));
      const auto lp = build_gst_lp(inst);
      const auto prep = prepare_gst_point(inst, lp.vertex_values(fractional_point(lp.model, 4, s)));
      if (prep.scale.gamma < 1) v.fail("broom has gamma 0");
      gamma_max = std::max(gamma_max, prep.scale.gamma);
      const double alpha0 = alpha_sequence(prep.scale.L, prep.scale.gamma)[0];
      const auto st = gst_trials(inst, prep, kTrials, 60 + s);
      for (std::size_t g = 0; g < st.group_hit_rate.size(); ++g) {
        const double p = st.group_hit_rate[g];
        const double lo = alpha0 * st.z_root[g] / 2 - kSigmas * bernoulli_sigma(p, kTrials);
        margin = std::min(margin, p - lo);
        if (p < lo) v.fail(fmt("broom hit %.4f below %.4f", p, lo));
      }
    }
    double small_margin = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < 6; ++s) {
      const auto inst = gen_gst(small_gamma0_gst(s));
      const auto lp = build_gst_lp(inst);
      const auto prep = prepare_gst_point(inst, lp.vertex_values(fractional_point(lp.model, 8, s)));
      if (prep.scale.gamma != 0) v.fail("small instance has gamma above 0");
      const auto st = gst_trials(inst, prep, kTrials, 70 + s);
      for (std::size_t g = 0; g < st.group_hit_rate.size(); ++g) {
        const double p = st.group_hit_rate[g];
        const double lo = st.z_root[g] / (4.0 * prep.scale.L) - kSigmas * bernoulli_sigma(p, kTrials);
        small_margin = std::min(small_margin, p - lo);
        if (p < lo) v.fail(fmt("small hit %.4f below %.4f", p, lo));
      }
    }
    v.detail << "3 brooms with 2^15 bristles (gamma " << gamma_max << "), min margin " << fmt("%.4f", margin)
             << "; 6 instances n=60 (gamma 0), min margin " << fmt("%.4f", small_margin) << "; ";
  });

  criterion(11, "end-to-end GST: 50 seeded runs cover all groups in >= 90%, bounded cost", [](Verdict& v) {
    int covered = 0;
    double worst_ratio = 0.0, max_degree = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto inst = gen_gst(mid_gst(s + 300));
      const auto r = run_gst(inst, {0, s, LpForm::kReduced, true, -1, ""});
      covered += std::all_of(r.group_covered.begin(), r.group_covered.end(), [](auto c) { return c != 0; }) ? 1 : 0;
      if (!std::isfinite(r.max_degree_ratio)) v.fail("degree ratio not finite");
      max_degree = std::max(max_degree, r.max_degree_ratio);
      const auto ver = verify_gst_tree(inst, r.union_vertices);
      if (!ver.ok() || ver.cost != r.union_cost) v.fail("verify failed");
      if (ver.degree_ratio != r.degree_violations) v.fail("degree excess not reported");
      const double cap = 4.0 * std::ldexp(1.0, r.scale.gamma) * r.repetitions;
      if (r.lp_cost > 0) {
        worst_ratio = std::max(worst_ratio, static_cast<double>(r.union_cost) / r.lp_cost / cap);
        if (static_cast<double>(r.union_cost) > cap * r.lp_cost * (1 + 1e-9)) v.fail("union cost above 4 2^gamma M lp");
      }
    }
    if (covered < kGstCoverRate * 50) v.fail("coverage rate too low");
    v.detail << covered << "/50 runs fully covered; max union/(lp 4 2^gamma M) " << fmt("%.3f", worst_ratio)
             << "; max degree ratio " << fmt("%.2f", max_degree) << "; ";
  });

  criterion(12, "alpha recurrence bounds for L <= 64", [](Verdict& v) {
    // alpha_l = p / q in exact integers; q = (2L)^(2^(gamma - l)) stays below 2^113.
    using U = unsigned __int128;
    int checked = 0;
    for (std::int32_t L = 1; L <= 64; ++L) {
      const auto gamma = std::max(static_cast<std::int32_t>(std::floor(std::log2(L))) - 2, 0);
      const auto alpha = alpha_sequence(L, gamma);
      if (static_cast<std::int32_t>(alpha.size()) != gamma + 1) v.fail("wrong sequence length");
      U p = 1, q = static_cast<U>(2 * L);
      for (std::int32_t l = gamma; l >= 0; --l) {
        if (l < gamma) {
          // 2a - 4a^2 = (2 p q - 4 p^2) / q^2
          const U np = 2 * p * q - 4 * p * p;
          q = q * q;
          p = np;
        }
        // p / q <= 2^(gamma - l) / (2L)
        if (p * static_cast<U>(2 * L) > (static_cast<U>(1) << (gamma - l)) * q)
          v.fail("upper bound at L=" + std::to_string(L) + " l=" + std::to_string(l));
        const long double exact = static_cast<long double>(p) / static_cast<long double>(q);
        if (std::abs(static_cast<long double>(alpha[static_cast<std::size_t>(l)]) - exact) > 1e-12L * exact)
          v.fail("library value differs from exact at L=" + std::to_string(L));
        ++checked;
      }
      const long double g2 = std::ldexp(1.0L, gamma);
      const long double lower = g2 / (2.0L * L) * std::exp(-g2 / L);
      if (static_cast<long double>(p) / static_cast<long double>(q) < lower)
        v.fail("lower bound at L=" + std::to_string(L));
    }
    v.detail << checked << " (L, l) pairs; ";
  });

  std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
