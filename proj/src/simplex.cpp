// Bounded-variable revised primal simplex. The basis is factorized with a
// sparse LU and updated in product form between refactorizations.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "dbnd/error.hpp"
#include "dbnd/lp.hpp"

namespace dbnd {

namespace {

enum class VarState : std::uint8_t { kBasic, kLower, kUpper };

struct Eta {
  std::int32_t row = 0;
  double pivot = 0.0;
  std::vector<std::int32_t> index;  // nonzeros of the entering column, excluding row
  std::vector<double> value;
};

class Simplex {
 public:
  Simplex(const LPModel& model, const LPOptions& opt) : model_(model), opt_(opt) {
    m_ = model.row_count();
    n_ = model.variable_count();
    // Structural columns, then one slack per row.
    col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (const auto& row : model.rows)
      for (auto [j, a] : row.terms)
        if (a != 0.0) ++col_start_[static_cast<std::size_t>(j) + 1];
    for (std::int32_t j = 0; j < n_; ++j) col_start_[static_cast<std::size_t>(j) + 1] += col_start_[static_cast<std::size_t>(j)];
    col_row_.resize(static_cast<std::size_t>(col_start_.back()));
    col_val_.resize(col_row_.size());
    std::vector<std::int32_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (std::int32_t i = 0; i < m_; ++i)
      for (auto [j, a] : model.rows[static_cast<std::size_t>(i)].terms) {
        if (a == 0.0) continue;
        const auto k = static_cast<std::size_t>(fill[static_cast<std::size_t>(j)]++);
        col_row_[k] = i;
        col_val_[k] = a;
      }
    lo_ = model.lower;
    hi_ = model.upper;
    b_.resize(static_cast<std::size_t>(m_));
    for (std::int32_t i = 0; i < m_; ++i) {
      const auto& row = model.rows[static_cast<std::size_t>(i)];
      b_[static_cast<std::size_t>(i)] = row.rhs;
      switch (row.relation) {
        case Relation::kLessEqual: lo_.push_back(0.0); hi_.push_back(kInfinity); break;
        case Relation::kGreaterEqual: lo_.push_back(-kInfinity); hi_.push_back(0.0); break;
        case Relation::kEqual: lo_.push_back(0.0); hi_.push_back(0.0); break;
      }
    }
    max_iterations_ = opt.max_iterations > 0 ? opt.max_iterations : 50LL * (m_ + n_) + 10000;
  }

  LPSolution solve() {
    const std::int32_t total0 = n_ + m_;
    x_.assign(static_cast<std::size_t>(total0), 0.0);
    state_.assign(static_cast<std::size_t>(total0), VarState::kLower);
    for (std::int32_t j = 0; j < n_; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (std::isfinite(lo_[jj])) {
        x_[jj] = lo_[jj];
        state_[jj] = VarState::kLower;
      } else {
        x_[jj] = hi_[jj];
        state_[jj] = VarState::kUpper;
      }
    }
    // Residual with every slack at zero.
    std::vector<double> r = b_;
    for (std::int32_t j = 0; j < n_; ++j) {
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (auto k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k)
        r[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] -= col_val_[static_cast<std::size_t>(k)] * xj;
    }
    basis_.assign(static_cast<std::size_t>(m_), -1);
    bool need_phase1 = false;
    for (std::int32_t i = 0; i < m_; ++i) {
      const auto s = static_cast<std::size_t>(n_ + i);
      const double ri = r[static_cast<std::size_t>(i)];
      if (ri >= lo_[s] - opt_.feasibility_tol && ri <= hi_[s] + opt_.feasibility_tol) {
        basis_[static_cast<std::size_t>(i)] = n_ + i;
        state_[s] = VarState::kBasic;
        x_[s] = ri;
        continue;
      }
      // Slack parks at its nearest bound; an artificial covers the gap.
      const double beta = ri < lo_[s] ? lo_[s] : hi_[s];
      x_[s] = beta;
      state_[s] = ri < lo_[s] ? VarState::kLower : VarState::kUpper;
      const double gap = ri - beta;
      art_row_.push_back(i);
      art_sign_.push_back(gap > 0 ? 1.0 : -1.0);
      lo_.push_back(0.0);
      hi_.push_back(kInfinity);
      x_.push_back(std::abs(gap));
      state_.push_back(VarState::kBasic);
      basis_[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(x_.size()) - 1;
      need_phase1 = true;
    }
    total_ = static_cast<std::int32_t>(x_.size());

    LPSolution sol;
    if (need_phase1) {
      std::vector<double> cost(static_cast<std::size_t>(total_), 0.0);
      for (std::int32_t a = total0; a < total_; ++a) cost[static_cast<std::size_t>(a)] = 1.0;
      if (run(cost) != LPStatus::kOptimal)
        fail(ErrorCode::kSolverFailure, "phase 1 reported an unbounded ray");
      double infeasibility = 0.0;
      for (std::int32_t a = total0; a < total_; ++a) infeasibility += x_[static_cast<std::size_t>(a)];
      if (infeasibility > opt_.feasibility_tol * std::max<double>(1.0, m_)) {
        sol.status = LPStatus::kInfeasible;
        sol.iterations = iterations_;
        return sol;
      }
      for (std::int32_t a = total0; a < total_; ++a) {
        hi_[static_cast<std::size_t>(a)] = 0.0;
        if (state_[static_cast<std::size_t>(a)] != VarState::kBasic) {
          x_[static_cast<std::size_t>(a)] = 0.0;
          state_[static_cast<std::size_t>(a)] = VarState::kLower;
        }
      }
    }
    std::vector<double> cost(static_cast<std::size_t>(total_), 0.0);
    std::copy(model_.objective.begin(), model_.objective.end(), cost.begin());
    sol.status = run(cost);
    sol.iterations = iterations_;
    if (sol.status != LPStatus::kOptimal) return sol;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    // Snap values that drifted past a bound by rounding noise.
    for (std::int32_t j = 0; j < n_; ++j) {
      auto& v = sol.x[static_cast<std::size_t>(j)];
      v = std::clamp(v, model_.lower[static_cast<std::size_t>(j)], model_.upper[static_cast<std::size_t>(j)]);
    }
    sol.objective = evaluate_objective(model_, sol.x);
    return sol;
  }

 private:
  template <typename Fn>
  void for_column(std::int32_t j, Fn&& fn) const {
    if (j < n_) {
      for (auto k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k)
        fn(col_row_[static_cast<std::size_t>(k)], col_val_[static_cast<std::size_t>(k)]);
    } else if (j < n_ + m_) {
      fn(j - n_, 1.0);
    } else {
      const auto a = static_cast<std::size_t>(j - n_ - m_);
      fn(art_row_[a], art_sign_[a]);
    }
  }

  void refactor() {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::int32_t k = 0; k < m_; ++k)
      for_column(basis_[static_cast<std::size_t>(k)], [&](std::int32_t i, double a) { triplets.emplace_back(i, k, a); });
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(triplets.begin(), triplets.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    if (lu_.info() != Eigen::Success) fail(ErrorCode::kSolverFailure, "simplex basis became singular");
    etas_.clear();
    // Fresh basic values from the nonbasic ones.
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b_.data(), m_);
    for (std::int32_t j = 0; j < total_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == VarState::kBasic) continue;
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj != 0.0) for_column(j, [&](std::int32_t i, double a) { rhs[i] -= a * xj; });
    }
    const Eigen::VectorXd xb = lu_.solve(rhs);
    for (std::int32_t k = 0; k < m_; ++k) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(k)])] = xb[k];
  }

  Eigen::VectorXd ftran(Eigen::VectorXd v) const {
    v = lu_.solve(v);
    for (const Eta& e : etas_) {
      const double vr = v[e.row] / e.pivot;
      if (vr != 0.0)
        for (std::size_t t = 0; t < e.index.size(); ++t) v[e.index[t]] -= e.value[t] * vr;
      v[e.row] = vr;
    }
    return v;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double dot = 0.0;
      for (std::size_t t = 0; t < it->index.size(); ++t) dot += it->value[t] * c[it->index[t]];
      c[it->row] = (c[it->row] - dot) / it->pivot;
    }
    return lu_.transpose().solve(c);
  }

  LPStatus run(const std::vector<double>& cost) {
    refactor();
    std::int32_t degenerate = 0;
    bool bland = false;
    while (true) {
      if (static_cast<std::int32_t>(etas_.size()) >= opt_.refactor_every) refactor();
      if (++iterations_ > max_iterations_)
        fail(ErrorCode::kSolverFailure, "simplex iteration limit " + std::to_string(max_iterations_) + " reached");
      Eigen::VectorXd cb(m_);
      for (std::int32_t k = 0; k < m_; ++k) cb[k] = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(k)])];
      const Eigen::VectorXd y = btran(cb);

      std::int32_t q = -1;
      double best = 0.0;
      double dir = 0.0;
      for (std::int32_t j = 0; j < total_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (state_[jj] == VarState::kBasic || lo_[jj] == hi_[jj]) continue;
        double d = cost[jj];
        for_column(j, [&](std::int32_t i, double a) { d -= y[i] * a; });
        double gain = 0.0, sgn = 0.0;
        if (state_[jj] == VarState::kLower && d < -opt_.optimality_tol) {
          gain = -d;
          sgn = 1.0;
        } else if (state_[jj] == VarState::kUpper && d > opt_.optimality_tol) {
          gain = d;
          sgn = -1.0;
        }
        if (sgn == 0.0) continue;
        if (bland) {
          q = j;
          dir = sgn;
          break;
        }
        if (gain > best) {
          best = gain;
          q = j;
          dir = sgn;
        }
      }
      if (q < 0) {
        if (!etas_.empty()) {
          // Confirm optimality on a fresh factorization.
          refactor();
          continue;
        }
        return LPStatus::kOptimal;
      }

      Eigen::VectorXd aq = Eigen::VectorXd::Zero(m_);
      for_column(q, [&](std::int32_t i, double a) { aq[i] += a; });
      const Eigen::VectorXd w = ftran(std::move(aq));

      // Harris two-pass ratio test; x_B moves by -dir * theta * w.
      const double tol = opt_.feasibility_tol;
      double relaxed = kInfinity;
      for (std::int32_t k = 0; k < m_; ++k) {
        const double delta = dir * w[k];
        if (std::abs(delta) <= opt_.pivot_tol) continue;
        const auto bk = static_cast<std::size_t>(basis_[static_cast<std::size_t>(k)]);
        if (delta > 0 && std::isfinite(lo_[bk])) relaxed = std::min(relaxed, (x_[bk] - lo_[bk] + tol) / delta);
        if (delta < 0 && std::isfinite(hi_[bk])) relaxed = std::min(relaxed, (hi_[bk] - x_[bk] + tol) / -delta);
      }
      std::int32_t r = -1;
      double theta = kInfinity;
      double pivot_size = 0.0;
      for (std::int32_t k = 0; k < m_; ++k) {
        const double delta = dir * w[k];
        if (std::abs(delta) <= opt_.pivot_tol) continue;
        const auto bk = static_cast<std::size_t>(basis_[static_cast<std::size_t>(k)]);
        double ratio = kInfinity;
        if (delta > 0 && std::isfinite(lo_[bk])) ratio = (x_[bk] - lo_[bk]) / delta;
        if (delta < 0 && std::isfinite(hi_[bk])) ratio = (hi_[bk] - x_[bk]) / -delta;
        if (!std::isfinite(ratio) || ratio > relaxed) continue;
        ratio = std::max(ratio, 0.0);
        const bool better = bland ? (r < 0 || ratio < theta - 1e-12 ||
                                     (ratio <= theta + 1e-12 && basis_[static_cast<std::size_t>(k)] < basis_[static_cast<std::size_t>(r)]))
                                  : std::abs(delta) > pivot_size;
        if (better) {
          r = k;
          theta = ratio;
          pivot_size = std::abs(delta);
        }
      }
      const auto qq = static_cast<std::size_t>(q);
      const double span = hi_[qq] - lo_[qq];
      const bool flip = span <= theta;
      if (flip) theta = span;
      if (!std::isfinite(theta)) return LPStatus::kUnbounded;

      if (theta > 1e-12) {
        degenerate = 0;
        bland = false;
      } else if (++degenerate >= opt_.degenerate_switch) {
        bland = true;
      }

      x_[qq] += dir * theta;
      for (std::int32_t k = 0; k < m_; ++k)
        if (w[k] != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(k)])] -= dir * theta * w[k];
      if (flip) {
        state_[qq] = dir > 0 ? VarState::kUpper : VarState::kLower;
        x_[qq] = dir > 0 ? hi_[qq] : lo_[qq];
        continue;
      }
      const auto leaving = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
      const bool to_lower = dir * w[r] > 0;
      state_[leaving] = to_lower ? VarState::kLower : VarState::kUpper;
      x_[leaving] = to_lower ? lo_[leaving] : hi_[leaving];
      basis_[static_cast<std::size_t>(r)] = q;
      state_[qq] = VarState::kBasic;
      Eta eta;
      eta.row = r;
      eta.pivot = w[r];
      for (std::int32_t k = 0; k < m_; ++k) {
        if (k == r || w[k] == 0.0) continue;
        eta.index.push_back(k);
        eta.value.push_back(w[k]);
      }
      etas_.push_back(std::move(eta));
    }
  }

  const LPModel& model_;
  const LPOptions& opt_;
  std::int32_t m_ = 0, n_ = 0, total_ = 0;
  std::vector<std::int32_t> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_, hi_, b_, x_;
  std::vector<VarState> state_;
  std::vector<std::int32_t> art_row_;
  std::vector<double> art_sign_;
  std::vector<std::int32_t> basis_;
  std::vector<Eta> etas_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::int64_t iterations_ = 0;
  std::int64_t max_iterations_ = 0;
};

}  // namespace

LPSolution solve_lp(const LPModel& model, const LPOptions& options) {
  model.validate();
  if (model.row_count() == 0) {
    // Bounds only: each variable sits at its cheaper finite bound.
    LPSolution sol;
    sol.status = LPStatus::kOptimal;
    for (std::int32_t j = 0; j < model.variable_count(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const double c = model.objective[jj];
      double v = c > 0 ? model.lower[jj] : c < 0 ? model.upper[jj] : (std::isfinite(model.lower[jj]) ? model.lower[jj] : model.upper[jj]);
      if (!std::isfinite(v)) {
        sol.status = LPStatus::kUnbounded;
        sol.x.clear();
        return sol;
      }
      sol.x.push_back(v);
    }
    sol.objective = evaluate_objective(model, sol.x);
    return sol;
  }
  return Simplex(model, options).solve();
}

}  // namespace dbnd
