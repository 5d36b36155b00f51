#include "dcuc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace dcuc::simplex {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "?";
}

namespace {
constexpr double kBig = 1e29;  // bounds at or above this act as infinite
constexpr double kPivTol = 1e-9;
constexpr int kStallLimit = 300;

bool finite_bound(double v) { return std::abs(v) < kBig; }
}  // namespace

struct BoundedSimplex::Impl {
  int m = 0, n = 0, nt = 0;
  std::vector<std::vector<std::pair<int, double>>> col;  // structural then slack
  std::vector<double> cost;                              // phase-2 objective
  std::vector<double> rhs;
  std::vector<double> lo, up;
  LpOptions opts;

  std::vector<int> basic;       // size m
  std::vector<int> pos;         // column -> basis position, -1 if nonbasic
  std::vector<VarState> state;  // size nt
  std::vector<double> xval;     // size nt

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool lu_ok = false;
  struct Eta {
    int r;
    Eigen::VectorXd w;
  };
  std::vector<Eta> etas;
  int iterations = 0;
  bool bland = false;
  int stall = 0;

  explicit Impl(const milp::MilpProblem& p, LpOptions o) : opts(o) {
    m = p.nrows();
    n = p.ncols;
    nt = n + m;
    col.resize(static_cast<std::size_t>(nt));
    for (int r = 0; r < m; ++r)
      for (const auto& [c, v] : p.rows[static_cast<std::size_t>(r)])
        if (v != 0.0) col[static_cast<std::size_t>(c)].push_back({r, v});
    for (int r = 0; r < m; ++r) col[static_cast<std::size_t>(n + r)].push_back({r, 1.0});
    cost.assign(static_cast<std::size_t>(nt), 0.0);
    for (int c = 0; c < n; ++c) cost[static_cast<std::size_t>(c)] = p.obj[static_cast<std::size_t>(c)];
    rhs = p.rhs;
    lo.assign(static_cast<std::size_t>(nt), 0.0);
    up.assign(static_cast<std::size_t>(nt), 0.0);
    for (int r = 0; r < m; ++r) {
      switch (p.sense[static_cast<std::size_t>(r)]) {
        case milp::RowSense::le: lo[static_cast<std::size_t>(n + r)] = 0.0; up[static_cast<std::size_t>(n + r)] = kInf; break;
        case milp::RowSense::eq: lo[static_cast<std::size_t>(n + r)] = 0.0; up[static_cast<std::size_t>(n + r)] = 0.0; break;
        case milp::RowSense::ge: lo[static_cast<std::size_t>(n + r)] = -kInf; up[static_cast<std::size_t>(n + r)] = 0.0; break;
      }
    }
    pos.assign(static_cast<std::size_t>(nt), -1);
    state.assign(static_cast<std::size_t>(nt), VarState::at_lower);
    xval.assign(static_cast<std::size_t>(nt), 0.0);
  }

  void set_structural_bounds(const std::vector<double>& lb, const std::vector<double>& ub) {
    if (static_cast<int>(lb.size()) != n || static_cast<int>(ub.size()) != n)
      throw ValidationError("bound vector size mismatch");
    for (int c = 0; c < n; ++c) {
      lo[static_cast<std::size_t>(c)] = lb[static_cast<std::size_t>(c)];
      up[static_cast<std::size_t>(c)] = ub[static_cast<std::size_t>(c)];
    }
  }

  double nb_value(int j) const {
    switch (state[static_cast<std::size_t>(j)]) {
      case VarState::at_lower: return lo[static_cast<std::size_t>(j)];
      case VarState::at_upper: return up[static_cast<std::size_t>(j)];
      default: return 0.0;
    }
  }

  // Nonbasic columns follow their bounds; states with a vanished bound fall
  // back to something representable.
  void settle_nonbasic() {
    for (int j = 0; j < nt; ++j) {
      if (pos[static_cast<std::size_t>(j)] >= 0) continue;
      auto sj = static_cast<std::size_t>(j);
      VarState s = state[sj];
      if (s == VarState::at_lower && !finite_bound(lo[sj]))
        s = finite_bound(up[sj]) ? VarState::at_upper : VarState::free_zero;
      if (s == VarState::at_upper && !finite_bound(up[sj]))
        s = finite_bound(lo[sj]) ? VarState::at_lower : VarState::free_zero;
      if (s == VarState::free_zero) {
        if (finite_bound(lo[sj])) s = VarState::at_lower;
        else if (finite_bound(up[sj])) s = VarState::at_upper;
      }
      state[sj] = s;
      xval[sj] = nb_value(j);
    }
  }

  void reset_slack_basis() {
    std::fill(pos.begin(), pos.end(), -1);
    basic.resize(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
      basic[static_cast<std::size_t>(r)] = n + r;
      pos[static_cast<std::size_t>(n + r)] = r;
      state[static_cast<std::size_t>(n + r)] = VarState::basic;
    }
    for (int j = 0; j < n; ++j) {
      auto sj = static_cast<std::size_t>(j);
      if (finite_bound(lo[sj])) state[sj] = VarState::at_lower;
      else if (finite_bound(up[sj])) state[sj] = VarState::at_upper;
      else state[sj] = VarState::free_zero;
    }
    settle_nonbasic();
  }

  bool load_basis(const Basis& b) {
    if (static_cast<int>(b.basic.size()) != m || static_cast<int>(b.state.size()) != nt)
      return false;
    basic = b.basic;
    state = b.state;
    std::fill(pos.begin(), pos.end(), -1);
    for (int r = 0; r < m; ++r) {
      int c = basic[static_cast<std::size_t>(r)];
      if (c < 0 || c >= nt || pos[static_cast<std::size_t>(c)] >= 0) return false;
      pos[static_cast<std::size_t>(c)] = r;
      state[static_cast<std::size_t>(c)] = VarState::basic;
    }
    settle_nonbasic();
    return true;
  }

  bool factorize() {
    Eigen::SparseMatrix<double> B(m, m);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < m; ++r)
      for (const auto& [row, v] : col[static_cast<std::size_t>(basic[static_cast<std::size_t>(r)])])
        trip.emplace_back(row, r, v);
    B.setFromTriplets(trip.begin(), trip.end());
    lu.compute(B);
    lu_ok = lu.info() == Eigen::Success;
    etas.clear();
    return lu_ok;
  }

  void ftran(Eigen::VectorXd& v) const {
    v = lu.solve(v);
    for (const auto& e : etas) {
      double t = v[e.r] / e.w[e.r];
      v.noalias() -= t * e.w;
      v[e.r] = t;
    }
  }

  void btran(Eigen::VectorXd& v) {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double vr = v[it->r];
      double dot = it->w.dot(v);
      v[it->r] = (vr - (dot - it->w[it->r] * vr)) / it->w[it->r];
    }
    v = lu.transpose().solve(v);
  }

  void compute_basics() {
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m);
    for (int j = 0; j < nt; ++j) {
      if (pos[static_cast<std::size_t>(j)] >= 0) continue;
      double v = xval[static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for (const auto& [row, a] : col[static_cast<std::size_t>(j)]) r[row] -= a * v;
    }
    ftran(r);
    for (int i = 0; i < m; ++i) xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(i)])] = r[i];
  }

  bool refactor() {
    if (!factorize()) return false;
    compute_basics();
    return true;
  }

  Eigen::VectorXd column_dense(int j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
    for (const auto& [row, v] : col[static_cast<std::size_t>(j)]) a[row] = v;
    return a;
  }

  double col_dot(int j, const Eigen::VectorXd& y) const {
    double d = 0.0;
    for (const auto& [row, v] : col[static_cast<std::size_t>(j)]) d += v * y[row];
    return d;
  }

  // Applies the basis change: q enters at position r_pos, the displaced
  // column leaves to `leave_state`, every basic value has moved by -t*s*w.
  bool pivot(int q, int r_pos, const Eigen::VectorXd& w, double t, int s) {
    for (int i = 0; i < m; ++i)
      xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(i)])] -= t * s * w[i];
    double enter_val = nb_value(q) + s * t;
    int leave = basic[static_cast<std::size_t>(r_pos)];
    basic[static_cast<std::size_t>(r_pos)] = q;
    pos[static_cast<std::size_t>(q)] = r_pos;
    pos[static_cast<std::size_t>(leave)] = -1;
    state[static_cast<std::size_t>(q)] = VarState::basic;
    xval[static_cast<std::size_t>(q)] = enter_val;
    auto sl = static_cast<std::size_t>(leave);
    double dl = std::abs(xval[sl] - lo[sl]);
    double du = std::abs(xval[sl] - up[sl]);
    if (finite_bound(lo[sl]) && (dl <= du || !finite_bound(up[sl]))) {
      state[sl] = VarState::at_lower;
      xval[sl] = lo[sl];
    } else if (finite_bound(up[sl])) {
      state[sl] = VarState::at_upper;
      xval[sl] = up[sl];
    } else {
      state[sl] = VarState::free_zero;
      xval[sl] = 0.0;
    }
    etas.push_back({r_pos, w});
    ++iterations;
    if (static_cast<int>(etas.size()) >= opts.refactor_every) return refactor();
    return true;
  }

  // ---- primal simplex -----------------------------------------------------

  double infeasibility(int j) const {
    auto sj = static_cast<std::size_t>(j);
    if (xval[sj] < lo[sj] - opts.primal_tol) return lo[sj] - xval[sj];
    if (xval[sj] > up[sj] + opts.primal_tol) return xval[sj] - up[sj];
    return 0.0;
  }

  // 0 = phase objective optimal, 1 = iteration limit, 2 = unbounded,
  // 3 = numerical breakdown
  int primal_loop(bool phase1) {
    Eigen::VectorXd y(m), w(m);
    int retries = 0;
    while (true) {
      if (iterations >= opts.iteration_limit) return 1;
      std::vector<double> ceff;
      const std::vector<double>* cp = &cost;
      if (phase1) {
        ceff.assign(static_cast<std::size_t>(nt), 0.0);
        bool any = false;
        for (int i = 0; i < m; ++i) {
          int j = basic[static_cast<std::size_t>(i)];
          auto sj = static_cast<std::size_t>(j);
          if (xval[sj] < lo[sj] - opts.primal_tol) {
            ceff[sj] = -1.0;
            any = true;
          } else if (xval[sj] > up[sj] + opts.primal_tol) {
            ceff[sj] = 1.0;
            any = true;
          }
        }
        if (!any) return 0;
        cp = &ceff;
      }
      const std::vector<double>& c = *cp;
      for (int i = 0; i < m; ++i) y[i] = c[static_cast<std::size_t>(basic[static_cast<std::size_t>(i)])];
      btran(y);

      int q = -1, dir = 0;
      double best = opts.dual_tol;
      for (int j = 0; j < nt; ++j) {
        auto sj = static_cast<std::size_t>(j);
        if (pos[sj] >= 0 || lo[sj] == up[sj]) continue;
        double d = c[sj] - col_dot(j, y);
        double score = 0.0;
        int s = 0;
        if (state[sj] == VarState::at_lower && d < -opts.dual_tol) {
          score = -d;
          s = 1;
        } else if (state[sj] == VarState::at_upper && d > opts.dual_tol) {
          score = d;
          s = -1;
        } else if (state[sj] == VarState::free_zero && std::abs(d) > opts.dual_tol) {
          score = std::abs(d);
          s = d < 0.0 ? 1 : -1;
        }
        if (s == 0) continue;
        if (bland) {
          q = j;
          dir = s;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
          dir = s;
        }
      }
      if (q < 0) return 0;

      w = column_dense(q);
      ftran(w);

      auto sq = static_cast<std::size_t>(q);
      double t_flip = kInf;
      if (finite_bound(lo[sq]) && finite_bound(up[sq])) t_flip = up[sq] - lo[sq];
      double t_best = t_flip;
      int r_pos = -1;
      double piv_best = 0.0;
      for (int i = 0; i < m; ++i) {
        double v = dir * w[i];
        if (std::abs(v) <= kPivTol) continue;
        int L = basic[static_cast<std::size_t>(i)];
        auto sl = static_cast<std::size_t>(L);
        double cur = xval[sl];
        bool below = phase1 && cur < lo[sl] - opts.primal_tol;
        bool above = phase1 && cur > up[sl] + opts.primal_tol;
        double ti = kInf;
        if (v > 0.0) {  // this basic decreases
          if (below) continue;
          double bound = above ? up[sl] : lo[sl];
          if (!finite_bound(bound)) continue;
          ti = (cur - bound) / v;
        } else {  // increases
          if (above) continue;
          double bound = below ? lo[sl] : up[sl];
          if (!finite_bound(bound)) continue;
          ti = (cur - bound) / v;
        }
        ti = std::max(ti, 0.0);
        bool better = ti < t_best - 1e-10 ||
                      (ti < t_best + 1e-10 && std::abs(v) > piv_best) ||
                      (bland && ti < t_best + 1e-10 && r_pos >= 0 &&
                       L < basic[static_cast<std::size_t>(r_pos)]);
        if (better) {
          t_best = ti;
          r_pos = i;
          piv_best = std::abs(v);
        }
      }

      if (r_pos < 0) {
        if (t_best >= kBig) {
          if (phase1) {
            if (retries++ == 0 && refactor()) continue;
            return 3;
          }
          return 2;
        }
        // bound flip
        for (int i = 0; i < m; ++i)
          xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(i)])] -= t_flip * dir * w[i];
        state[sq] = state[sq] == VarState::at_lower ? VarState::at_upper : VarState::at_lower;
        xval[sq] = nb_value(q);
        ++iterations;
        continue;
      }

      if (!pivot(q, r_pos, w, t_best, dir)) return 3;
      if (t_best <= 1e-11) {
        if (++stall > kStallLimit) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  // ---- dual simplex -------------------------------------------------------

  // 0 = primal feasible, 1 = iteration limit, 2 = (primal) infeasible,
  // 3 = numerical breakdown
  int dual_loop() {
    Eigen::VectorXd y(m), rho(m), w(m);
    while (true) {
      if (iterations >= opts.iteration_limit) return 1;
      int r_pos = -1;
      bool above = false;
      double worst = opts.primal_tol;
      for (int i = 0; i < m; ++i) {
        int j = basic[static_cast<std::size_t>(i)];
        auto sj = static_cast<std::size_t>(j);
        double v_lo = lo[sj] - xval[sj], v_up = xval[sj] - up[sj];
        if (v_lo > worst) {
          worst = v_lo;
          r_pos = i;
          above = false;
        }
        if (v_up > worst) {
          worst = v_up;
          r_pos = i;
          above = true;
        }
      }
      if (r_pos < 0) return 0;

      for (int i = 0; i < m; ++i) y[i] = cost[static_cast<std::size_t>(basic[static_cast<std::size_t>(i)])];
      btran(y);
      rho.setZero();
      rho[r_pos] = 1.0;
      btran(rho);

      int q = -1, dir = 0;
      double best_ratio = kInf, best_alpha = 0.0;
      for (int j = 0; j < nt; ++j) {
        auto sj = static_cast<std::size_t>(j);
        if (pos[sj] >= 0 || lo[sj] == up[sj]) continue;
        double alpha = col_dot(j, rho);
        if (std::abs(alpha) <= kPivTol) continue;
        // entering must push the leaving basic toward its violated bound
        int s = 0;
        if (!above) {  // xB_r must increase: delta = -s*alpha*t > 0
          if (state[sj] != VarState::at_upper && alpha < 0.0) s = 1;
          else if (state[sj] != VarState::at_lower && alpha > 0.0) s = -1;
        } else {  // xB_r must decrease
          if (state[sj] != VarState::at_upper && alpha > 0.0) s = 1;
          else if (state[sj] != VarState::at_lower && alpha < 0.0) s = -1;
        }
        if (s == 0) continue;
        double d = cost[sj] - col_dot(j, y);
        double num = state[sj] == VarState::at_upper ? std::max(-d, 0.0)
                     : state[sj] == VarState::at_lower ? std::max(d, 0.0)
                                                       : std::abs(d);
        double ratio = num / std::abs(alpha);
        bool better = ratio < best_ratio - 1e-12 ||
                      (ratio < best_ratio + 1e-12 &&
                       (bland ? (q >= 0 && j < q) : std::abs(alpha) > best_alpha));
        if (better || q < 0) {
          best_ratio = ratio;
          best_alpha = std::abs(alpha);
          q = j;
          dir = s;
        }
      }
      if (q < 0) return 2;

      w = column_dense(q);
      ftran(w);
      double wr = w[r_pos];
      if (std::abs(wr) <= kPivTol) {
        if (!etas.empty()) {
          if (!refactor()) return 3;
          continue;
        }
        return 3;
      }
      int L = basic[static_cast<std::size_t>(r_pos)];
      auto sl = static_cast<std::size_t>(L);
      double target = above ? up[sl] : lo[sl];
      double t = (xval[sl] - target) / (dir * wr);
      if (t < 0.0) t = 0.0;
      if (!pivot(q, r_pos, w, t, dir)) return 3;
      if (t <= 1e-11) {
        if (++stall > kStallLimit) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  // ---- result extraction --------------------------------------------------

  LpSolution extract(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations;
    sol.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      auto sj = static_cast<std::size_t>(j);
      double v = xval[sj];
      if (finite_bound(lo[sj])) v = std::max(v, lo[sj] - 1e-9);
      if (finite_bound(up[sj])) v = std::min(v, up[sj] + 1e-9);
      sol.x[sj] = v;
    }
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += cost[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
    sol.objective = obj;
    if (lu_ok && !basic.empty()) {
      Eigen::VectorXd y(m);
      for (int i = 0; i < m; ++i) y[i] = cost[static_cast<std::size_t>(basic[static_cast<std::size_t>(i)])];
      btran(y);
      sol.duals.assign(static_cast<std::size_t>(m), 0.0);
      for (int i = 0; i < m; ++i) sol.duals[static_cast<std::size_t>(i)] = y[i];
      sol.reduced_costs.assign(static_cast<std::size_t>(n), 0.0);
      for (int j = 0; j < n; ++j)
        sol.reduced_costs[static_cast<std::size_t>(j)] = cost[static_cast<std::size_t>(j)] - col_dot(j, y);
    }
    return sol;
  }

  LpSolution run_primal() {
    iterations = 0;
    bland = false;
    stall = 0;
    int r = primal_loop(true);
    if (r == 1) return extract(LpStatus::iteration_limit);
    if (r == 3) return extract(LpStatus::iteration_limit);
    if (r == 0) {
      double total = 0.0;
      for (int i = 0; i < m; ++i) total += infeasibility(basic[static_cast<std::size_t>(i)]);
      if (total > opts.primal_tol * std::max(1, m)) return extract(LpStatus::infeasible);
    }
    r = primal_loop(false);
    switch (r) {
      case 0: return extract(LpStatus::optimal);
      case 2: return extract(LpStatus::unbounded);
      default: return extract(LpStatus::iteration_limit);
    }
  }

  LpSolution run_dual() {
    iterations = 0;
    bland = false;
    stall = 0;
    int r = dual_loop();
    if (r == 2) return extract(LpStatus::infeasible);
    if (r != 0) return extract(LpStatus::iteration_limit);
    // polish: confirms reduced-cost optimality, repairs drift if any
    r = primal_loop(false);
    switch (r) {
      case 0: return extract(LpStatus::optimal);
      case 2: return extract(LpStatus::unbounded);
      default: return extract(LpStatus::iteration_limit);
    }
  }
};

BoundedSimplex::BoundedSimplex(const milp::MilpProblem& p, LpOptions opts)
    : impl_(std::make_unique<Impl>(p, opts)) {}

BoundedSimplex::~BoundedSimplex() = default;

LpSolution BoundedSimplex::primal(const std::vector<double>& lb, const std::vector<double>& ub,
                                  const Basis* warm) {
  impl_->set_structural_bounds(lb, ub);
  bool loaded = false;
  if (warm && warm->valid() && impl_->load_basis(*warm) && impl_->factorize()) loaded = true;
  if (!loaded) {
    impl_->reset_slack_basis();
    if (!impl_->factorize()) return impl_->extract(LpStatus::iteration_limit);
  }
  impl_->compute_basics();
  return impl_->run_primal();
}

LpSolution BoundedSimplex::dual(const std::vector<double>& lb, const std::vector<double>& ub,
                                const Basis& warm) {
  impl_->set_structural_bounds(lb, ub);
  if (!warm.valid() || !impl_->load_basis(warm) || !impl_->factorize())
    return impl_->extract(LpStatus::iteration_limit);
  impl_->compute_basics();
  return impl_->run_dual();
}

LpSolution BoundedSimplex::reoptimize(const std::vector<double>& lb,
                                      const std::vector<double>& ub) {
  if (!has_basis()) return impl_->extract(LpStatus::iteration_limit);
  impl_->set_structural_bounds(lb, ub);
  impl_->settle_nonbasic();
  impl_->compute_basics();
  return impl_->run_dual();
}

Basis BoundedSimplex::basis() const {
  Basis b;
  b.basic = impl_->basic;
  b.state = impl_->state;
  return b;
}

bool BoundedSimplex::has_basis() const { return impl_->lu_ok && !impl_->basic.empty(); }

LpSolution solve_lp(const milp::MilpProblem& p, const LpOptions& opts) {
  BoundedSimplex sx(p, opts);
  return sx.primal(p.lb, p.ub);
}

}  // namespace dcuc::simplex
