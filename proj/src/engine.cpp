#include "dcuc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace dcuc::engine {

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::feasible: return "feasible";
    case MilpStatus::infeasible: return "infeasible";
    case MilpStatus::node_limit: return "node_limit";
    case MilpStatus::time_limit: return "time_limit";
  }
  return "?";
}

namespace {

constexpr double kBig = 1e29;

bool finite_bound(double v) { return std::abs(v) < kBig; }

// One propagation sweep over all rows; returns false on a provably empty box.
// Tightened continuous bounds keep a small slack so roundoff never cuts the
// optimum; binaries are rounded to exact 0/1 fixings.
bool propagate_once(const milp::MilpProblem& p, std::vector<double>& lb,
                    std::vector<double>& ub, bool& changed) {
  constexpr double slack = 1e-9;
  for (int r = 0; r < p.nrows(); ++r) {
    const auto& row = p.rows[static_cast<std::size_t>(r)];
    double b = p.rhs[static_cast<std::size_t>(r)];
    auto sense = p.sense[static_cast<std::size_t>(r)];
    double minact = 0.0, maxact = 0.0;
    int min_inf = 0, max_inf = 0;
    for (const auto& [c, a] : row) {
      auto sc = static_cast<std::size_t>(c);
      double at_min = a > 0.0 ? lb[sc] : ub[sc];
      double at_max = a > 0.0 ? ub[sc] : lb[sc];
      if (finite_bound(at_min)) minact += a * at_min; else ++min_inf;
      if (finite_bound(at_max)) maxact += a * at_max; else ++max_inf;
    }
    if (sense != milp::RowSense::ge && min_inf == 0 && minact > b + 1e-7) return false;
    if (sense != milp::RowSense::le && max_inf == 0 && maxact < b - 1e-7) return false;
    for (const auto& [c, a] : row) {
      auto sc = static_cast<std::size_t>(c);
      // a*x <= b - (minact excluding x), from <= / = rows
      if (sense != milp::RowSense::ge) {
        double at_min = a > 0.0 ? lb[sc] : ub[sc];
        if (min_inf == 0 || (min_inf == 1 && !finite_bound(at_min))) {
          double rest = minact - (finite_bound(at_min) ? a * at_min : 0.0);
          double limit = (b - rest) / a;
          if (a > 0.0 && limit < ub[sc] - 1e-9) {
            ub[sc] = p.binary[sc] ? (limit < 1.0 - 1e-6 ? 0.0 : 1.0) : limit + slack;
            changed = true;
          } else if (a < 0.0 && limit > lb[sc] + 1e-9) {
            lb[sc] = p.binary[sc] ? (limit > 1e-6 ? 1.0 : 0.0) : limit - slack;
            changed = true;
          }
        }
      }
      // a*x >= b - (maxact excluding x), from >= / = rows
      if (sense != milp::RowSense::le) {
        double at_max = a > 0.0 ? ub[sc] : lb[sc];
        if (max_inf == 0 || (max_inf == 1 && !finite_bound(at_max))) {
          double rest = maxact - (finite_bound(at_max) ? a * at_max : 0.0);
          double limit = (b - rest) / a;
          if (a > 0.0 && limit > lb[sc] + 1e-9) {
            lb[sc] = p.binary[sc] ? (limit > 1e-6 ? 1.0 : 0.0) : limit - slack;
            changed = true;
          } else if (a < 0.0 && limit < ub[sc] - 1e-9) {
            ub[sc] = p.binary[sc] ? (limit < 1.0 - 1e-6 ? 0.0 : 1.0) : limit + slack;
            changed = true;
          }
        }
      }
      if (lb[sc] > ub[sc] + 1e-7) return false;
    }
  }
  return true;
}

bool propagate(const milp::MilpProblem& p, std::vector<double>& lb, std::vector<double>& ub,
               int max_rounds, int* rounds_out = nullptr) {
  for (int round = 0; round < max_rounds; ++round) {
    bool changed = false;
    if (!propagate_once(p, lb, ub, changed)) return false;
    if (rounds_out) *rounds_out = round + 1;
    if (!changed) break;
  }
  return true;
}

}  // namespace

PresolveResult presolve_bounds(const milp::MilpProblem& p, const SolverOptions& opts) {
  PresolveResult res;
  res.lb = p.lb;
  res.ub = p.ub;
  if (!opts.presolve) return res;
  if (!propagate(p, res.lb, res.ub, 50, &res.rounds)) {
    res.infeasible = true;
    return res;
  }
  // probing: fix binaries whose opposite value kills the box
  for (int c = 0; c < p.ncols; ++c) {
    auto sc = static_cast<std::size_t>(c);
    if (!p.binary[sc] || res.lb[sc] >= res.ub[sc] - 0.5) continue;
    std::vector<double> lb0 = res.lb, ub0 = res.ub;
    ub0[sc] = 0.0;
    bool zero_ok = propagate(p, lb0, ub0, 10);
    std::vector<double> lb1 = res.lb, ub1 = res.ub;
    lb1[sc] = 1.0;
    bool one_ok = propagate(p, lb1, ub1, 10);
    if (!zero_ok && !one_ok) {
      res.infeasible = true;
      return res;
    }
    if (!zero_ok) res.lb[sc] = 1.0;
    if (!one_ok) res.ub[sc] = 0.0;
  }
  if (!propagate(p, res.lb, res.ub, 50)) {
    res.infeasible = true;
    return res;
  }
  for (int c = 0; c < p.ncols; ++c) {
    auto sc = static_cast<std::size_t>(c);
    if (p.binary[sc] && res.lb[sc] >= res.ub[sc] - 0.5 && !(p.lb[sc] >= p.ub[sc] - 0.5))
      ++res.fixed_binaries;
  }
  return res;
}

namespace {

struct Node {
  int parent = -1;
  int col = -1;
  signed char value = 0;
  double bound = -kInf;
  int depth = 0;
};

struct OpenEntry {
  double bound;
  long id;
  bool operator>(const OpenEntry& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id > o.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const milp::MilpProblem& p, const SolverOptions& opts)
      : p_(p), opts_(opts), kernel_(p, lp_options()), start_(std::chrono::steady_clock::now()) {
    if (opts.branching != "most_fractional")
      throw ConfigError("unsupported branching rule: " + opts.branching);
    if (opts.node_selection != "best_bound")
      throw ConfigError("unsupported node selection rule: " + opts.node_selection);
  }

  simplex::LpOptions lp_options() const {
    simplex::LpOptions lo;
    lo.primal_tol = opts_.primal_tol;
    lo.dual_tol = opts_.dual_tol;
    return lo;
  }

  MilpSolution run() {
    PresolveResult pre = presolve_bounds(p_, opts_);
    if (pre.infeasible) return finish(MilpStatus::infeasible);
    root_lb_ = std::move(pre.lb);
    root_ub_ = std::move(pre.ub);

    nodes_.push_back(Node{});
    open_.push({-kBig, 0});

    bool exhausted = true;
    while (!open_.empty()) {
      if (sol_.node_count >= opts_.node_limit) return finish(MilpStatus::node_limit);
      if (elapsed() > opts_.time_limit) return finish(MilpStatus::time_limit);
      OpenEntry e = open_.top();
      open_.pop();
      // the heap minimum is the global lower bound while e stays unprocessed
      best_bound_ = std::max(best_bound_, e.bound == -kBig ? -kInf : e.bound);
      if (has_incumbent()) {
        if (e.bound >= sol_.objective - prune_eps()) break;
        if ((sol_.objective - best_bound_) / std::max(1.0, std::abs(sol_.objective)) <=
            opts_.mip_gap) {
          exhausted = false;
          break;
        }
      }
      process(static_cast<int>(e.id), e.id == 0);
    }
    if (!has_incumbent()) return finish(MilpStatus::infeasible);
    best_bound_ = exhausted ? sol_.objective : best_bound_;
    return finish(MilpStatus::optimal);
  }

 private:
  bool has_incumbent() const { return !sol_.x.empty(); }
  double prune_eps() const { return 1e-9 * std::max(1.0, std::abs(sol_.objective)); }
  double gap_now() const {
    if (!has_incumbent()) return kInf;
    double glb = open_.empty() ? sol_.objective : std::max(best_bound_, open_.top().bound);
    return std::max(0.0, (sol_.objective - glb) / std::max(1.0, std::abs(sol_.objective)));
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void node_bounds(int id, std::vector<double>& lb, std::vector<double>& ub) const {
    lb = root_lb_;
    ub = root_ub_;
    for (int cur = id; cur > 0; cur = nodes_[static_cast<std::size_t>(cur)].parent) {
      const Node& nd = nodes_[static_cast<std::size_t>(cur)];
      auto sc = static_cast<std::size_t>(nd.col);
      lb[sc] = ub[sc] = static_cast<double>(nd.value);
    }
  }

  simplex::LpSolution solve_node(const std::vector<double>& lb, const std::vector<double>& ub,
                                 bool root) {
    simplex::LpSolution s;
    if (!root && kernel_.has_basis()) {
      s = kernel_.reoptimize(lb, ub);
      if (s.status == simplex::LpStatus::optimal || s.status == simplex::LpStatus::infeasible) {
        sol_.lp_iterations += s.iterations;
        return s;
      }
    }
    s = kernel_.primal(lb, ub);
    sol_.lp_iterations += s.iterations;
    if (s.status == simplex::LpStatus::unbounded)
      throw ValidationError("relaxation is unbounded; the formulation is missing bounds");
    if (s.status == simplex::LpStatus::iteration_limit)
      throw ValidationError("LP kernel stalled; tighten tolerances or raise limits");
    return s;
  }

  int fractional_binary(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = opts_.int_tol;
    for (int c = 0; c < p_.ncols; ++c) {
      auto sc = static_cast<std::size_t>(c);
      if (!p_.binary[sc]) continue;
      double frac = std::abs(x[sc] - std::round(x[sc]));
      if (frac > best_frac + 1e-15) {
        best_frac = frac;
        best = c;
      }
    }
    return best;
  }

  void process(int id, bool root) {
    std::vector<double> lb, ub;
    node_bounds(id, lb, ub);
    // plunge: follow the rounding of the branched variable until fathomed
    int depth = nodes_[static_cast<std::size_t>(id)].depth;
    while (true) {
      auto s = solve_node(lb, ub, root && sol_.node_count == 0);
      ++sol_.node_count;
      if (s.status == simplex::LpStatus::infeasible) return;
      double bound = std::max(s.objective, nodes_[static_cast<std::size_t>(id)].bound);
      if (has_incumbent() && bound >= sol_.objective - prune_eps()) return;
      int frac = fractional_binary(s.x);
      if (frac < 0) {
        if (!has_incumbent() || s.objective < sol_.objective - prune_eps()) {
          sol_.x = s.x;
          sol_.objective = s.objective;
        }
        return;
      }
      auto sc = static_cast<std::size_t>(frac);
      signed char first = s.x[sc] >= 0.5 ? 1 : 0;
      // defer the sibling with the parent's bound as its key
      nodes_.push_back({id, frac, static_cast<signed char>(1 - first), bound, depth + 1});
      open_.push({bound, static_cast<long>(nodes_.size() - 1)});
      // dive into the preferred child in place
      nodes_.push_back({id, frac, first, bound, depth + 1});
      id = static_cast<int>(nodes_.size() - 1);
      lb[sc] = ub[sc] = static_cast<double>(first);
      ++depth;
      root = false;
      if (has_incumbent() && gap_now() <= opts_.mip_gap) return;
      if (sol_.node_count >= opts_.node_limit || elapsed() > opts_.time_limit) return;
    }
  }

  MilpSolution finish(MilpStatus status) {
    sol_.status = status;
    if (status == MilpStatus::infeasible) {
      sol_.objective = kInf;
      sol_.bound = kInf;
      sol_.gap = 0.0;
      return sol_;
    }
    if (!has_incumbent()) {
      sol_.objective = kInf;
      sol_.bound = std::max(-kInf, best_bound_);
      sol_.gap = kInf;
      return sol_;
    }
    sol_.bound = std::min(best_bound_, sol_.objective);
    sol_.gap = std::max(0.0, (sol_.objective - sol_.bound) / std::max(1.0, std::abs(sol_.objective)));
    if (status == MilpStatus::optimal && sol_.gap > opts_.mip_gap) sol_.status = MilpStatus::feasible;
    return sol_;
  }

  const milp::MilpProblem& p_;
  SolverOptions opts_;
  simplex::BoundedSimplex kernel_;
  std::chrono::steady_clock::time_point start_;
  std::vector<double> root_lb_, root_ub_;
  std::vector<Node> nodes_;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<OpenEntry>> open_;
  MilpSolution sol_;
  double best_bound_ = -kInf;
};

}  // namespace

MilpSolution solve_milp(const milp::MilpProblem& p, const SolverOptions& opts) {
  BranchAndBound bb(p, opts);
  return bb.run();
}

MilpSolution brute_force_uc(const milp::MilpProblem& p, int max_binaries,
                            const SolverOptions& opts) {
  std::vector<int> free_bins;
  for (int c = 0; c < p.ncols; ++c) {
    auto sc = static_cast<std::size_t>(c);
    if (p.binary[sc] && p.lb[sc] < p.ub[sc] - 0.5) free_bins.push_back(c);
  }
  if (static_cast<int>(free_bins.size()) > max_binaries)
    throw ConfigError("brute force refused: " + std::to_string(free_bins.size()) +
                      " free binaries exceed the limit of " + std::to_string(max_binaries));

  simplex::LpOptions lo;
  lo.primal_tol = opts.primal_tol;
  lo.dual_tol = opts.dual_tol;
  simplex::BoundedSimplex kernel(p, lo);
  MilpSolution sol;
  std::vector<double> lb = p.lb, ub = p.ub;
  unsigned long long patterns = 1ull << free_bins.size();
  bool first = true;
  for (unsigned long long bits = 0; bits < patterns; ++bits) {
    for (std::size_t i = 0; i < free_bins.size(); ++i) {
      auto sc = static_cast<std::size_t>(free_bins[i]);
      double v = (bits >> i) & 1ull ? 1.0 : 0.0;
      lb[sc] = ub[sc] = v;
    }
    simplex::LpSolution s;
    if (first) {
      s = kernel.primal(lb, ub);
      first = false;
    } else {
      s = kernel.reoptimize(lb, ub);
      if (s.status != simplex::LpStatus::optimal && s.status != simplex::LpStatus::infeasible)
        s = kernel.primal(lb, ub);
    }
    ++sol.node_count;
    sol.lp_iterations += s.iterations;
    if (s.status == simplex::LpStatus::unbounded)
      throw ValidationError("relaxation is unbounded; the formulation is missing bounds");
    if (s.status != simplex::LpStatus::optimal) continue;
    if (sol.x.empty() || s.objective < sol.objective - 1e-12) {
      sol.x = s.x;
      sol.objective = s.objective;
    }
  }
  if (sol.x.empty()) {
    sol.status = MilpStatus::infeasible;
    sol.objective = kInf;
    sol.bound = kInf;
    sol.gap = 0.0;
  } else {
    sol.status = MilpStatus::optimal;
    sol.bound = sol.objective;
    sol.gap = 0.0;
  }
  return sol;
}

}  // namespace dcuc::engine
