#pragma once

#include <memory>
#include <vector>

#include "dcuc/milp.hpp"

namespace dcuc::simplex {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> x;              // structural columns
  double objective = 0.0;
  std::vector<double> duals;          // one per row
  std::vector<double> reduced_costs;  // structural columns
  int iterations = 0;
};

enum class VarState : char { basic, at_lower, at_upper, free_zero };

// Snapshot of a basis: which columns (structural then slack) are basic and
// where every column sits. Reusable across bound changes.
struct Basis {
  std::vector<int> basic;
  std::vector<VarState> state;
  bool valid() const { return !basic.empty(); }
};

struct LpOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  int iteration_limit = 500000;
  int refactor_every = 64;
};

// Bounded-variable revised simplex over a fixed constraint matrix. Structural
// bounds are supplied per solve, so branch-and-bound nodes reuse one instance.
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const milp::MilpProblem& p, LpOptions opts = {});
  ~BoundedSimplex();
  BoundedSimplex(const BoundedSimplex&) = delete;
  BoundedSimplex& operator=(const BoundedSimplex&) = delete;

  // Two-phase primal from the slack basis (or from `warm` when given).
  LpSolution primal(const std::vector<double>& lb, const std::vector<double>& ub,
                    const Basis* warm = nullptr);

  // Dual reoptimization from a dual-feasible basis; any previously optimal
  // basis of this problem qualifies after bound changes. Returns
  // iteration_limit status on stall so callers can fall back to primal.
  LpSolution dual(const std::vector<double>& lb, const std::vector<double>& ub,
                  const Basis& warm);

  // Dual reoptimization from whatever basis the last solve left behind.
  LpSolution reoptimize(const std::vector<double>& lb, const std::vector<double>& ub);

  Basis basis() const;
  bool has_basis() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot solve of the integrality relaxation.
LpSolution solve_lp(const milp::MilpProblem& p, const LpOptions& opts = {});

}  // namespace dcuc::simplex
