#pragma once

#include <string>
#include <vector>

#include "dcuc/milp.hpp"
#include "dcuc/simplex.hpp"

namespace dcuc::engine {

enum class MilpStatus { optimal, feasible, infeasible, node_limit, time_limit };

const char* to_string(MilpStatus s);

struct MilpSolution {
  MilpStatus status = MilpStatus::infeasible;
  std::vector<double> x;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  long node_count = 0;
  int lp_iterations = 0;
};

struct SolverOptions {
  double mip_gap = 1e-4;
  double int_tol = 1e-6;
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  long node_limit = 5000000;
  double time_limit = kInf;            // seconds
  std::string branching = "most_fractional";
  std::string node_selection = "best_bound";
  std::string external_solver;         // command template, see solve_external
  bool presolve = true;
};

// Feasibility-preserving bound tightening: iterated row propagation plus a
// probing pass on the binary columns.
struct PresolveResult {
  std::vector<double> lb, ub;
  bool infeasible = false;
  int fixed_binaries = 0;
  int rounds = 0;
};

PresolveResult presolve_bounds(const milp::MilpProblem& p, const SolverOptions& opts = {});

// LP-based branch and bound over the binary columns. Deterministic for fixed
// options: most-fractional branching with lowest-index ties, best-bound node
// selection with depth-first plunging until the first incumbent.
MilpSolution solve_milp(const milp::MilpProblem& p, const SolverOptions& opts = {});

// Exact optimum by enumerating every assignment of the free binary columns
// and solving the LP restriction for each. Test oracle; refuses more than
// max_binaries free binaries.
MilpSolution brute_force_uc(const milp::MilpProblem& p, int max_binaries = 20,
                            const SolverOptions& opts = {});

}  // namespace dcuc::engine
