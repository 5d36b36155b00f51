#pragma once

#include <stdexcept>
#include <string>

#include "dcuc/engine.hpp"
#include "dcuc/milp.hpp"

namespace dcuc::external {

// Subprocess-level failure: missing executable, nonzero exit, no solution
// file. Distinct from ParseError (unreadable solver output) and
// ValidationError (solution rejected by the residual gate).
struct ProcessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs opts.external_solver with a file-based handoff: the problem is
// exported as MPS, the command's {problem} and {solution} placeholders are
// substituted (both paths are appended when no placeholder occurs), and the
// solution file is read back. The returned point must pass check_solution
// at 1e-6 and integrality at opts.int_tol; the objective is recomputed from
// the problem, not trusted from the file.
engine::MilpSolution solve_external(const milp::MilpProblem& p,
                                    const engine::SolverOptions& opts);

}  // namespace dcuc::external
