#include "dcuc/external.hpp"

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "dcuc/mps.hpp"

namespace dcuc::external {

namespace {

void substitute(std::string& s, const std::string& key,
                const std::string& value, bool& found) {
  std::size_t at = 0;
  while ((at = s.find(key, at)) != std::string::npos) {
    s.replace(at, key.size(), value);
    at += value.size();
    found = true;
  }
}

struct TempDir {
  std::string path;
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "dcuc-XXXXXX").string();
    if (!mkdtemp(tmpl.data()))
      throw ProcessError("cannot create a temporary directory");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace

engine::MilpSolution solve_external(const milp::MilpProblem& p,
                                    const engine::SolverOptions& opts) {
  if (opts.external_solver.empty())
    throw ProcessError("no external solver command configured");

  TempDir dir;
  const std::string problem_path = dir.path + "/problem.mps";
  const std::string solution_path = dir.path + "/solution.txt";
  write_text_file(problem_path, mps::write_mps(p));

  std::string cmd = opts.external_solver;
  bool found = false;
  substitute(cmd, "{problem}", problem_path, found);
  substitute(cmd, "{solution}", solution_path, found);
  if (!found) cmd += " " + problem_path + " " + solution_path;

  const int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc) || WEXITSTATUS(rc) != 0)
    throw ProcessError("external solver failed (exit " +
                       std::to_string(WIFEXITED(rc) ? WEXITSTATUS(rc) : rc) +
                       "): " + cmd);
  if (!std::filesystem::exists(solution_path))
    throw ProcessError("external solver wrote no solution file: " + cmd);

  const auto sol = mps::read_solution(read_text_file(solution_path));

  engine::MilpSolution out;
  if (sol.status == "infeasible") {
    out.status = engine::MilpStatus::infeasible;
    out.objective = kInf;
    out.bound = kInf;
    out.gap = 0.0;
    return out;
  }
  if (sol.status == "unbounded")
    throw ValidationError(
        "external solver reports an unbounded problem; the formulation is "
        "missing bounds");

  const auto x = mps::solution_vector(p, sol);
  const auto report = milp::check_solution(p, x);
  if (report.worst > 1e-6 || report.integrality > opts.int_tol)
    throw ValidationError("external solution rejected:\n" + report.to_text());

  out.status = sol.status == "optimal" ? engine::MilpStatus::optimal
                                       : engine::MilpStatus::feasible;
  out.x = x;
  out.objective = p.objective_value(x);
  if (out.status == engine::MilpStatus::optimal) {
    out.bound = out.objective;
    out.gap = 0.0;
  }
  return out;
}

}  // namespace dcuc::external
