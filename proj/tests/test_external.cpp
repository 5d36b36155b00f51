#include "doctest.h"

#include <string>

#include "dcuc/engine.hpp"
#include "dcuc/external.hpp"
#include "dcuc/milp.hpp"
#include "dcuc/mps.hpp"
#include "test_support.hpp"

using namespace dcuc;
using namespace dcuc::milp;

namespace {

std::string adapter_command() {
  return std::string("python3 ") + DCUC_ADAPTER + " {problem} {solution}";
}

engine::SolverOptions with_command(std::string cmd) {
  engine::SolverOptions opts;
  opts.external_solver = std::move(cmd);
  return opts;
}

}  // namespace

TEST_CASE("scipy adapter reproduces the in-repo optimum") {
  grid::CaseData c = testsupport::tiny_coal_case(4, {40.0, 70.0, 35.0, 50.0}, 12.0, 5.0);
  auto [p, vi] = assemble(c, {}, ramp_level_from_name("low"));

  engine::SolverOptions internal;
  internal.mip_gap = 1e-9;
  engine::MilpSolution ref = engine::solve_milp(p, internal);
  REQUIRE(ref.status == engine::MilpStatus::optimal);

  engine::MilpSolution ext = external::solve_external(p, with_command(adapter_command()));
  REQUIRE(ext.status == engine::MilpStatus::optimal);
  CHECK(ext.objective == doctest::Approx(ref.objective).epsilon(1e-6));
  CHECK(check_solution(p, ext.x).within(1e-6));
  CHECK(ext.gap == 0.0);
  CHECK(ext.bound == doctest::Approx(ext.objective));
}

TEST_CASE("both handoff styles reach the adapter") {
  grid::CaseData c = testsupport::tiny_gas_case(2, {30.0, 55.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});

  // paths are appended when the command names no placeholders
  engine::MilpSolution bare =
      external::solve_external(p, with_command(std::string("python3 ") + DCUC_ADAPTER));
  engine::MilpSolution templated =
      external::solve_external(p, with_command(adapter_command()));
  REQUIRE(bare.status == engine::MilpStatus::optimal);
  REQUIRE(templated.status == engine::MilpStatus::optimal);
  CHECK(bare.objective == doctest::Approx(templated.objective));
}

TEST_CASE("adapter agreement holds across random commitment instances") {
  engine::SolverOptions internal;
  internal.mip_gap = 1e-9;
  for (uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    grid::CaseData c = testsupport::random_tiny_uc(rng);
    auto [p, vi] = assemble(c, {}, ramp_level_from_name("low"));
    engine::MilpSolution ref = engine::solve_milp(p, internal);
    engine::MilpSolution ext = external::solve_external(p, with_command(adapter_command()));
    REQUIRE(ref.status == engine::MilpStatus::optimal);
    REQUIRE(ext.status == engine::MilpStatus::optimal);
    CHECK(ext.objective == doctest::Approx(ref.objective).epsilon(1e-6));
    CHECK(check_solution(p, ext.x).within(1e-6));
  }
}

TEST_CASE("storage coupling survives the file handoff") {
  auto [p, vi] = assemble(testsupport::tiny_storage_case(), {}, {0.0, 0.0});
  engine::SolverOptions internal;
  internal.mip_gap = 1e-9;
  engine::MilpSolution ref = engine::solve_milp(p, internal);
  engine::MilpSolution ext = external::solve_external(p, with_command(adapter_command()));
  REQUIRE(ext.status == engine::MilpStatus::optimal);
  CHECK(ext.objective == doctest::Approx(ref.objective).epsilon(1e-6));
  CHECK(check_solution(p, ext.x).within(1e-6));
}

TEST_CASE("objective is recomputed from the returned point, not the file") {
  grid::CaseData c = testsupport::tiny_gas_case(1, {50.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});
  REQUIRE(p.ncols == 6);

  // a feasible but deliberately mispriced solution file: dispatch at 50 MW
  // costs 1000, the file claims -999
  std::vector<double> x(6, 0.0);
  auto set = [&](VarKind k, double v) {
    x[static_cast<std::size_t>(vi.column(k, 0, 0, 0))] = v;
  };
  set(VarKind::gen, 50.0);
  set(VarKind::commit, 1.0);
  set(VarKind::start, 1.0);
  set(VarKind::cost, 1000.0);

  mps::SolutionFile file;
  file.status = "feasible";
  file.objective = -999.0;
  file.has_objective = true;
  for (int col = 0; col < p.ncols; ++col)
    file.values.push_back({p.col_names[static_cast<std::size_t>(col)],
                           x[static_cast<std::size_t>(col)]});

  testsupport::TempDir dir;
  const std::string canned = dir.path() + "/canned.txt";
  write_text_file(canned, mps::write_solution(file));

  engine::MilpSolution out =
      external::solve_external(p, with_command("cp " + canned + " {solution}"));
  CHECK(out.status == engine::MilpStatus::feasible);
  CHECK(out.objective == doctest::Approx(1000.0));
}

TEST_CASE("process failures surface as ProcessError") {
  grid::CaseData c = testsupport::tiny_gas_case(1, {50.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});

  CHECK_THROWS_AS(external::solve_external(p, with_command("")), external::ProcessError);
  CHECK_THROWS_AS(
      external::solve_external(p, with_command("/no/such/solver {problem} {solution}")),
      external::ProcessError);
  CHECK_THROWS_AS(external::solve_external(p, with_command("exit 3")),
                  external::ProcessError);
  // clean exit without a solution file is still a protocol failure
  CHECK_THROWS_AS(external::solve_external(p, with_command("true")),
                  external::ProcessError);
}

TEST_CASE("unreadable solver output surfaces as ParseError") {
  grid::CaseData c = testsupport::tiny_gas_case(1, {50.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});
  CHECK_THROWS_AS(
      external::solve_external(p, with_command("printf 'a b c\\n' > {solution}")),
      ParseError);
}

TEST_CASE("the residual gate rejects a claimed optimum that violates rows") {
  grid::CaseData c = testsupport::tiny_gas_case(1, {50.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});
  // no values: every column defaults to zero clamped into bounds, which
  // leaves the load unserved
  CHECK_THROWS_AS(
      external::solve_external(p, with_command("printf 'status optimal\\n' > {solution}")),
      ValidationError);
}

TEST_CASE("solver verdicts pass through") {
  grid::CaseData c = testsupport::tiny_gas_case(1, {50.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});

  engine::MilpSolution inf = external::solve_external(
      p, with_command("printf 'status infeasible\\n' > {solution}"));
  CHECK(inf.status == engine::MilpStatus::infeasible);
  CHECK(inf.objective == kInf);

  CHECK_THROWS_AS(
      external::solve_external(p, with_command("printf 'status unbounded\\n' > {solution}")),
      ValidationError);
}

TEST_CASE("a genuinely infeasible model comes back infeasible from scipy") {
  grid::CaseData c = testsupport::tiny_gas_case(1, {150.0});
  auto [p, vi] = assemble(c, {}, {0.0, 0.0});
  engine::MilpSolution out = external::solve_external(p, with_command(adapter_command()));
  CHECK(out.status == engine::MilpStatus::infeasible);
}
