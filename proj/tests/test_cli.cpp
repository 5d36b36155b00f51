#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcuc/common.hpp"
#include "dcuc/emission.hpp"
#include "dcuc/engine.hpp"
#include "dcuc/fit.hpp"
#include "dcuc/grid.hpp"
#include "dcuc/milp.hpp"
#include "dcuc/mps.hpp"
#include "test_support.hpp"

using namespace dcuc;
using testsupport::run_command;
using testsupport::TempDir;

namespace {

const std::string kCli = DCUC_CLI;
const std::string kCase = DCUC_CASE_PATH;

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::string first_line(const std::string& path) {
  const std::string text = read_text_file(path);
  return text.substr(0, text.find('\n'));
}

}  // namespace

TEST_CASE("validate accepts the bundled case and reports its shape") {
  auto r = run_command(kCli + " validate --case " + kCase);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "case 'ieee30_mod' ok"));
  CHECK(contains(r.output, "30 buses"));
  CHECK(contains(r.output, "2 coal plants"));
}

TEST_CASE("validate fails on files it cannot stand behind") {
  TempDir tmp;

  auto missing = run_command(kCli + " validate --case " + tmp.file("nope.case"));
  CHECK(missing.exit_code == 1);
  CHECK(contains(missing.output, "parse failed"));

  write_text_file(tmp.file("garbage.case"), "this is not a case file\n");
  auto garbage = run_command(kCli + " validate --case " + tmp.file("garbage.case"));
  CHECK(garbage.exit_code == 1);
  CHECK(contains(garbage.output, "parse failed"));

  // well-formed JSON whose horizon disagrees with its profiles
  std::string text = read_text_file(kCase);
  const auto at = text.find("\"horizon\": 24");
  REQUIRE(at != std::string::npos);
  text.replace(at, 13, "\"horizon\": 25");
  write_text_file(tmp.file("short.case"), text);
  auto invalid = run_command(kCli + " validate --case " + tmp.file("short.case"));
  CHECK(invalid.exit_code == 1);
  CHECK_FALSE(invalid.output.empty());
}

TEST_CASE("synthetic samples are reproducible under a seed") {
  TempDir tmp;
  const std::string flags = " synth --count 150 --noise 0.05 --seed 7 --out ";
  REQUIRE(run_command(kCli + flags + tmp.file("a.csv")).exit_code == 0);
  REQUIRE(run_command(kCli + flags + tmp.file("b.csv")).exit_code == 0);
  REQUIRE(run_command(kCli + " synth --count 150 --noise 0.05 --seed 8 --out " +
                      tmp.file("c.csv"))
              .exit_code == 0);

  const std::string a = read_text_file(tmp.file("a.csv"));
  CHECK(a == read_text_file(tmp.file("b.csv")));
  CHECK(a != read_text_file(tmp.file("c.csv")));
  CHECK(emission::samples_from_csv(a).size() == 150);
}

TEST_CASE("a noiseless synth run feeds a fit that recovers its parameters") {
  TempDir tmp;
  const std::string samples = tmp.file("samples.csv");
  REQUIRE(run_command(kCli + " synth --seed 3 --out " + samples).exit_code == 0);

  const std::string fit_dir = tmp.file("fit");
  auto r = run_command(kCli + " fit --samples " + samples + " --out " + fit_dir +
                       " --threshold 300 --gmax 600");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "static fit:"));
  CHECK(contains(r.output, "dynamic fit:"));
  CHECK(contains(r.output, "kappa = 0.5"));

  const auto j = nlohmann::json::parse(read_text_file(fit_dir + "/fit.json"));
  CHECK(j["static"]["f0"].get<double>() == doctest::Approx(11.53).epsilon(1e-3));
  CHECK(j["static"]["f1"].get<double>() == doctest::Approx(0.86).epsilon(1e-3));
  CHECK(j["static"]["n1"].get<double>() == doctest::Approx(1.02).epsilon(1e-3));
  CHECK(j["dynamic"]["b"].get<double>() == doctest::Approx(6.12).epsilon(1e-2));
  CHECK(j["dynamic"]["tau"].get<double>() == doctest::Approx(0.34).epsilon(0.05));
  CHECK(j["dynamic"]["n2"].get<double>() == doctest::Approx(0.20).epsilon(1e-2));
  CHECK(j["dynamic"]["identified"].get<bool>());
  CHECK(j["dynamic"]["converged"].get<bool>());

  // noiseless residuals collapse to rounding noise
  const std::string residuals = read_text_file(fit_dir + "/residuals.csv");
  CHECK(first_line(fit_dir + "/residuals.csv") ==
        "g_prev,g,g_next,observed,predicted,residual");
  std::istringstream in(residuals);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const double resid = std::abs(std::stod(line.substr(line.rfind(',') + 1)));
    CHECK(resid <= 1e-4);
  }
  CHECK(rows == 400);
}

TEST_CASE("an exported problem re-imports and solves to the same optimum") {
  TempDir tmp;
  const std::string path = tmp.file("day.mps");
  auto r = run_command(kCli + " export --case " + kCase + " --out " + path +
                       " --level high");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "1848 columns"));

  milp::MilpProblem q = mps::read_mps(read_text_file(path));
  CHECK(q.ncols == 1848);

  grid::CaseData c = grid::load_case(kCase);
  std::vector<std::vector<emission::EmissionBlock>> blocks;
  for (const auto& plant : c.coal_plants)
    blocks.push_back(emission::build_emission_blocks(
        plant.dynamic_params,
        emission::default_breakpoints(c.generator_by_id(plant.generator).ramp_limit)));
  auto [p, vi] = milp::assemble(c, blocks, milp::ramp_level_from_name("high"));

  engine::SolverOptions opts;
  opts.mip_gap = 1e-4;
  engine::MilpSolution direct = engine::solve_milp(p, opts);
  engine::MilpSolution imported = engine::solve_milp(q, opts);
  REQUIRE(direct.status == engine::MilpStatus::optimal);
  REQUIRE(imported.status == engine::MilpStatus::optimal);
  CHECK(imported.objective == doctest::Approx(direct.objective).epsilon(3e-4));
}

TEST_CASE("a two-level sweep writes schedules, comparisons and a manifest") {
  TempDir tmp;
  const std::string out = tmp.file("runA");
  const std::string cmd = kCli + " solve --case " + kCase + " --out " + out +
                          " --levels zeros,low --wind on --mip-gap 1e-4 --seed 9";
  auto r = run_command(cmd);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "wind_on/zeros: optimal"));
  CHECK(contains(r.output, "wind_on/low: optimal"));
  CHECK(contains(r.output, "wind_on comparison:"));

  for (const char* rel :
       {"/wind_on/zeros/dispatch.csv", "/wind_on/zeros/emissions.csv",
        "/wind_on/low/coal_units.csv", "/wind_on/comparison.csv",
        "/wind_on/comparison.txt", "/manifest.json"})
    CHECK_MESSAGE(std::filesystem::exists(out + rel), rel);

  CHECK(first_line(out + "/wind_on/zeros/dispatch.csv") ==
        "scenario,slice,g1,g2,g3,g4,g5,g6,g7");

  const auto manifest = nlohmann::json::parse(read_text_file(out + "/manifest.json"));
  CHECK(manifest["case_hash"].get<std::string>() ==
        hash_hex(fnv1a(read_text_file(kCase))));
  CHECK(manifest["options"]["seed"].get<std::uint64_t>() == 9);
  CHECK(manifest["options"]["levels"] ==
        nlohmann::json::array({"zeros", "low"}));
  REQUIRE(manifest["runs"].size() == 2);
  for (const auto& run : manifest["runs"]) {
    CHECK(run["status"].get<std::string>() == "optimal");
    CHECK(run["gap"].get<double>() <= 1e-4);
    CHECK(run["max_residual"].get<double>() <= 1e-6);
  }
  // extra swing pricing cannot make the plan cheaper
  CHECK(manifest["runs"][1]["objective"].get<double>() >=
        manifest["runs"][0]["objective"].get<double>() - 1e-6);
  CHECK(manifest["comparison"]["wind_on"]["flags"].empty());

  // an identical invocation reproduces the objectives bit for bit
  const std::string out2 = tmp.file("runB");
  auto r2 = run_command(kCli + " solve --case " + kCase + " --out " + out2 +
                        " --levels zeros,low --wind on --mip-gap 1e-4 --seed 9");
  CHECK(r2.exit_code == 0);
  const auto manifest2 = nlohmann::json::parse(read_text_file(out2 + "/manifest.json"));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(manifest2["runs"][i]["objective"].get<double>() ==
          manifest["runs"][i]["objective"].get<double>());
    CHECK(manifest2["runs"][i]["nodes"].get<int>() ==
          manifest["runs"][i]["nodes"].get<int>());
  }
}

TEST_CASE("small cases run through the external adapter and the blocks lane") {
  TempDir tmp;
  grid::CaseData tiny = testsupport::tiny_coal_case(3, {30.0, 40.0, 35.0}, 5.0, 3.0);
  const std::string tiny_path = tmp.file("tiny.case");
  write_text_file(tiny_path, grid::serialize_case(tiny));

  const std::string adapted = tmp.file("adapted");
  auto ext = run_command(kCli + " solve --case " + tiny_path + " --out " + adapted +
                         " --levels low --mip-gap 1e-6 --external-solver 'python3 " +
                         DCUC_ADAPTER + " {problem} {solution}'");
  CHECK(ext.exit_code == 0);
  const auto me = nlohmann::json::parse(read_text_file(adapted + "/manifest.json"));
  REQUIRE(me["runs"].size() == 1);
  CHECK(me["runs"][0]["status"].get<std::string>() == "optimal");

  // the same case solved in-process agrees with the adapter's plan
  const std::string native = tmp.file("native");
  auto nat = run_command(kCli + " solve --case " + tiny_path + " --out " + native +
                         " --levels low --mip-gap 1e-6");
  CHECK(nat.exit_code == 0);
  const auto mn = nlohmann::json::parse(read_text_file(native + "/manifest.json"));
  CHECK(me["runs"][0]["objective"].get<double>() ==
        doctest::Approx(mn["runs"][0]["objective"].get<double>()).epsilon(1e-6));

  const std::string blocks = tmp.file("blocks");
  auto blk = run_command(kCli + " solve --case " + tiny_path + " --out " + blocks +
                         " --emission-blocks --carbon-price 30");
  CHECK(blk.exit_code == 0);
  CHECK(std::filesystem::exists(blocks + "/wind_on/blocks/dispatch.csv"));
  const auto mb = nlohmann::json::parse(read_text_file(blocks + "/manifest.json"));
  CHECK(mb["runs"][0]["label"].get<std::string>() == "blocks");
  CHECK(mb["runs"][0]["carbon_cost"].get<double>() > 0.0);
}

TEST_CASE("bad invocations fail loudly") {
  TempDir tmp;

  auto level = run_command(kCli + " solve --case " + kCase + " --out " +
                           tmp.file("x") + " --levels sideways");
  CHECK(level.exit_code == 1);
  CHECK(contains(level.output, "unknown ramp cost level"));

  auto wind = run_command(kCli + " solve --case " + kCase + " --out " +
                          tmp.file("y") + " --wind diagonal");
  CHECK(wind.exit_code == 1);
  CHECK(contains(wind.output, "on, off or both"));

  // a plain file blocks the output tree
  write_text_file(tmp.file("blocker"), "flat\n");
  auto unwritable = run_command(kCli + " solve --case " + kCase + " --out " +
                                tmp.file("blocker") + "/sub --levels zeros");
  CHECK(unwritable.exit_code == 1);
  CHECK(contains(unwritable.output, "not writable"));

  auto exp = run_command(kCli + " export --case " + kCase +
                         " --out /no/such/dir/day.mps --level zeros");
  CHECK(exp.exit_code == 1);
  CHECK(contains(exp.output, "error:"));

  auto noargs = run_command(kCli + " solve");
  CHECK(noargs.exit_code != 0);
  CHECK(contains(noargs.output, "--case"));
}
