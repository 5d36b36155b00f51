#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcuc/analysis.hpp"
#include "dcuc/engine.hpp"
#include "dcuc/external.hpp"
#include "dcuc/fit.hpp"
#include "dcuc/grid.hpp"
#include "dcuc/milp.hpp"
#include "dcuc/mps.hpp"

namespace {

using nlohmann::json;
using namespace dcuc;

struct EmissionOverrides {
  std::optional<double> f0, f1, n1, b, tau, n2;

  void apply(grid::CaseData& c) const {
    for (auto& p : c.coal_plants) {
      if (f0) p.static_params.f0 = *f0;
      if (f1) p.static_params.f1 = *f1;
      if (n1) p.static_params.n1 = *n1;
      if (b) p.dynamic_params.b = *b;
      if (tau) p.dynamic_params.tau = *tau;
      if (n2) p.dynamic_params.n2 = *n2;
    }
  }
};

struct SolveConfig {
  std::string case_path;
  std::string out_dir;
  std::string levels = "zeros,low,high,very_high";
  std::string wind = "on";
  double carbon_price = 0.0;
  double damage_mult = 0.0;
  double mip_gap = 1e-4;
  double time_limit = 0.0;  // seconds, 0 = none
  std::uint64_t seed = 1;
  std::string external;
  bool emission_blocks = false;
  EmissionOverrides overrides;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void zero_wind(grid::CaseData& c) {
  for (auto& row : c.wind) std::fill(row.begin(), row.end(), 0.0);
  for (auto& s : c.scenarios)
    for (auto& row : s.wind) std::fill(row.begin(), row.end(), 0.0);
}

std::vector<std::vector<emission::EmissionBlock>> make_blocks(
    const grid::CaseData& c) {
  std::vector<std::vector<emission::EmissionBlock>> blocks;
  for (const auto& p : c.coal_plants) {
    const auto& parent = c.generator_by_id(p.generator);
    blocks.push_back(emission::build_emission_blocks(
        p.dynamic_params, emission::default_breakpoints(parent.ramp_limit)));
  }
  return blocks;
}

void probe_writable(const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string probe = dir + "/.write_probe";
  write_text_file(probe, "probe\n");
  std::filesystem::remove(probe);
}

std::string hash_hex(const std::string& data) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(data)));
  return buf;
}

engine::SolverOptions solver_options(const SolveConfig& cfg) {
  engine::SolverOptions so;
  so.mip_gap = cfg.mip_gap;
  if (cfg.time_limit > 0) so.time_limit = cfg.time_limit;
  so.external_solver = cfg.external;
  return so;
}

int cmd_solve(const SolveConfig& cfg) {
  const std::string case_text = read_text_file(cfg.case_path);
  grid::CaseData base = grid::parse_case_json(case_text);
  {
    const auto bad = grid::validate_case(base);
    if (!bad.empty()) {
      for (const auto& v : bad)
        std::cerr << "invalid case: " << v.path << ": " << v.message << "\n";
      return 1;
    }
  }
  cfg.overrides.apply(base);

  std::vector<std::string> labels =
      cfg.emission_blocks ? std::vector<std::string>{"blocks"}
                          : split_csv(cfg.levels);
  if (labels.empty()) {
    std::cerr << "no ramp-cost levels requested\n";
    return 1;
  }
  std::vector<bool> winds;
  if (cfg.wind == "on") winds = {true};
  else if (cfg.wind == "off") winds = {false};
  else if (cfg.wind == "both") winds = {true, false};
  else {
    std::cerr << "--wind must be on, off or both\n";
    return 1;
  }

  try {
    probe_writable(cfg.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "output directory not writable: " << e.what() << "\n";
    return 1;
  }

  json manifest;
  manifest["case"] = cfg.case_path;
  manifest["case_hash"] = hash_hex(case_text);
  manifest["options"] = {
      {"levels", labels},          {"wind", cfg.wind},
      {"carbon_price", cfg.carbon_price}, {"damage_mult", cfg.damage_mult},
      {"mip_gap", cfg.mip_gap},    {"time_limit", cfg.time_limit},
      {"seed", cfg.seed},          {"external_solver", cfg.external},
      {"emission_blocks", cfg.emission_blocks}};
  manifest["runs"] = json::array();

  const auto t_all = std::chrono::steady_clock::now();
  bool all_ok = true;

  for (const bool wind_on : winds) {
    grid::CaseData c = base;
    if (!wind_on) zero_wind(c);
    const std::string wtag = wind_on ? "wind_on" : "wind_off";
    const auto blocks = make_blocks(c);
    std::vector<analysis::LabeledRun> runs;

    for (const auto& label : labels) {
      json entry;
      entry["label"] = label;
      entry["wind"] = wind_on ? "on" : "off";
      try {
        milp::RampCostLevel level;
        if (!cfg.emission_blocks) level = milp::ramp_level_from_name(label);
        milp::AssembleOptions ao;
        ao.use_emission_blocks = cfg.emission_blocks;
        ao.carbon_price = cfg.carbon_price;
        ao.damage_mult = cfg.damage_mult;
        auto [p, idx] = milp::assemble(c, blocks, level, ao);

        const auto so = solver_options(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        const engine::MilpSolution sol =
            so.external_solver.empty() ? engine::solve_milp(p, so)
                                       : external::solve_external(p, so);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();

        entry["status"] = to_string(sol.status);
        entry["seconds"] = seconds;
        if (sol.status == engine::MilpStatus::optimal ||
            sol.status == engine::MilpStatus::feasible) {
          const auto residual = milp::check_solution(p, sol.x);
          entry["objective"] = sol.objective;
          entry["bound"] = sol.bound;
          entry["gap"] = sol.gap;
          entry["nodes"] = sol.node_count;
          entry["lp_iterations"] = sol.lp_iterations;
          entry["max_residual"] = residual.worst;
          if (!residual.within(1e-6))
            throw ValidationError("accepted solution fails the residual "
                                  "gate:\n" + residual.to_text());

          auto sched = analysis::extract_schedule(sol, idx, c);
          auto er = analysis::emission_accounting(sched, c, cfg.carbon_price,
                                                  blocks);
          const bool use_cols =
              cfg.emission_blocks ? cfg.carbon_price > 0
                                  : level.ru > 0 && level.rd > 0;
          auto cm = analysis::deep_cycle_metrics(sched, c, use_cols);
          const std::string rdir = cfg.out_dir + "/" + wtag + "/" + label;
          analysis::write_schedule_csvs(sched, rdir);
          analysis::write_emissions_csv(er, rdir);
          entry["emission_total"] = er.system_total;
          entry["carbon_cost"] = er.carbon_cost;
          runs.push_back({label, std::move(sched), std::move(er),
                          std::move(cm)});
          const bool ok = sol.status == engine::MilpStatus::optimal ||
                          sol.gap <= cfg.mip_gap;
          if (!ok) all_ok = false;
          std::cout << wtag << "/" << label << ": " << to_string(sol.status)
                    << " objective " << sol.objective << " gap " << sol.gap
                    << " (" << sol.node_count << " nodes, " << seconds
                    << " s)\n";
        } else {
          all_ok = false;
          std::cerr << wtag << "/" << label << ": " << to_string(sol.status)
                    << ", no schedule written\n";
        }
      } catch (const std::exception& e) {
        all_ok = false;
        entry["status"] = "error";
        entry["message"] = e.what();
        std::cerr << wtag << "/" << label << ": " << e.what() << "\n";
      }
      manifest["runs"].push_back(entry);
    }

    if (runs.size() >= 2) {
      const auto table = analysis::compare_scenarios(runs);
      const std::string wdir = cfg.out_dir + "/" + wtag;
      write_text_file(wdir + "/comparison.csv", table.to_csv());
      write_text_file(wdir + "/comparison.txt", table.to_text());
      std::cout << "\n" << wtag << " comparison:\n" << table.to_text() << "\n";
      manifest["comparison"][wtag] = {{"flags", table.flags}};
    }
  }

  manifest["seconds_total"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all)
          .count();
  write_text_file(cfg.out_dir + "/manifest.json", manifest.dump(1) + "\n");
  return all_ok ? 0 : 1;
}

int cmd_export(const SolveConfig& cfg, const std::string& label) {
  grid::CaseData c = grid::load_case(cfg.case_path);
  cfg.overrides.apply(c);
  if (cfg.wind == "off") zero_wind(c);
  milp::RampCostLevel level;
  if (!cfg.emission_blocks) level = milp::ramp_level_from_name(label);
  milp::AssembleOptions ao;
  ao.use_emission_blocks = cfg.emission_blocks;
  ao.carbon_price = cfg.carbon_price;
  ao.damage_mult = cfg.damage_mult;
  const auto [p, idx] = milp::assemble(c, make_blocks(c), level, ao);
  write_text_file(cfg.out_dir, mps::write_mps(p, c.name));
  std::cout << "wrote " << cfg.out_dir << ": " << p.ncols << " columns, "
            << p.nrows() << " rows\n";
  return 0;
}

int cmd_validate(const std::string& case_path) {
  grid::CaseData c;
  try {
    c = grid::parse_case_json(read_text_file(case_path));
  } catch (const std::exception& e) {
    std::cerr << "parse failed: " << e.what() << "\n";
    return 1;
  }
  const auto bad = grid::validate_case(c);
  if (!bad.empty()) {
    for (const auto& v : bad)
      std::cerr << v.path << ": " << v.message << "\n";
    return 1;
  }
  std::cout << "case '" << c.name << "' ok: " << c.network.bus_count()
            << " buses, " << c.network.line_count() << " lines, "
            << c.generators.size() << " generators, " << c.coal_plants.size()
            << " coal plants, " << c.storages.size() << " storages, horizon "
            << c.horizon << "\n";
  return 0;
}

int cmd_fit(const std::string& samples_path, const std::string& out_dir,
            double threshold, double g_max) {
  const auto samples = emission::samples_from_csv(read_text_file(samples_path));
  const auto sf = emission::fit_static(samples);
  std::optional<emission::DynamicFit> df;
  try {
    df = emission::fit_dynamic(samples, sf.params, threshold);
  } catch (const ValidationError& e) {
    std::cerr << "dynamic fit skipped: " << e.what() << "\n";
  }

  probe_writable(out_dir);
  write_text_file(out_dir + "/fit.json",
                  emission::fit_report_json(sf, df));

  std::ostringstream res;
  res << "g_prev,g,g_next,observed,predicted,residual\n";
  const auto pd = df ? df->params : emission::DynamicEmissionParams{};
  for (const auto& s : samples) {
    const double pred = emission::dynamic_hourly_emission(sf.params, pd,
                                                          s.g_prev, s.g,
                                                          s.g_next);
    char line[160];
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  s.g_prev, s.g, s.g_next, s.emission, pred,
                  s.emission - pred);
    res << line;
  }
  write_text_file(out_dir + "/residuals.csv", res.str());

  std::cout << "static fit: f0 " << sf.params.f0 << ", f1 " << sf.params.f1
            << ", n1 " << sf.params.n1 << " over " << sf.sample_count
            << " samples\n";
  if (df) {
    std::cout << "dynamic fit: b " << df->params.b << ", tau "
              << df->params.tau << ", n2 " << df->params.n2 << " over "
              << df->sample_count << " samples"
              << (df->identified ? "" : " (unidentified: no ramping signal)")
              << "\n";
  }
  if (g_max > 0)
    std::cout << "deep-cycle threshold " << threshold << " MW of g_max "
              << g_max << " MW: kappa = " << threshold / g_max << "\n";
  return 0;
}

int cmd_synth(const std::string& out_path,
              const emission::StaticEmissionParams& ps,
              const emission::DynamicEmissionParams& pd, double g_max,
              int count, double noise, double static_share,
              std::uint64_t seed) {
  emission::SyntheticOptions opts;
  opts.noise_sigma = noise;
  opts.static_share = static_share;
  opts.seed = seed;
  const auto samples =
      emission::generate_synthetic_samples(ps, pd, g_max, count, opts);
  write_text_file(out_path, emission::samples_to_csv(samples));
  std::cout << "wrote " << samples.size() << " samples to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep-cycling unit commitment toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  SolveConfig cfg;
  std::string export_level = "zeros";
  std::string fit_samples, fit_out = "fit_out";
  double fit_threshold = 300.0, fit_gmax = 600.0;
  std::string synth_out = "samples.csv";
  emission::StaticEmissionParams synth_ps{11.53, 0.86, 1.02};
  emission::DynamicEmissionParams synth_pd{6.12, 0.34, 0.20};
  double synth_gmax = 600.0, synth_noise = 0.0, synth_share = 0.5;
  int synth_count = 400;
  std::uint64_t synth_seed = 1;

  const auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--case", cfg.case_path, "case file")->required();
    if (with_out)
      sub->add_option("--out", cfg.out_dir, "output directory")
          ->envname("DCUC_OUT_ROOT")
          ->required();
    sub->add_option("--carbon-price", cfg.carbon_price, "$/tCO2");
    sub->add_option("--damage-mult", cfg.damage_mult,
                    "deep-cycle damage multiple of the carbon component");
    sub->add_flag("--emission-blocks", cfg.emission_blocks,
                  "price alpha/beta from the emission step function");
    sub->add_option("--wind", cfg.wind, "on, off or both");
    sub->add_option("--f0", cfg.overrides.f0, "override static f0");
    sub->add_option("--f1", cfg.overrides.f1, "override static f1");
    sub->add_option("--n1", cfg.overrides.n1, "override static exponent");
    sub->add_option("--b", cfg.overrides.b, "override dynamic b");
    sub->add_option("--tau", cfg.overrides.tau, "override transition time");
    sub->add_option("--n2", cfg.overrides.n2, "override dynamic exponent");
  };

  auto* solve = app.add_subcommand("solve", "run a ramp-cost level sweep");
  add_common(solve, true);
  solve->add_option("--levels", cfg.levels, "comma-separated level names");
  solve->add_option("--mip-gap", cfg.mip_gap, "relative optimality gap");
  solve->add_option("--time-limit", cfg.time_limit, "seconds per solve");
  solve->add_option("--seed", cfg.seed, "rng seed recorded in the manifest");
  solve->add_option("--external-solver", cfg.external,
                    "command template with {problem} and {solution}");

  auto* exp = app.add_subcommand("export", "write the problem as MPS");
  add_common(exp, true);
  exp->add_option("--level", export_level, "ramp-cost level name");

  auto* val = app.add_subcommand("validate", "check a case file");
  val->add_option("--case", cfg.case_path, "case file")->required();

  auto* fit = app.add_subcommand("fit", "fit emission parameters to samples");
  fit->add_option("--samples", fit_samples, "sample CSV")->required();
  fit->add_option("--out", fit_out, "output directory")
      ->envname("DCUC_OUT_ROOT");
  fit->add_option("--threshold", fit_threshold,
                  "fit ramping samples below this output, MW");
  fit->add_option("--gmax", fit_gmax, "plant size for the kappa note, MW");

  auto* synth = app.add_subcommand("synth", "generate synthetic samples");
  synth->add_option("--out", synth_out, "output CSV path");
  synth->add_option("--f0", synth_ps.f0, "static offset");
  synth->add_option("--f1", synth_ps.f1, "static slope");
  synth->add_option("--n1", synth_ps.n1, "static exponent");
  synth->add_option("--b", synth_pd.b, "dynamic coefficient");
  synth->add_option("--tau", synth_pd.tau, "transition time, h");
  synth->add_option("--n2", synth_pd.n2, "dynamic exponent");
  synth->add_option("--gmax", synth_gmax, "plant size, MW");
  synth->add_option("--count", synth_count, "sample count");
  synth->add_option("--noise", synth_noise, "relative noise sigma");
  synth->add_option("--static-share", synth_share, "flat-hour fraction");
  synth->add_option("--seed", synth_seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(cfg);
    if (exp->parsed()) return cmd_export(cfg, export_level);
    if (val->parsed()) return cmd_validate(cfg.case_path);
    if (fit->parsed())
      return cmd_fit(fit_samples, fit_out, fit_threshold, fit_gmax);
    if (synth->parsed())
      return cmd_synth(synth_out, synth_ps, synth_pd, synth_gmax, synth_count,
                       synth_noise, synth_share, synth_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
