#pragma once

// Shared helpers for the test binaries: small hand-built cases, a seeded
// random tiny-UC generator for solver oracles, subprocess and temp-dir
// plumbing, and an adaptive Simpson integrator.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dcuc/common.hpp"
#include "dcuc/grid.hpp"

namespace testsupport {

inline dcuc::grid::Network single_bus() {
  dcuc::grid::Network net;
  net.buses.push_back({1, true});
  return net;
}

inline dcuc::grid::Network chain_network(int n, double susceptance = 10.0,
                                         double capacity = 100.0) {
  dcuc::grid::Network net;
  for (int i = 1; i <= n; ++i) net.buses.push_back({i, i == 1});
  for (int i = 1; i < n; ++i) net.lines.push_back({i, i + 1, susceptance, capacity});
  return net;
}

inline dcuc::grid::GeneratorSpec gas_unit(int id, int bus, double g_min, double g_max,
                                          std::vector<dcuc::grid::OfferBlock> blocks) {
  dcuc::grid::GeneratorSpec g;
  g.id = id;
  g.bus = bus;
  g.kind = dcuc::grid::GeneratorKind::gas;
  g.g_min = g_min;
  g.g_max = g_max;
  g.ramp_limit = g_max;
  g.offer_blocks = std::move(blocks);
  return g;
}

// One bus, one always-capable gas unit, flat offer curve.
inline dcuc::grid::CaseData tiny_gas_case(int horizon, std::vector<double> load) {
  dcuc::grid::CaseData c;
  c.name = "tiny_gas";
  c.horizon = horizon;
  c.slice_hours.assign(static_cast<std::size_t>(horizon), 1.0);
  c.network = single_bus();
  c.generators.push_back(gas_unit(1, 1, 0.0, 100.0, {{60.0, 20.0}, {40.0, 45.0}}));
  for (int t = 0; t < horizon; ++t) c.load.push_back({load.at(static_cast<std::size_t>(t))});
  c.scenarios.push_back({});
  return c;
}

// One bus, one coal plant (split at eol) plus a gas backstop so every load
// profile stays feasible.
inline dcuc::grid::CaseData tiny_coal_case(int horizon, std::vector<double> load,
                                           double ru_cost = 0.0, double rd_cost = 0.0) {
  dcuc::grid::CaseData c;
  c.name = "tiny_coal";
  c.horizon = horizon;
  c.slice_hours.assign(static_cast<std::size_t>(horizon), 1.0);
  c.network = single_bus();

  dcuc::grid::GeneratorSpec coal;
  coal.id = 1;
  coal.bus = 1;
  coal.kind = dcuc::grid::GeneratorKind::coal;
  coal.g_min = 10.0;
  coal.g_max = 60.0;
  coal.ramp_limit = 30.0;
  coal.min_uptime = 1;
  coal.min_downtime = 1;
  coal.offer_blocks = {{30.0, 10.0}, {30.0, 18.0}};
  coal.initial_commitment = true;
  coal.initial_output = 30.0;
  coal.hours_in_initial_state = 4;
  c.generators.push_back(coal);

  c.generators.push_back(gas_unit(2, 1, 0.0, 80.0, {{80.0, 60.0}}));

  dcuc::grid::CoalPlantSpec plant;
  plant.generator = 1;
  plant.eol = 30.0;
  plant.static_params = {11.53, 0.86, 1.02};
  plant.dynamic_params = {6.12, 0.2, 0.2};
  plant.ramp_up_cost = ru_cost;
  plant.ramp_down_cost = rd_cost;
  c.coal_plants.push_back(plant);

  for (int t = 0; t < horizon; ++t) c.load.push_back({load.at(static_cast<std::size_t>(t))});
  c.scenarios.push_back({});
  return c;
}

// One bus, a two-tier gas unit and one storage device. The cheap tier covers
// off-peak load with room to charge; the peak hour overruns it, so shifting
// energy through the store beats the expensive tier.
inline dcuc::grid::CaseData tiny_storage_case(double charge_eff = 0.9,
                                              double discharge_eff = 0.9) {
  dcuc::grid::CaseData c;
  c.name = "tiny_storage";
  c.horizon = 6;
  c.slice_hours.assign(6, 1.0);
  c.network = single_bus();
  c.generators.push_back(gas_unit(1, 1, 0.0, 120.0, {{60.0, 10.0}, {60.0, 200.0}}));

  dcuc::grid::StorageSpec s;
  s.id = 1;
  s.bus = 1;
  s.power_rating = 25.0;
  s.energy_rating = 60.0;
  s.charge_efficiency = charge_eff;
  s.discharge_efficiency = discharge_eff;
  s.initial_energy = 0.0;
  c.storages.push_back(s);

  for (double d : {30.0, 30.0, 30.0, 100.0, 100.0, 30.0}) c.load.push_back({d});
  c.scenarios.push_back({});
  return c;
}

// Random tiny commitment instance: 1 bus, up to 3 units with one coal plant
// split in two, up to 4 slices. The (slices, extra gas units) pairs are the
// shapes whose commitment, start/stop and unit-flag columns stay within a
// 20-binary brute-force budget. Loads are drawn inside total capacity so the
// instance is always feasible.
inline dcuc::grid::CaseData random_tiny_uc(dcuc::Rng& rng) {
  static constexpr std::array<std::array<int, 2>, 4> shapes{{{3, 0}, {2, 0}, {2, 1}, {1, 2}}};
  auto [horizon, extra] = shapes[static_cast<std::size_t>(rng.uniform_int(0, 3))];

  dcuc::grid::CaseData c;
  c.name = "tiny_random";
  c.horizon = horizon;
  c.slice_hours.assign(static_cast<std::size_t>(c.horizon), 1.0);
  c.network = single_bus();

  dcuc::grid::GeneratorSpec coal;
  coal.id = 1;
  coal.bus = 1;
  coal.kind = dcuc::grid::GeneratorKind::coal;
  coal.g_min = 5.0;
  coal.g_max = 40.0;
  coal.ramp_limit = rng.uniform(20.0, 40.0);
  coal.offer_blocks = {{20.0, rng.uniform(5.0, 15.0)}, {20.0, rng.uniform(15.0, 30.0)}};
  coal.initial_commitment = true;
  coal.initial_output = rng.uniform(10.0, 30.0);
  coal.hours_in_initial_state = 3;
  c.generators.push_back(coal);

  dcuc::grid::CoalPlantSpec plant;
  plant.generator = 1;
  plant.eol = 20.0;
  plant.static_params = {11.53, 0.86, 1.02};
  plant.dynamic_params = {6.12, 0.2, 0.2};
  plant.ramp_up_cost = rng.uniform(0.0, 30.0);
  plant.ramp_down_cost = rng.uniform(0.0, 20.0);
  c.coal_plants.push_back(plant);

  for (int i = 0; i < extra; ++i) {
    auto g = gas_unit(2 + i, 1, 0.0, rng.uniform(30.0, 60.0),
                      {{30.0, rng.uniform(20.0, 40.0)}, {30.0, rng.uniform(40.0, 80.0)}});
    g.no_load_cost = rng.uniform(0.0, 5.0);
    g.startup_cost = rng.uniform(0.0, 20.0);
    c.generators.push_back(g);
  }

  for (int t = 0; t < c.horizon; ++t) {
    double lo = 10.0, hi = 35.0 + 20.0 * extra;
    c.load.push_back({rng.uniform(lo, hi)});
  }
  c.scenarios.push_back({});
  return c;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int rc = pclose(pipe);
  r.exit_code = (rc >= 256) ? rc / 256 : rc;
  return r;
}

class TempDir {
 public:
  TempDir() {
    char tmpl[] = "/tmp/dcuc_test_XXXXXX";
    char* p = mkdtemp(tmpl);
    path_ = p ? p : "/tmp";
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12, int depth = 40) {
  auto simpson = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  };
  std::function<double(double, double, double, int)> rec =
      [&](double lo, double hi, double whole, int d) {
        double mid = 0.5 * (lo + hi);
        double left = simpson(lo, mid);
        double right = simpson(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, left, d - 1) + rec(mid, hi, right, d - 1);
      };
  return rec(a, b, simpson(a, b), depth);
}

}  // namespace testsupport
