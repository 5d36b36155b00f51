#pragma once

#include <string>
#include <vector>

#include "dcuc/emission.hpp"
#include "dcuc/engine.hpp"
#include "dcuc/grid.hpp"
#include "dcuc/milp.hpp"

namespace dcuc::analysis {

// Solver output rearranged by slice and scenario. Arrays are flattened as
// (k * horizon + t) * entity_count + entity; the at() helper builds that
// index. Wind units appear in the generator table with commitment pinned to
// one and zero start/stop flags.
struct DispatchSchedule {
  int horizon = 0;
  int scenarios = 0;
  double objective = 0.0;

  std::vector<double> slice_hours;        // per t
  std::vector<double> probability;        // per k
  std::vector<std::string> generator_ids; // case order, wind included
  std::vector<char> is_wind;              // per generator
  std::vector<char> is_peaker;            // per generator
  std::vector<std::string> plant_ids;     // coal parents, case order
  std::vector<std::string> storage_ids;
  int buses = 0;
  int lines = 0;
  std::vector<std::string> line_labels;   // "l{i}_{from}_{to}"

  std::vector<double> dispatch;           // K*T*G, MW
  std::vector<char> committed;            // K*T*G
  std::vector<char> started, stopped;     // K*T*G
  std::vector<double> unit1, unit2;       // K*T*M, MW
  std::vector<double> ramp_up, ramp_down; // K*T*M, alpha / beta columns, MW
  std::vector<double> charge, discharge;  // K*T*S, MW
  std::vector<double> soc;                // K*T*S, MWh
  std::vector<double> angle;              // K*T*N, rad
  std::vector<double> flow;               // K*T*L, MW
  std::vector<double> load_total;         // K*T, MW

  std::size_t at(int k, int t, int entity, int count) const {
    return (static_cast<std::size_t>(k) * horizon + t) * count + entity;
  }
};

// Physical CO2 accounting per coal plant. Each slice carries the static
// curve value (scaled by the slice length and gated on commitment), the
// ramping increment b*tau*(|in|^n2 + |out|^n2) over both half-transitions
// touching the slice, and the chord correction:  the difference between the
// closed-form hourly emission and static + increment, caused by evaluating
// the static curve along the transition path. block_tco2 is what the
// equal-area step function books for the same swings, so the gap to
// dynamic_tco2 measures the step approximation directly.
struct EmissionReport {
  int horizon = 0;
  int scenarios = 0;
  std::vector<double> probability;
  std::vector<std::string> plant_ids;

  std::vector<double> static_tco2;     // K*T*M
  std::vector<double> dynamic_tco2;    // K*T*M
  std::vector<double> transition_tco2; // K*T*M
  std::vector<double> block_tco2;      // K*T*M

  // Probability-weighted horizon totals per plant.
  std::vector<double> plant_static, plant_dynamic, plant_transition,
      plant_block, plant_total;
  double system_static = 0.0;
  double system_dynamic = 0.0;
  double system_transition = 0.0;
  double system_total = 0.0;
  double carbon_price = 0.0; // $/tCO2
  double carbon_cost = 0.0;  // carbon_price * system_total

  std::size_t at(int k, int t, int m) const {
    return (static_cast<std::size_t>(k) * horizon + t) * plant_ids.size() + m;
  }
};

// Ramping activity per coal plant. Swing sums and peaker energy are
// probability-weighted; deep-slice counts run over every (scenario, slice)
// pair. A deep slice has the plant committed with Unit I strictly below its
// ceiling minus 1e-6.
struct CycleMetrics {
  std::vector<std::string> plant_ids;
  std::vector<double> ramp_up_total;   // sum of alpha, MW
  std::vector<double> ramp_down_total; // sum of beta, MW
  std::vector<int> deep_slices;
  std::vector<double> largest_swing;   // MW, single slice
  double system_ramp_up = 0.0;
  double system_ramp_down = 0.0;
  int system_deep_slices = 0;
};

// Rearranges an accepted solution. Throws ValidationError when the solution
// carries no incumbent or when a schedule invariant fails (coal split, line
// capacity, storage bounds, energy conservation). Line flows come from the
// extracted angles through the branch susceptance matrix.
DispatchSchedule extract_schedule(const engine::MilpSolution& sol,
                                  const milp::VariableIndex& idx,
                                  const grid::CaseData& c);

// Evaluates the closed-form emission model over a schedule. Boundary rule:
// the slice before the horizon uses the plant's initial output, the slice
// after it holds the final output. When blocks is empty each plant gets the
// default equal-width step function over its ramp limit.
EmissionReport emission_accounting(
    const DispatchSchedule& sched, const grid::CaseData& c,
    double carbon_price = 0.0,
    const std::vector<std::vector<emission::EmissionBlock>>& blocks = {});

// Swing metrics per plant. With use_columns the alpha/beta columns of the
// solution are trusted (valid whenever their prices were positive in the
// solve); otherwise both are recomputed from Unit I dispatch deltas, up and
// down parts split by sign.
CycleMetrics deep_cycle_metrics(const DispatchSchedule& sched,
                                const grid::CaseData& c, bool use_columns);

struct LabeledRun {
  std::string label;
  DispatchSchedule schedule;
  EmissionReport emissions;
  CycleMetrics cycles;
};

struct ComparisonRow {
  std::string label;
  double objective = 0.0;
  double total_emission = 0.0; // tCO2
  double ramp_activity = 0.0;  // sum of alpha + beta, MW
  int deep_slices = 0;
  double peaker_energy = 0.0;  // MWh
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // sorted by label
  std::vector<std::string> flags;   // trend violations across cost levels

  std::string to_csv() const;
  std::string to_text() const; // aligned columns
};

// Side-by-side table over runs of the same case. Throws ValidationError on
// fewer than two runs or mismatched horizons / scenario counts. When the
// labels are the named ramp-cost levels, ramp activity is expected to fall
// as the level rises; increases are reported in flags.
ComparisonTable compare_scenarios(const std::vector<LabeledRun>& runs);

// Per-run CSV files (dispatch, commitment, coal_units, storage, flows) in
// the given directory, created if needed.
void write_schedule_csvs(const DispatchSchedule& sched, const std::string& dir);

// emissions.csv next to the schedule files.
void write_emissions_csv(const EmissionReport& report, const std::string& dir);

}  // namespace dcuc::analysis
