#include "dcuc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include <Eigen/Dense>

namespace dcuc::analysis {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Cumulative emission booked by the step function for a swing of size s;
// the last rate extends past the final breakpoint.
double step_cumulative(const std::vector<emission::EmissionBlock>& blocks,
                       double s) {
  double total = 0.0;
  for (const auto& b : blocks) {
    if (s <= b.lo) return total;
    total += b.rate * (std::min(s, b.hi) - b.lo);
  }
  if (!blocks.empty() && s > blocks.back().hi)
    total += blocks.back().rate * (s - blocks.back().hi);
  return total;
}

}  // namespace

DispatchSchedule extract_schedule(const engine::MilpSolution& sol,
                                  const milp::VariableIndex& idx,
                                  const grid::CaseData& c) {
  using milp::VarKind;

  if (sol.status != engine::MilpStatus::optimal &&
      sol.status != engine::MilpStatus::feasible)
    throw ValidationError("cannot extract a schedule: solver status is " +
                          std::string(to_string(sol.status)) +
                          " with no incumbent");
  if (static_cast<int>(sol.x.size()) != idx.total())
    throw ValidationError("solution vector length does not match the case");

  const int T = idx.horizon();
  const int K = idx.scenarios();
  const int G = static_cast<int>(c.generators.size());
  const int M = static_cast<int>(c.coal_plants.size());
  const int S = static_cast<int>(c.storages.size());
  const int N = c.network.bus_count();
  const int L = c.network.line_count();
  const auto& x = sol.x;

  DispatchSchedule sc;
  sc.horizon = T;
  sc.scenarios = K;
  sc.objective = sol.objective;
  sc.slice_hours = c.slice_hours;
  for (const auto& s : c.scenarios) sc.probability.push_back(s.probability);
  sc.buses = N;
  sc.lines = L;
  for (int l = 0; l < L; ++l) {
    const auto& ln = c.network.lines[l];
    sc.line_labels.push_back("l" + std::to_string(l + 1) + "_" +
                             std::to_string(ln.from_bus) + "_" +
                             std::to_string(ln.to_bus));
  }

  // Positions of each generator inside the per-kind entity lists.
  std::vector<int> nonwind_pos(G, -1), wind_pos(G, -1);
  const auto& nw = idx.nonwind_generators();
  const auto& wg = idx.wind_generators();
  for (int j = 0; j < static_cast<int>(nw.size()); ++j) nonwind_pos[nw[j]] = j;
  for (int j = 0; j < static_cast<int>(wg.size()); ++j) wind_pos[wg[j]] = j;

  for (int i = 0; i < G; ++i) {
    const auto& g = c.generators[i];
    sc.generator_ids.push_back("g" + std::to_string(g.id));
    sc.is_wind.push_back(g.is_wind() ? 1 : 0);
    sc.is_peaker.push_back(g.is_peaker() ? 1 : 0);
  }
  for (const auto& p : c.coal_plants)
    sc.plant_ids.push_back("c" + std::to_string(p.generator));
  for (const auto& s : c.storages)
    sc.storage_ids.push_back("s" + std::to_string(s.id));

  const std::size_t kt = static_cast<std::size_t>(K) * T;
  sc.dispatch.assign(kt * G, 0.0);
  sc.committed.assign(kt * G, 0);
  sc.started.assign(kt * G, 0);
  sc.stopped.assign(kt * G, 0);
  sc.unit1.assign(kt * M, 0.0);
  sc.unit2.assign(kt * M, 0.0);
  sc.ramp_up.assign(kt * M, 0.0);
  sc.ramp_down.assign(kt * M, 0.0);
  sc.charge.assign(kt * S, 0.0);
  sc.discharge.assign(kt * S, 0.0);
  sc.soc.assign(kt * S, 0.0);
  sc.angle.assign(kt * N, 0.0);
  sc.flow.assign(kt * L, 0.0);
  sc.load_total.assign(kt, 0.0);

  const Eigen::MatrixXd bbr = grid::build_branch_susceptance(c.network);

  for (int k = 0; k < K; ++k) {
    const auto& load = c.load_for(k);
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < G; ++i) {
        const std::size_t gi = sc.at(k, t, i, G);
        if (wind_pos[i] >= 0) {
          sc.dispatch[gi] = x[idx.column(VarKind::wind, wind_pos[i], t, k)];
          sc.committed[gi] = 1;
          continue;
        }
        const int e = nonwind_pos[i];
        sc.dispatch[gi] = x[idx.column(VarKind::gen, e, t, k)];
        sc.committed[gi] = x[idx.column(VarKind::commit, e, t, k)] > 0.5;
        sc.started[gi] = x[idx.column(VarKind::start, e, t, k)] > 0.5;
        sc.stopped[gi] = x[idx.column(VarKind::stop, e, t, k)] > 0.5;
      }
      for (int m = 0; m < M; ++m) {
        const std::size_t mi = sc.at(k, t, m, M);
        sc.unit1[mi] = x[idx.column(VarKind::coal1, m, t, k)];
        sc.unit2[mi] = x[idx.column(VarKind::coal2, m, t, k)];
        sc.ramp_up[mi] = x[idx.column(VarKind::ramp_up, m, t, k)];
        sc.ramp_down[mi] = x[idx.column(VarKind::ramp_down, m, t, k)];
      }
      for (int j = 0; j < S; ++j) {
        const std::size_t si = sc.at(k, t, j, S);
        sc.charge[si] = x[idx.column(VarKind::charge, j, t, k)];
        sc.discharge[si] = x[idx.column(VarKind::discharge, j, t, k)];
        sc.soc[si] = x[idx.column(VarKind::soc, j, t, k)];
      }
      Eigen::VectorXd theta(N);
      for (int n = 0; n < N; ++n) {
        theta[n] = x[idx.column(VarKind::theta, n, t, k)];
        sc.angle[sc.at(k, t, n, N)] = theta[n];
      }
      const Eigen::VectorXd f = c.base_mva * (bbr * theta);
      for (int l = 0; l < L; ++l) sc.flow[sc.at(k, t, l, L)] = f[l];
      double d = 0.0;
      for (int n = 0; n < N; ++n) d += load[t][n];
      sc.load_total[sc.at(k, t, 0, 1)] = d;
    }
  }

  std::vector<std::string> bad;
  for (int k = 0; k < K; ++k) {
    double supplied = 0.0, demanded = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int m = 0; m < M; ++m) {
        const auto& plant = c.coal_plants[m];
        int gpos = 0;
        for (int i = 0; i < G; ++i)
          if (c.generators[i].id == plant.generator) gpos = i;
        const double split = sc.dispatch[sc.at(k, t, gpos, G)] -
                             sc.unit1[sc.at(k, t, m, M)] -
                             sc.unit2[sc.at(k, t, m, M)];
        if (std::abs(split) > 1e-6)
          bad.push_back(sc.plant_ids[m] + " slice " + std::to_string(t + 1) +
                        ": unit outputs miss the plant total by " + num(split));
      }
      for (int l = 0; l < L; ++l) {
        const double f = sc.flow[sc.at(k, t, l, L)];
        const double cap = c.network.lines[l].capacity;
        if (std::abs(f) > cap + 1e-6)
          bad.push_back(sc.line_labels[l] + " slice " + std::to_string(t + 1) +
                        ": flow " + num(f) + " exceeds capacity " + num(cap));
      }
      for (int j = 0; j < S; ++j) {
        const double e = sc.soc[sc.at(k, t, j, S)];
        if (e < -1e-9 || e > c.storages[j].energy_rating + 1e-9)
          bad.push_back(sc.storage_ids[j] + " slice " + std::to_string(t + 1) +
                        ": stored energy " + num(e) + " out of range");
      }
      double gen = 0.0;
      for (int i = 0; i < G; ++i) gen += sc.dispatch[sc.at(k, t, i, G)];
      for (int j = 0; j < S; ++j)
        gen += sc.discharge[sc.at(k, t, j, S)] - sc.charge[sc.at(k, t, j, S)];
      supplied += gen;
      demanded += sc.load_total[sc.at(k, t, 0, 1)];
    }
    if (std::abs(supplied - demanded) > 1e-6 * T)
      bad.push_back("scenario " + std::to_string(k + 1) +
                    ": generation " + num(supplied) +
                    " does not meet load " + num(demanded));
  }
  if (!bad.empty())
    throw ValidationError("schedule consistency failed: " + join(bad, "; "));
  return sc;
}

EmissionReport emission_accounting(
    const DispatchSchedule& sched, const grid::CaseData& c,
    double carbon_price,
    const std::vector<std::vector<emission::EmissionBlock>>& blocks) {
  const int T = sched.horizon;
  const int K = sched.scenarios;
  const int M = static_cast<int>(c.coal_plants.size());
  const int G = static_cast<int>(sched.generator_ids.size());

  EmissionReport er;
  er.horizon = T;
  er.scenarios = K;
  er.probability = sched.probability;
  er.plant_ids = sched.plant_ids;
  er.carbon_price = carbon_price;
  const std::size_t cells = static_cast<std::size_t>(K) * T * M;
  er.static_tco2.assign(cells, 0.0);
  er.dynamic_tco2.assign(cells, 0.0);
  er.transition_tco2.assign(cells, 0.0);
  er.block_tco2.assign(cells, 0.0);
  er.plant_static.assign(M, 0.0);
  er.plant_dynamic.assign(M, 0.0);
  er.plant_transition.assign(M, 0.0);
  er.plant_block.assign(M, 0.0);
  er.plant_total.assign(M, 0.0);

  for (int m = 0; m < M; ++m) {
    const auto& plant = c.coal_plants[m];
    const auto& parent = c.generator_by_id(plant.generator);
    int gpos = 0;
    for (int i = 0; i < G; ++i)
      if (sched.generator_ids[i] == "g" + std::to_string(parent.id)) gpos = i;
    const auto plant_blocks =
        m < static_cast<int>(blocks.size()) && !blocks[m].empty()
            ? blocks[m]
            : emission::build_emission_blocks(
                  plant.dynamic_params,
                  emission::default_breakpoints(parent.ramp_limit));
    const double unit1_start =
        grid::split_coal_plant(parent, plant).first.initial_output;

    for (int k = 0; k < K; ++k) {
      const double pr = sched.probability[k];
      for (int t = 0; t < T; ++t) {
        const double g = sched.dispatch[sched.at(k, t, gpos, G)];
        const double g_prev =
            t == 0 ? parent.initial_output
                   : sched.dispatch[sched.at(k, t - 1, gpos, G)];
        const double g_next =
            t == T - 1 ? g : sched.dispatch[sched.at(k, t + 1, gpos, G)];
        const bool on = sched.committed[sched.at(k, t, gpos, G)] != 0;
        const double lam = sched.slice_hours[t];

        const std::size_t mi = er.at(k, t, m);
        const double stat =
            emission::static_hourly_emission(plant.static_params, g);
        er.dynamic_tco2[mi] = emission::dynamic_increment(plant.dynamic_params,
                                                          g_prev, g, g_next);
        if (on) {
          er.static_tco2[mi] = lam * stat;
          er.transition_tco2[mi] =
              emission::dynamic_hourly_emission(plant.static_params,
                                                plant.dynamic_params, g_prev,
                                                g, g_next) -
              stat - er.dynamic_tco2[mi];
        }
        const double u1 = sched.unit1[sched.at(k, t, m, M)];
        const double u1_prev =
            t == 0 ? unit1_start : sched.unit1[sched.at(k, t - 1, m, M)];
        er.block_tco2[mi] = step_cumulative(plant_blocks,
                                            std::abs(u1 - u1_prev));

        er.plant_static[m] += pr * er.static_tco2[mi];
        er.plant_dynamic[m] += pr * er.dynamic_tco2[mi];
        er.plant_transition[m] += pr * er.transition_tco2[mi];
        er.plant_block[m] += pr * er.block_tco2[mi];
      }
    }
    er.plant_total[m] =
        er.plant_static[m] + er.plant_dynamic[m] + er.plant_transition[m];
    er.system_static += er.plant_static[m];
    er.system_dynamic += er.plant_dynamic[m];
    er.system_transition += er.plant_transition[m];
    er.system_total += er.plant_total[m];
  }
  er.carbon_cost = carbon_price * er.system_total;
  return er;
}

CycleMetrics deep_cycle_metrics(const DispatchSchedule& sched,
                                const grid::CaseData& c, bool use_columns) {
  const int T = sched.horizon;
  const int K = sched.scenarios;
  const int M = static_cast<int>(c.coal_plants.size());
  const int G = static_cast<int>(sched.generator_ids.size());

  CycleMetrics cm;
  cm.plant_ids = sched.plant_ids;
  cm.ramp_up_total.assign(M, 0.0);
  cm.ramp_down_total.assign(M, 0.0);
  cm.deep_slices.assign(M, 0);
  cm.largest_swing.assign(M, 0.0);

  for (int m = 0; m < M; ++m) {
    const auto& plant = c.coal_plants[m];
    const auto& parent = c.generator_by_id(plant.generator);
    int gpos = 0;
    for (int i = 0; i < G; ++i)
      if (sched.generator_ids[i] == "g" + std::to_string(parent.id)) gpos = i;
    const double unit1_start =
        grid::split_coal_plant(parent, plant).first.initial_output;

    for (int k = 0; k < K; ++k) {
      const double pr = sched.probability[k];
      for (int t = 0; t < T; ++t) {
        const std::size_t mi = sched.at(k, t, m, M);
        double up, down;
        if (use_columns) {
          up = std::max(sched.ramp_up[mi], 0.0);
          down = std::max(sched.ramp_down[mi], 0.0);
        } else {
          const double prev = t == 0
                                  ? unit1_start
                                  : sched.unit1[sched.at(k, t - 1, m, M)];
          const double d = sched.unit1[mi] - prev;
          up = std::max(d, 0.0);
          down = std::max(-d, 0.0);
        }
        cm.ramp_up_total[m] += pr * up;
        cm.ramp_down_total[m] += pr * down;
        cm.largest_swing[m] = std::max({cm.largest_swing[m], up, down});
        if (sched.committed[sched.at(k, t, gpos, G)] &&
            sched.unit1[mi] < plant.eol - 1e-6)
          ++cm.deep_slices[m];
      }
    }
    cm.system_ramp_up += cm.ramp_up_total[m];
    cm.system_ramp_down += cm.ramp_down_total[m];
    cm.system_deep_slices += cm.deep_slices[m];
  }
  return cm;
}

ComparisonTable compare_scenarios(const std::vector<LabeledRun>& runs) {
  if (runs.size() < 2)
    throw ValidationError("scenario comparison needs at least two runs");
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].schedule.horizon != runs[0].schedule.horizon ||
        runs[i].schedule.scenarios != runs[0].schedule.scenarios)
      throw ValidationError("run '" + runs[i].label +
                            "' spans a different horizon than '" +
                            runs[0].label + "'");
  }

  ComparisonTable table;
  for (const auto& r : runs) {
    const auto& sc = r.schedule;
    const int G = static_cast<int>(sc.generator_ids.size());
    double peaker = 0.0;
    for (int k = 0; k < sc.scenarios; ++k)
      for (int t = 0; t < sc.horizon; ++t)
        for (int i = 0; i < G; ++i)
          if (sc.is_peaker[i])
            peaker += sc.probability[k] * sc.slice_hours[t] *
                      sc.dispatch[sc.at(k, t, i, G)];
    ComparisonRow row;
    row.label = r.label;
    row.objective = sc.objective;
    row.total_emission = r.emissions.system_total;
    row.ramp_activity = r.cycles.system_ramp_up + r.cycles.system_ramp_down;
    row.deep_slices = r.cycles.system_deep_slices;
    row.peaker_energy = peaker;
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) {
              return a.label < b.label;
            });

  // Ramp activity should not rise as the cost level climbs.
  const std::map<std::string, int> rank{
      {"zeros", 0}, {"low", 1}, {"high", 2}, {"very_high", 3}};
  std::vector<const ComparisonRow*> ordered;
  for (const auto& [name, r] : rank) {
    (void)r;
    for (const auto& row : table.rows)
      if (row.label == name) ordered.push_back(&row);
  }
  std::sort(ordered.begin(), ordered.end(),
            [&](const ComparisonRow* a, const ComparisonRow* b) {
              return rank.at(a->label) < rank.at(b->label);
            });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->ramp_activity > ordered[i - 1]->ramp_activity + 1e-6)
      table.flags.push_back("ramp activity rises from '" +
                            ordered[i - 1]->label + "' (" +
                            num(ordered[i - 1]->ramp_activity) + " MW) to '" +
                            ordered[i]->label + "' (" +
                            num(ordered[i]->ramp_activity) + " MW)");
  }
  return table;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream out;
  out << "label,objective,total_emission,ramp_activity,deep_slices,"
         "peaker_energy\n";
  for (const auto& r : rows)
    out << r.label << ',' << num(r.objective) << ',' << num(r.total_emission)
        << ',' << num(r.ramp_activity) << ',' << r.deep_slices << ','
        << num(r.peaker_energy) << '\n';
  return out.str();
}

std::string ComparisonTable::to_text() const {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.label.size());
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof(line),
                "%-*s %14s %16s %14s %12s %14s\n", static_cast<int>(w),
                "label", "objective", "total_emission", "ramp_activity",
                "deep_slices", "peaker_energy");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line),
                  "%-*s %14.2f %16.3f %14.3f %12d %14.3f\n",
                  static_cast<int>(w), r.label.c_str(), r.objective,
                  r.total_emission, r.ramp_activity, r.deep_slices,
                  r.peaker_energy);
    out << line;
  }
  for (const auto& f : flags) out << "flag: " << f << '\n';
  return out.str();
}

namespace {

// Shared frame for the per-run files: one row per (scenario, slice).
void write_table(const std::string& path, const DispatchSchedule& sc,
                 const std::vector<std::string>& columns,
                 const std::function<void(std::ostringstream&, int, int)>& row) {
  std::ostringstream out;
  out << "scenario,slice";
  for (const auto& col : columns) out << ',' << col;
  out << '\n';
  for (int k = 0; k < sc.scenarios; ++k)
    for (int t = 0; t < sc.horizon; ++t) {
      out << (k + 1) << ',' << (t + 1);
      row(out, k, t);
      out << '\n';
    }
  write_text_file(path, out.str());
}

}  // namespace

void write_schedule_csvs(const DispatchSchedule& sc, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const int G = static_cast<int>(sc.generator_ids.size());
  const int M = static_cast<int>(sc.plant_ids.size());
  const int S = static_cast<int>(sc.storage_ids.size());

  write_table(dir + "/dispatch.csv", sc, sc.generator_ids,
              [&](std::ostringstream& out, int k, int t) {
                for (int i = 0; i < G; ++i)
                  out << ',' << num(sc.dispatch[sc.at(k, t, i, G)]);
              });

  std::vector<std::string> commit_cols;
  for (const auto& id : sc.generator_ids) {
    commit_cols.push_back(id + "_on");
    commit_cols.push_back(id + "_start");
    commit_cols.push_back(id + "_stop");
  }
  write_table(dir + "/commitment.csv", sc, commit_cols,
              [&](std::ostringstream& out, int k, int t) {
                for (int i = 0; i < G; ++i) {
                  const std::size_t gi = sc.at(k, t, i, G);
                  out << ',' << int(sc.committed[gi]) << ','
                      << int(sc.started[gi]) << ',' << int(sc.stopped[gi]);
                }
              });

  std::vector<std::string> coal_cols;
  for (const auto& id : sc.plant_ids) {
    coal_cols.push_back(id + "_unit1");
    coal_cols.push_back(id + "_unit2");
    coal_cols.push_back(id + "_alpha");
    coal_cols.push_back(id + "_beta");
  }
  write_table(dir + "/coal_units.csv", sc, coal_cols,
              [&](std::ostringstream& out, int k, int t) {
                for (int m = 0; m < M; ++m) {
                  const std::size_t mi = sc.at(k, t, m, M);
                  out << ',' << num(sc.unit1[mi]) << ',' << num(sc.unit2[mi])
                      << ',' << num(sc.ramp_up[mi]) << ','
                      << num(sc.ramp_down[mi]);
                }
              });

  std::vector<std::string> store_cols;
  for (const auto& id : sc.storage_ids) {
    store_cols.push_back(id + "_charge");
    store_cols.push_back(id + "_discharge");
    store_cols.push_back(id + "_soc");
  }
  write_table(dir + "/storage.csv", sc, store_cols,
              [&](std::ostringstream& out, int k, int t) {
                for (int j = 0; j < S; ++j) {
                  const std::size_t si = sc.at(k, t, j, S);
                  out << ',' << num(sc.charge[si]) << ','
                      << num(sc.discharge[si]) << ',' << num(sc.soc[si]);
                }
              });

  write_table(dir + "/flows.csv", sc, sc.line_labels,
              [&](std::ostringstream& out, int k, int t) {
                for (int l = 0; l < sc.lines; ++l)
                  out << ',' << num(sc.flow[sc.at(k, t, l, sc.lines)]);
              });
}

void write_emissions_csv(const EmissionReport& er, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const int M = static_cast<int>(er.plant_ids.size());
  std::ostringstream out;
  out << "scenario,slice";
  for (const auto& id : er.plant_ids)
    out << ',' << id << "_static," << id << "_dynamic," << id << "_transition,"
        << id << "_block";
  out << '\n';
  for (int k = 0; k < er.scenarios; ++k)
    for (int t = 0; t < er.horizon; ++t) {
      out << (k + 1) << ',' << (t + 1);
      for (int m = 0; m < M; ++m) {
        const std::size_t mi = er.at(k, t, m);
        out << ',' << num(er.static_tco2[mi]) << ','
            << num(er.dynamic_tco2[mi]) << ',' << num(er.transition_tco2[mi])
            << ',' << num(er.block_tco2[mi]);
      }
      out << '\n';
    }
  write_text_file(dir + "/emissions.csv", out.str());
}

}  // namespace dcuc::analysis
