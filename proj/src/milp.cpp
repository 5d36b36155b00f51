#include "dcuc/milp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcuc::milp {

const char* to_string(VarKind k) {
  switch (k) {
    case VarKind::theta: return "th";
    case VarKind::gen: return "g";
    case VarKind::wind: return "w";
    case VarKind::commit: return "u";
    case VarKind::start: return "su";
    case VarKind::stop: return "sd";
    case VarKind::cost: return "y";
    case VarKind::coal1: return "g1";
    case VarKind::coal2: return "g2";
    case VarKind::commit1: return "u1";
    case VarKind::commit2: return "u2";
    case VarKind::ramp_up: return "a";
    case VarKind::ramp_down: return "b";
    case VarKind::cost_up: return "ya";
    case VarKind::cost_down: return "yb";
    case VarKind::charge: return "ch";
    case VarKind::discharge: return "dis";
    case VarKind::soc: return "soc";
  }
  return "?";
}

VariableIndex::VariableIndex(const grid::CaseData& c) {
  T_ = c.horizon;
  K_ = c.scenario_count();
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    if (c.generators[i].is_wind())
      windg_.push_back(static_cast<int>(i));
    else
      nonwind_.push_back(static_cast<int>(i));
  }
  int n = c.network.bus_count();
  int g = static_cast<int>(nonwind_.size());
  int w = static_cast<int>(windg_.size());
  int m = static_cast<int>(c.coal_plants.size());
  int s = static_cast<int>(c.storages.size());
  auto set = [&](VarKind kind, int entities) { count_[static_cast<int>(kind)] = entities; };
  set(VarKind::theta, n);
  set(VarKind::gen, g);
  set(VarKind::wind, w);
  set(VarKind::commit, g);
  set(VarKind::start, g);
  set(VarKind::stop, g);
  set(VarKind::cost, g);
  set(VarKind::coal1, m);
  set(VarKind::coal2, m);
  set(VarKind::commit1, m);
  set(VarKind::commit2, m);
  set(VarKind::ramp_up, m);
  set(VarKind::ramp_down, m);
  set(VarKind::cost_up, m);
  set(VarKind::cost_down, m);
  set(VarKind::charge, s);
  set(VarKind::discharge, s);
  set(VarKind::soc, s);
  int acc = 0;
  for (int i = 0; i < kKindCount; ++i) {
    offset_[i] = acc;
    acc += count_[i] * T_ * K_;
  }
  total_ = acc;
}

int VariableIndex::column(VarKind kind, int entity, int t, int k) const {
  int ki = static_cast<int>(kind);
  return offset_[ki] + (entity * T_ + t) * K_ + k;
}

ColumnKey VariableIndex::key(int column) const {
  for (int ki = kKindCount - 1; ki >= 0; --ki) {
    if (count_[ki] == 0 || column < offset_[ki]) continue;
    int rel = column - offset_[ki];
    ColumnKey key;
    key.kind = static_cast<VarKind>(ki);
    key.k = rel % K_;
    rel /= K_;
    key.t = rel % T_;
    key.entity = rel / T_;
    return key;
  }
  throw ValidationError("column index out of range: " + std::to_string(column));
}

double MilpProblem::row_activity(int r, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& [c, v] : rows[static_cast<std::size_t>(r)]) a += v * x[static_cast<std::size_t>(c)];
  return a;
}

double MilpProblem::objective_value(const std::vector<double>& x) const {
  double a = 0.0;
  for (int c = 0; c < ncols; ++c) a += obj[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
  return a;
}

RampCostLevel ramp_level_from_name(const std::string& name) {
  if (name == "zeros") return {0.0, 0.0};
  if (name == "low") return {15.0, 8.0};
  if (name == "high") return {150.0, 80.0};
  if (name == "very_high") return {450.0, 240.0};
  throw ConfigError("unknown ramp cost level: " + name +
                    " (expected zeros, low, high or very_high)");
}

std::vector<EpigraphCut> epigraph_cuts(const std::vector<grid::OfferBlock>& curve) {
  std::vector<EpigraphCut> cuts;
  double cum_q = 0.0, cum_cost = 0.0, prev_price = -kInf;
  for (const auto& b : curve) {
    if (b.price < prev_price - 1e-12)
      throw ValidationError("epigraph requires non-decreasing block prices");
    prev_price = b.price;
    // tangent at the start of this block: y = price*(x - cum_q) + cum_cost
    cuts.push_back({b.price, cum_cost - b.price * cum_q});
    cum_q += b.quantity;
    cum_cost += b.quantity * b.price;
  }
  return cuts;
}

namespace {

std::string tk_tag(int t, int k) {
  return "_t" + std::to_string(t + 1) + "_k" + std::to_string(k);
}

int add_row(MilpProblem& p, RowSense s, double rhs, RowAnnotation ann, std::string name,
            std::vector<std::pair<int, double>> terms) {
  p.rows.push_back(std::move(terms));
  p.sense.push_back(s);
  p.rhs.push_back(rhs);
  p.row_info.push_back(ann);
  p.row_names.push_back(std::move(name));
  return p.nrows() - 1;
}

}  // namespace

void add_pwl_epigraph(MilpProblem& p, const std::vector<grid::OfferBlock>& curve,
                      int x_col, int y_col, const RowAnnotation& ann,
                      const std::string& name_stem) {
  auto cuts = epigraph_cuts(curve);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    add_row(p, RowSense::le, -cuts[i].intercept, ann,
            name_stem + "_s" + std::to_string(i + 1),
            {{x_col, cuts[i].slope}, {y_col, -1.0}});
  }
}

std::pair<MilpProblem, VariableIndex> assemble(
    const grid::CaseData& c,
    const std::vector<std::vector<emission::EmissionBlock>>& blocks,
    const RampCostLevel& level, const AssembleOptions& options) {
  if (level.ru < 0.0 || level.rd < 0.0)
    throw ConfigError("ramp cost rates must be nonnegative");
  if (options.use_emission_blocks && blocks.size() != c.coal_plants.size())
    throw ConfigError("need one emission block list per coal plant");

  VariableIndex vi(c);
  const int T = vi.horizon(), K = vi.scenarios();
  const int N = c.network.bus_count();
  MilpProblem p;
  p.ncols = vi.total();
  p.obj.assign(static_cast<std::size_t>(p.ncols), 0.0);
  p.lb.assign(static_cast<std::size_t>(p.ncols), 0.0);
  p.ub.assign(static_cast<std::size_t>(p.ncols), 0.0);
  p.binary.assign(static_cast<std::size_t>(p.ncols), 0);
  p.col_info.resize(static_cast<std::size_t>(p.ncols));
  p.col_names.resize(static_cast<std::size_t>(p.ncols));

  // Pre-split every coal plant.
  std::vector<grid::GeneratorSpec> unit1, unit2;
  std::vector<int> plant_entity;  // coal plant index -> nonwind entity of the parent
  for (const auto& plant : c.coal_plants) {
    const auto& parent = c.generator_by_id(plant.generator);
    auto [a, b] = grid::split_coal_plant(parent, plant);
    unit1.push_back(std::move(a));
    unit2.push_back(std::move(b));
    int entity = -1;
    for (std::size_t i = 0; i < vi.nonwind_generators().size(); ++i)
      if (c.generators[static_cast<std::size_t>(vi.nonwind_generators()[i])].id == plant.generator)
        entity = static_cast<int>(i);
    plant_entity.push_back(entity);
  }

  auto gen_at = [&](int entity) -> const grid::GeneratorSpec& {
    return c.generators[static_cast<std::size_t>(vi.nonwind_generators()[entity])];
  };
  auto wind_at = [&](int entity) -> const grid::GeneratorSpec& {
    return c.generators[static_cast<std::size_t>(vi.wind_generators()[entity])];
  };

  // ---- bounds, integrality, objective, column annotations
  const int ref_bus = c.network.reference_bus();
  for (int col = 0; col < p.ncols; ++col) {
    ColumnKey key = vi.key(col);
    p.col_info[static_cast<std::size_t>(col)] = key;
    double pr = c.scenarios[static_cast<std::size_t>(key.k)].probability;
    double lo = 0.0, hi = 0.0, obj = 0.0;
    bool bin = false;
    int name_id = 0;
    char name_class = 'g';
    switch (key.kind) {
      case VarKind::theta:
        lo = -kInf;
        hi = kInf;
        name_id = key.entity + 1;
        name_class = 'b';
        if (name_id == ref_bus) lo = hi = 0.0;
        break;
      case VarKind::gen:
        hi = gen_at(key.entity).g_max;
        name_id = gen_at(key.entity).id;
        break;
      case VarKind::wind: {
        const auto& w = c.wind_for(key.k);
        double avail = w[static_cast<std::size_t>(key.t)][static_cast<std::size_t>(key.entity)];
        lo = c.allow_curtailment ? 0.0 : avail;
        hi = avail;
        name_id = wind_at(key.entity).id;
        break;
      }
      case VarKind::commit:
        hi = 1.0;
        bin = true;
        obj = pr * gen_at(key.entity).no_load_cost;
        name_id = gen_at(key.entity).id;
        break;
      case VarKind::start:
        hi = 1.0;
        bin = true;
        obj = pr * gen_at(key.entity).startup_cost;
        name_id = gen_at(key.entity).id;
        break;
      case VarKind::stop:
        hi = 1.0;
        bin = true;
        obj = pr * gen_at(key.entity).shutdown_cost;
        name_id = gen_at(key.entity).id;
        break;
      case VarKind::cost:
        hi = kInf;
        obj = pr;
        name_id = gen_at(key.entity).id;
        break;
      case VarKind::coal1:
        hi = c.coal_plants[static_cast<std::size_t>(key.entity)].eol;
        name_id = c.coal_plants[static_cast<std::size_t>(key.entity)].generator;
        name_class = 'c';
        break;
      case VarKind::coal2:
        hi = unit2[static_cast<std::size_t>(key.entity)].g_max;
        name_id = c.coal_plants[static_cast<std::size_t>(key.entity)].generator;
        name_class = 'c';
        break;
      case VarKind::commit1:
      case VarKind::commit2:
        hi = 1.0;
        bin = true;
        name_id = c.coal_plants[static_cast<std::size_t>(key.entity)].generator;
        name_class = 'c';
        break;
      case VarKind::ramp_up:
      case VarKind::ramp_down:
        hi = c.generator_by_id(c.coal_plants[static_cast<std::size_t>(key.entity)].generator).g_max;
        name_id = c.coal_plants[static_cast<std::size_t>(key.entity)].generator;
        name_class = 'c';
        break;
      case VarKind::cost_up:
      case VarKind::cost_down:
        hi = kInf;
        obj = pr;
        name_id = c.coal_plants[static_cast<std::size_t>(key.entity)].generator;
        name_class = 'c';
        break;
      case VarKind::charge:
      case VarKind::discharge:
        hi = c.storages[static_cast<std::size_t>(key.entity)].power_rating;
        name_id = c.storages[static_cast<std::size_t>(key.entity)].id;
        name_class = 's';
        break;
      case VarKind::soc:
        hi = c.storages[static_cast<std::size_t>(key.entity)].energy_rating;
        name_id = c.storages[static_cast<std::size_t>(key.entity)].id;
        name_class = 's';
        break;
    }
    p.lb[static_cast<std::size_t>(col)] = lo;
    p.ub[static_cast<std::size_t>(col)] = hi;
    p.obj[static_cast<std::size_t>(col)] = obj;
    p.binary[static_cast<std::size_t>(col)] = bin ? 1 : 0;
    p.col_names[static_cast<std::size_t>(col)] = std::string(to_string(key.kind)) + "_" +
                                                 name_class + std::to_string(name_id) +
                                                 tk_tag(key.t, key.k);
  }

  // Initial-state holds on commitment.
  for (int e = 0; e < vi.entities(VarKind::commit); ++e) {
    const auto& g = gen_at(e);
    int held = g.hours_in_initial_state;
    if (g.initial_commitment) {
      for (int t = 0; t < std::min(T, g.min_uptime - held); ++t)
        for (int k = 0; k < K; ++k)
          p.lb[static_cast<std::size_t>(vi.column(VarKind::commit, e, t, k))] = 1.0;
    } else {
      for (int t = 0; t < std::min(T, g.min_downtime - held); ++t)
        for (int k = 0; k < K; ++k)
          p.ub[static_cast<std::size_t>(vi.column(VarKind::commit, e, t, k))] = 0.0;
    }
  }

  const Eigen::MatrixXd b_bus = grid::build_bus_susceptance(c.network);
  const Eigen::MatrixXd b_branch = grid::build_branch_susceptance(c.network);
  const double base = c.base_mva;

  // (10.1) nodal balance
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        std::vector<std::pair<int, double>> terms;
        for (int e = 0; e < vi.entities(VarKind::gen); ++e)
          if (gen_at(e).bus == n + 1) terms.push_back({vi.column(VarKind::gen, e, t, k), 1.0});
        for (int e = 0; e < vi.entities(VarKind::wind); ++e)
          if (wind_at(e).bus == n + 1) terms.push_back({vi.column(VarKind::wind, e, t, k), 1.0});
        for (int e = 0; e < vi.entities(VarKind::charge); ++e)
          if (c.storages[static_cast<std::size_t>(e)].bus == n + 1) {
            terms.push_back({vi.column(VarKind::discharge, e, t, k), 1.0});
            terms.push_back({vi.column(VarKind::charge, e, t, k), -1.0});
          }
        for (int m = 0; m < N; ++m)
          if (std::abs(b_bus(n, m)) > 1e-15)
            terms.push_back({vi.column(VarKind::theta, m, t, k), -base * b_bus(n, m)});
        add_row(p, RowSense::eq, c.load_for(k)[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)],
                {1, n + 1, t, k}, "bal_b" + std::to_string(n + 1) + tk_tag(t, k),
                std::move(terms));
      }

  // (10.2) horizon energy adequacy, optional
  if (options.include_energy_adequacy)
    for (int k = 0; k < K; ++k) {
      std::vector<std::pair<int, double>> terms;
      double total_load = 0.0;
      for (int t = 0; t < T; ++t) {
        for (int e = 0; e < vi.entities(VarKind::gen); ++e)
          terms.push_back({vi.column(VarKind::gen, e, t, k), 1.0});
        for (int e = 0; e < vi.entities(VarKind::wind); ++e)
          terms.push_back({vi.column(VarKind::wind, e, t, k), 1.0});
        for (int n = 0; n < N; ++n)
          total_load += c.load_for(k)[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)];
      }
      add_row(p, RowSense::eq, total_load, {2, -1, -1, k}, "adequacy_k" + std::to_string(k),
              std::move(terms));
    }

  // (10.3) coal split
  for (std::size_t m = 0; m < c.coal_plants.size(); ++m)
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        int me = static_cast<int>(m);
        add_row(p, RowSense::eq, 0.0, {3, c.coal_plants[m].generator, t, k},
                "split_c" + std::to_string(c.coal_plants[m].generator) + tk_tag(t, k),
                {{vi.column(VarKind::gen, plant_entity[m], t, k), 1.0},
                 {vi.column(VarKind::coal1, me, t, k), -1.0},
                 {vi.column(VarKind::coal2, me, t, k), -1.0}});
      }

  // (10.4) line limits
  for (int l = 0; l < c.network.line_count(); ++l)
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        std::vector<std::pair<int, double>> terms;
        for (int n = 0; n < N; ++n)
          if (std::abs(b_branch(l, n)) > 1e-15)
            terms.push_back({vi.column(VarKind::theta, n, t, k), base * b_branch(l, n)});
        double cap = c.network.lines[static_cast<std::size_t>(l)].capacity;
        add_row(p, RowSense::le, cap, {4, l + 1, t, k},
                "lineU_l" + std::to_string(l + 1) + tk_tag(t, k), terms);
        add_row(p, RowSense::ge, -cap, {4, l + 1, t, k},
                "lineL_l" + std::to_string(l + 1) + tk_tag(t, k), std::move(terms));
      }

  // (10.5) plant ramp limits
  for (int e = 0; e < vi.entities(VarKind::gen); ++e) {
    const auto& g = gen_at(e);
    double g0 = g.initial_commitment ? g.initial_output : 0.0;
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        int cur = vi.column(VarKind::gen, e, t, k);
        std::vector<std::pair<int, double>> up{{cur, 1.0}}, dn{{cur, -1.0}};
        double rhs_up = g.ramp_limit, rhs_dn = g.ramp_limit;
        if (t == 0) {
          rhs_up += g0;
          rhs_dn -= g0;
        } else {
          int prev = vi.column(VarKind::gen, e, t - 1, k);
          up.push_back({prev, -1.0});
          dn.push_back({prev, 1.0});
        }
        add_row(p, RowSense::le, rhs_up, {5, g.id, t, k},
                "rampU_g" + std::to_string(g.id) + tk_tag(t, k), std::move(up));
        add_row(p, RowSense::le, rhs_dn, {5, g.id, t, k},
                "rampD_g" + std::to_string(g.id) + tk_tag(t, k), std::move(dn));
      }
  }

  // (10.6) capacity coupling for plants and both coal units
  for (int e = 0; e < vi.entities(VarKind::gen); ++e) {
    const auto& g = gen_at(e);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        int gc = vi.column(VarKind::gen, e, t, k);
        int uc = vi.column(VarKind::commit, e, t, k);
        add_row(p, RowSense::le, 0.0, {6, g.id, t, k},
                "capU_g" + std::to_string(g.id) + tk_tag(t, k),
                {{gc, 1.0}, {uc, -g.g_max}});
        if (g.g_min > 0.0)
          add_row(p, RowSense::ge, 0.0, {6, g.id, t, k},
                  "capL_g" + std::to_string(g.id) + tk_tag(t, k),
                  {{gc, 1.0}, {uc, -g.g_min}});
      }
  }
  for (std::size_t m = 0; m < c.coal_plants.size(); ++m) {
    const auto& plant = c.coal_plants[m];
    int me = static_cast<int>(m);
    std::string cm = std::to_string(plant.generator);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        int g1 = vi.column(VarKind::coal1, me, t, k);
        int u1 = vi.column(VarKind::commit1, me, t, k);
        int g2 = vi.column(VarKind::coal2, me, t, k);
        int u2 = vi.column(VarKind::commit2, me, t, k);
        add_row(p, RowSense::le, 0.0, {6, plant.generator, t, k}, "capU1_c" + cm + tk_tag(t, k),
                {{g1, 1.0}, {u1, -plant.eol}});
        if (unit1[m].g_min > 0.0)
          add_row(p, RowSense::ge, 0.0, {6, plant.generator, t, k}, "capL1_c" + cm + tk_tag(t, k),
                  {{g1, 1.0}, {u1, -unit1[m].g_min}});
        add_row(p, RowSense::le, 0.0, {6, plant.generator, t, k}, "capU2_c" + cm + tk_tag(t, k),
                {{g2, 1.0}, {u2, -unit2[m].g_max}});
      }
  }

  // (10.7) Unit II sequencing, plus the Unit I commitment tie
  for (std::size_t m = 0; m < c.coal_plants.size(); ++m) {
    const auto& plant = c.coal_plants[m];
    int me = static_cast<int>(m);
    std::string cm = std::to_string(plant.generator);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        add_row(p, RowSense::le, 0.0, {7, plant.generator, t, k}, "seq_c" + cm + tk_tag(t, k),
                {{vi.column(VarKind::commit2, me, t, k), plant.eol},
                 {vi.column(VarKind::coal1, me, t, k), -1.0}});
        add_row(p, RowSense::eq, 0.0, {7, plant.generator, t, k}, "tie1_c" + cm + tk_tag(t, k),
                {{vi.column(VarKind::commit1, me, t, k), 1.0},
                 {vi.column(VarKind::commit, plant_entity[m], t, k), -1.0}});
      }
  }

  // (10.8) start/stop logic
  for (int e = 0; e < vi.entities(VarKind::commit); ++e) {
    const auto& g = gen_at(e);
    double u0 = g.initial_commitment ? 1.0 : 0.0;
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        int uc = vi.column(VarKind::commit, e, t, k);
        std::vector<std::pair<int, double>> on{{uc, 1.0},
                                               {vi.column(VarKind::start, e, t, k), -1.0}};
        std::vector<std::pair<int, double>> off{{uc, -1.0},
                                                {vi.column(VarKind::stop, e, t, k), -1.0}};
        double rhs_on = 0.0, rhs_off = 0.0;
        if (t == 0) {
          rhs_on = u0;
          rhs_off = -u0;
        } else {
          int prev = vi.column(VarKind::commit, e, t - 1, k);
          on.push_back({prev, -1.0});
          off.push_back({prev, 1.0});
        }
        add_row(p, RowSense::le, rhs_on, {8, g.id, t, k},
                "start_g" + std::to_string(g.id) + tk_tag(t, k), std::move(on));
        add_row(p, RowSense::le, rhs_off, {8, g.id, t, k},
                "stop_g" + std::to_string(g.id) + tk_tag(t, k), std::move(off));
      }
  }

  // (10.9) minimum up/down windows, truncated at the horizon start
  for (int e = 0; e < vi.entities(VarKind::commit); ++e) {
    const auto& g = gen_at(e);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        std::vector<std::pair<int, double>> up;
        for (int j = std::max(0, t - g.min_uptime + 1); j <= t; ++j)
          up.push_back({vi.column(VarKind::start, e, j, k), 1.0});
        up.push_back({vi.column(VarKind::commit, e, t, k), -1.0});
        add_row(p, RowSense::le, 0.0, {9, g.id, t, k},
                "minup_g" + std::to_string(g.id) + tk_tag(t, k), std::move(up));
        std::vector<std::pair<int, double>> dn;
        for (int j = std::max(0, t - g.min_downtime + 1); j <= t; ++j)
          dn.push_back({vi.column(VarKind::stop, e, j, k), 1.0});
        dn.push_back({vi.column(VarKind::commit, e, t, k), 1.0});
        add_row(p, RowSense::le, 1.0, {9, g.id, t, k},
                "mindn_g" + std::to_string(g.id) + tk_tag(t, k), std::move(dn));
      }
  }

  // (10.10) ramp-variable envelopes on Unit I
  for (std::size_t m = 0; m < c.coal_plants.size(); ++m) {
    const auto& plant = c.coal_plants[m];
    int me = static_cast<int>(m);
    std::string cm = std::to_string(plant.generator);
    double g1_init = unit1[m].initial_output;
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        int cur = vi.column(VarKind::coal1, me, t, k);
        std::vector<std::pair<int, double>> up{{cur, 1.0},
                                               {vi.column(VarKind::ramp_up, me, t, k), -1.0}};
        std::vector<std::pair<int, double>> dn{{cur, -1.0},
                                               {vi.column(VarKind::ramp_down, me, t, k), -1.0}};
        double rhs_up = 0.0, rhs_dn = 0.0;
        if (t == 0) {
          rhs_up = g1_init;
          rhs_dn = -g1_init;
        } else {
          int prev = vi.column(VarKind::coal1, me, t - 1, k);
          up.push_back({prev, -1.0});
          dn.push_back({prev, 1.0});
        }
        add_row(p, RowSense::le, rhs_up, {10, plant.generator, t, k},
                "envU_c" + cm + tk_tag(t, k), std::move(up));
        add_row(p, RowSense::le, rhs_dn, {10, plant.generator, t, k},
                "envD_c" + cm + tk_tag(t, k), std::move(dn));
      }
  }

  // (10.11) cost epigraphs: offer curves on g, ramp-cost curves on alpha/beta
  for (int e = 0; e < vi.entities(VarKind::gen); ++e) {
    const auto& g = gen_at(e);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k)
        add_pwl_epigraph(p, g.offer_blocks, vi.column(VarKind::gen, e, t, k),
                         vi.column(VarKind::cost, e, t, k), {11, g.id, t, k},
                         "cost_g" + std::to_string(g.id) + tk_tag(t, k));
  }
  for (std::size_t m = 0; m < c.coal_plants.size(); ++m) {
    const auto& plant = c.coal_plants[m];
    int me = static_cast<int>(m);
    std::string cm = std::to_string(plant.generator);
    double swing_cap = c.generator_by_id(plant.generator).g_max;
    std::vector<grid::OfferBlock> up_curve, dn_curve;
    if (options.use_emission_blocks) {
      double price = options.carbon_price * (1.0 + options.damage_mult);
      for (const auto& blk : blocks[m]) {
        up_curve.push_back({blk.hi - blk.lo, price * blk.rate});
        dn_curve.push_back({blk.hi - blk.lo, price * blk.rate});
      }
    } else {
      up_curve.push_back({swing_cap, level.ru});
      dn_curve.push_back({swing_cap, level.rd});
    }
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        add_pwl_epigraph(p, up_curve, vi.column(VarKind::ramp_up, me, t, k),
                         vi.column(VarKind::cost_up, me, t, k), {11, plant.generator, t, k},
                         "costa_c" + cm + tk_tag(t, k));
        add_pwl_epigraph(p, dn_curve, vi.column(VarKind::ramp_down, me, t, k),
                         vi.column(VarKind::cost_down, me, t, k), {11, plant.generator, t, k},
                         "costb_c" + cm + tk_tag(t, k));
      }
  }

  // (10.12)-(10.14) storage dynamics and intra-slice headroom
  for (std::size_t s = 0; s < c.storages.size(); ++s) {
    const auto& st = c.storages[s];
    int se = static_cast<int>(s);
    std::string sm = std::to_string(st.id);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        double lam = c.slice_hours[static_cast<std::size_t>(t)];
        double in_coef = st.charge_efficiency * lam;
        double out_coef = lam / st.discharge_efficiency;
        int soc_c = vi.column(VarKind::soc, se, t, k);
        int ch_c = vi.column(VarKind::charge, se, t, k);
        int dis_c = vi.column(VarKind::discharge, se, t, k);
        std::vector<std::pair<int, double>> dyn{{soc_c, 1.0}, {ch_c, -in_coef}, {dis_c, out_coef}};
        std::vector<std::pair<int, double>> chh{{ch_c, in_coef}};
        std::vector<std::pair<int, double>> dish{{dis_c, out_coef}};
        double rhs_dyn = 0.0, rhs_ch = st.energy_rating, rhs_dis = 0.0;
        if (t == 0) {
          rhs_dyn = st.initial_energy;
          rhs_ch -= st.initial_energy;
          rhs_dis = st.initial_energy;
        } else {
          int prev = vi.column(VarKind::soc, se, t - 1, k);
          dyn.push_back({prev, -1.0});
          chh.push_back({prev, 1.0});
          dish.push_back({prev, -1.0});
        }
        add_row(p, RowSense::eq, rhs_dyn, {12, st.id, t, k}, "soc_s" + sm + tk_tag(t, k),
                std::move(dyn));
        add_row(p, RowSense::le, rhs_ch, {13, st.id, t, k}, "chmax_s" + sm + tk_tag(t, k),
                std::move(chh));
        add_row(p, RowSense::le, rhs_dis, {14, st.id, t, k}, "dismax_s" + sm + tk_tag(t, k),
                std::move(dish));
      }
  }

  for (int col = 0; col < p.ncols; ++col)
    if (p.lb[static_cast<std::size_t>(col)] > p.ub[static_cast<std::size_t>(col)] + 1e-12)
      throw ValidationError("infeasible bounds on column " +
                            p.col_names[static_cast<std::size_t>(col)]);
  return {std::move(p), vi};
}

namespace {

int bound_family(VarKind kind) {
  switch (kind) {
    case VarKind::charge: return 15;
    case VarKind::discharge: return 16;
    case VarKind::soc: return 17;
    default: return 18;
  }
}

}  // namespace

const char* family_name(int family) {
  switch (family) {
    case 1: return "nodal balance";
    case 2: return "energy adequacy";
    case 3: return "coal split";
    case 4: return "line limits";
    case 5: return "ramp limits";
    case 6: return "capacity coupling";
    case 7: return "unit sequencing";
    case 8: return "start/stop logic";
    case 9: return "min up/down";
    case 10: return "ramp envelopes";
    case 11: return "cost epigraphs";
    case 12: return "storage dynamics";
    case 13: return "charge headroom";
    case 14: return "discharge headroom";
    case 15: return "charge rate bounds";
    case 16: return "discharge rate bounds";
    case 17: return "energy bounds";
    case 18: return "variable domains";
  }
  return "?";
}

bool ResidualReport::within(double tol) const { return worst <= tol && integrality <= tol; }

std::string ResidualReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "objective " << std::scientific << objective << "\n";
  for (int f = 1; f <= 18; ++f)
    os << "  family " << f << " (" << family_name(f) << "): max residual " << family[static_cast<std::size_t>(f)]
       << "\n";
  os << "  integrality: " << integrality << "\n";
  return os.str();
}

ResidualReport check_solution(const MilpProblem& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.ncols)
    throw ValidationError("solution size mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(p.ncols) + " columns");
  ResidualReport rep;
  for (int r = 0; r < p.nrows(); ++r) {
    double a = p.row_activity(r, x);
    double b = p.rhs[static_cast<std::size_t>(r)];
    double v = 0.0;
    switch (p.sense[static_cast<std::size_t>(r)]) {
      case RowSense::le: v = std::max(0.0, a - b); break;
      case RowSense::ge: v = std::max(0.0, b - a); break;
      case RowSense::eq: v = std::abs(a - b); break;
    }
    auto& slot = rep.family[static_cast<std::size_t>(p.row_info[static_cast<std::size_t>(r)].family)];
    slot = std::max(slot, v);
  }
  for (int col = 0; col < p.ncols; ++col) {
    auto sc = static_cast<std::size_t>(col);
    double v = std::max({0.0, p.lb[sc] - x[sc], x[sc] - p.ub[sc]});
    int fam = bound_family(p.col_info[sc].kind);
    rep.family[static_cast<std::size_t>(fam)] = std::max(rep.family[static_cast<std::size_t>(fam)], v);
    if (p.binary[sc])
      rep.integrality = std::max(rep.integrality, std::abs(x[sc] - std::round(x[sc])));
  }
  for (int f = 1; f <= 18; ++f) rep.worst = std::max(rep.worst, rep.family[static_cast<std::size_t>(f)]);
  rep.objective = p.objective_value(x);
  return rep;
}

}  // namespace dcuc::milp
