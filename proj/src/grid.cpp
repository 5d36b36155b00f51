#include "dcuc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dcuc::grid {

int Network::reference_bus() const {
  for (const auto& b : buses)
    if (b.reference) return b.id;
  return -1;
}

bool Network::connected() const {
  if (buses.empty()) return false;
  std::map<int, std::vector<int>> adj;
  for (const auto& b : buses) adj[b.id];
  for (const auto& l : lines) {
    adj[l.from_bus].push_back(l.to_bus);
    adj[l.to_bus].push_back(l.from_bus);
  }
  std::set<int> seen{buses.front().id};
  std::vector<int> stack{buses.front().id};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (seen.insert(w).second) stack.push_back(w);
  }
  return seen.size() == buses.size();
}

const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::coal: return "coal";
    case GeneratorKind::gas: return "gas";
    case GeneratorKind::nuclear: return "nuclear";
    case GeneratorKind::wind: return "wind";
  }
  return "?";
}

GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "coal") return GeneratorKind::coal;
  if (s == "gas") return GeneratorKind::gas;
  if (s == "nuclear") return GeneratorKind::nuclear;
  if (s == "wind") return GeneratorKind::wind;
  throw ParseError("unknown generator kind: " + s);
}

double GeneratorSpec::offer_quantity_total() const {
  double q = 0.0;
  for (const auto& b : offer_blocks) q += b.quantity;
  return q;
}

double GeneratorSpec::offer_cost_at(double g) const {
  double cost = 0.0, remaining = g;
  for (const auto& b : offer_blocks) {
    double take = std::min(remaining, b.quantity);
    if (take <= 0.0) break;
    cost += take * b.price;
    remaining -= take;
  }
  return cost;
}

const GeneratorSpec& CaseData::generator_by_id(int id) const {
  for (const auto& g : generators)
    if (g.id == id) return g;
  throw ValidationError("unknown generator id " + std::to_string(id));
}

std::vector<int> CaseData::wind_unit_ids() const {
  std::vector<int> ids;
  for (const auto& g : generators)
    if (g.is_wind()) ids.push_back(g.id);
  return ids;
}

const std::vector<std::vector<double>>& CaseData::load_for(int k) const {
  const auto& sc = scenarios.at(static_cast<std::size_t>(k));
  return sc.load.empty() ? load : sc.load;
}

const std::vector<std::vector<double>>& CaseData::wind_for(int k) const {
  const auto& sc = scenarios.at(static_cast<std::size_t>(k));
  return sc.wind.empty() ? wind : sc.wind;
}

// ---------------------------------------------------------------------------
// JSON parsing

namespace {

void check_fields(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ParseError(where + ": expected object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError(where + ": unknown field '" + it.key() + "'");
}

std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected array of arrays");
  std::vector<std::vector<double>> m;
  for (const auto& row : j) {
    if (!row.is_array()) throw ParseError(where + ": expected array of arrays");
    m.emplace_back(row.begin(), row.end());
  }
  return m;
}

GeneratorSpec parse_generator(const json& j, int index) {
  std::string where = "generators[" + std::to_string(index) + "]";
  check_fields(j, where,
               {"id", "bus", "kind", "g_min", "g_max", "ramp_limit", "no_load_cost",
                "startup_cost", "shutdown_cost", "min_uptime", "min_downtime",
                "offer_blocks", "initial_commitment", "initial_output",
                "hours_in_initial_state"});
  GeneratorSpec g;
  g.id = j.at("id").get<int>();
  g.bus = j.at("bus").get<int>();
  g.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  g.g_min = j.value("g_min", 0.0);
  g.g_max = j.at("g_max").get<double>();
  g.ramp_limit = j.at("ramp_limit").get<double>();
  g.no_load_cost = j.value("no_load_cost", 0.0);
  g.startup_cost = j.value("startup_cost", 0.0);
  g.shutdown_cost = j.value("shutdown_cost", 0.0);  // not in the nomenclature; defaults 0
  g.min_uptime = j.value("min_uptime", 1);
  g.min_downtime = j.value("min_downtime", 1);
  if (j.contains("offer_blocks")) {
    for (const auto& bj : j.at("offer_blocks")) {
      check_fields(bj, where + ".offer_blocks", {"quantity", "price"});
      g.offer_blocks.push_back({bj.at("quantity").get<double>(), bj.at("price").get<double>()});
    }
  }
  g.initial_commitment = j.value("initial_commitment", false);
  g.initial_output = j.value("initial_output", 0.0);
  g.hours_in_initial_state = j.value("hours_in_initial_state", 1);
  return g;
}

}  // namespace

CaseData parse_case_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("case file is not valid JSON: ") + e.what());
  }
  check_fields(j, "case",
               {"name", "base_mva", "horizon", "slice_hours", "network", "generators",
                "coal_plants", "storages", "profiles", "scenarios", "allow_curtailment"});
  CaseData c;
  c.name = j.value("name", "");
  c.base_mva = j.value("base_mva", 100.0);
  c.horizon = j.at("horizon").get<int>();
  if (j.contains("slice_hours")) {
    const auto& sh = j.at("slice_hours");
    if (sh.is_number())
      c.slice_hours.assign(static_cast<std::size_t>(std::max(0, c.horizon)), sh.get<double>());
    else
      c.slice_hours.assign(sh.begin(), sh.end());
  } else {
    c.slice_hours.assign(static_cast<std::size_t>(std::max(0, c.horizon)), 1.0);
  }

  const auto& nj = j.at("network");
  check_fields(nj, "network", {"buses", "lines"});
  for (const auto& bj : nj.at("buses")) {
    check_fields(bj, "network.buses", {"id", "reference"});
    c.network.buses.push_back({bj.at("id").get<int>(), bj.value("reference", false)});
  }
  for (const auto& lj : nj.at("lines")) {
    check_fields(lj, "network.lines", {"from", "to", "susceptance", "capacity"});
    c.network.lines.push_back({lj.at("from").get<int>(), lj.at("to").get<int>(),
                               lj.at("susceptance").get<double>(),
                               lj.at("capacity").get<double>()});
  }

  int gi = 0;
  for (const auto& gj : j.at("generators")) c.generators.push_back(parse_generator(gj, gi++));

  if (j.contains("coal_plants")) {
    int ci = 0;
    for (const auto& cj : j.at("coal_plants")) {
      std::string where = "coal_plants[" + std::to_string(ci++) + "]";
      check_fields(cj, where,
                   {"generator", "eol", "static_params", "dynamic_params", "ramp_up_cost",
                    "ramp_down_cost"});
      CoalPlantSpec p;
      p.generator = cj.at("generator").get<int>();
      p.eol = cj.at("eol").get<double>();
      if (cj.contains("static_params")) {
        const auto& sj = cj.at("static_params");
        check_fields(sj, where + ".static_params", {"f0", "f1", "n1"});
        p.static_params = {sj.at("f0").get<double>(), sj.at("f1").get<double>(),
                           sj.at("n1").get<double>()};
      }
      if (cj.contains("dynamic_params")) {
        const auto& dj = cj.at("dynamic_params");
        check_fields(dj, where + ".dynamic_params", {"b", "tau", "n2"});
        p.dynamic_params = {dj.at("b").get<double>(), dj.at("tau").get<double>(),
                            dj.at("n2").get<double>()};
      }
      p.ramp_up_cost = cj.value("ramp_up_cost", 0.0);
      p.ramp_down_cost = cj.value("ramp_down_cost", 0.0);
      c.coal_plants.push_back(p);
    }
  }

  if (j.contains("storages")) {
    int si = 0;
    for (const auto& sj : j.at("storages")) {
      std::string where = "storages[" + std::to_string(si++) + "]";
      check_fields(sj, where,
                   {"id", "bus", "power_rating", "energy_rating", "charge_efficiency",
                    "discharge_efficiency", "initial_energy"});
      StorageSpec s;
      s.id = sj.at("id").get<int>();
      s.bus = sj.at("bus").get<int>();
      s.power_rating = sj.at("power_rating").get<double>();
      s.energy_rating = sj.at("energy_rating").get<double>();
      s.charge_efficiency = sj.value("charge_efficiency", 1.0);
      s.discharge_efficiency = sj.value("discharge_efficiency", 1.0);
      s.initial_energy = sj.value("initial_energy", 0.0);
      c.storages.push_back(s);
    }
  }

  const auto& pj = j.at("profiles");
  check_fields(pj, "profiles", {"load", "wind"});
  c.load = parse_matrix(pj.at("load"), "profiles.load");
  if (pj.contains("wind")) c.wind = parse_matrix(pj.at("wind"), "profiles.wind");

  if (j.contains("scenarios")) {
    int ki = 0;
    for (const auto& sj : j.at("scenarios")) {
      std::string where = "scenarios[" + std::to_string(ki++) + "]";
      check_fields(sj, where, {"probability", "load", "wind"});
      Scenario sc;
      sc.probability = sj.at("probability").get<double>();
      if (sj.contains("load")) sc.load = parse_matrix(sj.at("load"), where + ".load");
      if (sj.contains("wind")) sc.wind = parse_matrix(sj.at("wind"), where + ".wind");
      c.scenarios.push_back(sc);
    }
  }
  if (c.scenarios.empty()) c.scenarios.push_back(Scenario{});
  c.allow_curtailment = j.value("allow_curtailment", false);
  return c;
}

CaseData load_case(const std::string& path) {
  CaseData c = parse_case_json(read_text_file(path));
  auto violations = validate_case(c);
  if (!violations.empty()) {
    std::vector<std::string> msgs;
    for (const auto& v : violations) msgs.push_back(v.path + ": " + v.message);
    throw ValidationError("case validation failed: " + join(msgs, "; "));
  }
  return c;
}

std::string serialize_case(const CaseData& c) {
  json j;
  if (!c.name.empty()) j["name"] = c.name;
  j["base_mva"] = c.base_mva;
  j["horizon"] = c.horizon;
  j["slice_hours"] = c.slice_hours;
  j["network"]["buses"] = json::array();
  for (const auto& b : c.network.buses) {
    json bj{{"id", b.id}};
    if (b.reference) bj["reference"] = true;
    j["network"]["buses"].push_back(bj);
  }
  j["network"]["lines"] = json::array();
  for (const auto& l : c.network.lines)
    j["network"]["lines"].push_back({{"from", l.from_bus},
                                     {"to", l.to_bus},
                                     {"susceptance", l.susceptance},
                                     {"capacity", l.capacity}});
  j["generators"] = json::array();
  for (const auto& g : c.generators) {
    json gj{{"id", g.id},
            {"bus", g.bus},
            {"kind", to_string(g.kind)},
            {"g_min", g.g_min},
            {"g_max", g.g_max},
            {"ramp_limit", g.ramp_limit},
            {"no_load_cost", g.no_load_cost},
            {"startup_cost", g.startup_cost},
            {"shutdown_cost", g.shutdown_cost},
            {"min_uptime", g.min_uptime},
            {"min_downtime", g.min_downtime},
            {"initial_commitment", g.initial_commitment},
            {"initial_output", g.initial_output},
            {"hours_in_initial_state", g.hours_in_initial_state}};
    gj["offer_blocks"] = json::array();
    for (const auto& b : g.offer_blocks)
      gj["offer_blocks"].push_back({{"quantity", b.quantity}, {"price", b.price}});
    j["generators"].push_back(gj);
  }
  j["coal_plants"] = json::array();
  for (const auto& p : c.coal_plants) {
    j["coal_plants"].push_back(
        {{"generator", p.generator},
         {"eol", p.eol},
         {"static_params",
          {{"f0", p.static_params.f0}, {"f1", p.static_params.f1}, {"n1", p.static_params.n1}}},
         {"dynamic_params",
          {{"b", p.dynamic_params.b},
           {"tau", p.dynamic_params.tau},
           {"n2", p.dynamic_params.n2}}},
         {"ramp_up_cost", p.ramp_up_cost},
         {"ramp_down_cost", p.ramp_down_cost}});
  }
  j["storages"] = json::array();
  for (const auto& s : c.storages)
    j["storages"].push_back({{"id", s.id},
                             {"bus", s.bus},
                             {"power_rating", s.power_rating},
                             {"energy_rating", s.energy_rating},
                             {"charge_efficiency", s.charge_efficiency},
                             {"discharge_efficiency", s.discharge_efficiency},
                             {"initial_energy", s.initial_energy}});
  j["profiles"]["load"] = c.load;
  j["profiles"]["wind"] = c.wind;
  j["scenarios"] = json::array();
  for (const auto& sc : c.scenarios) {
    json sj{{"probability", sc.probability}};
    if (!sc.load.empty()) sj["load"] = sc.load;
    if (!sc.wind.empty()) sj["wind"] = sc.wind;
    j["scenarios"].push_back(sj);
  }
  j["allow_curtailment"] = c.allow_curtailment;
  return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_network(const CaseData& c, std::vector<Violation>& out) {
  const auto& net = c.network;
  if (net.buses.empty()) {
    out.push_back({"network.buses", "no buses"});
    return;
  }
  std::set<int> ids;
  int refs = 0;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const auto& b = net.buses[i];
    if (!ids.insert(b.id).second)
      out.push_back({"network.buses[" + std::to_string(i) + "]",
                     "duplicate bus id " + std::to_string(b.id)});
    if (b.reference) ++refs;
  }
  int n = net.bus_count();
  for (int want = 1; want <= n; ++want)
    if (!ids.count(want)) {
      out.push_back({"network.buses", "bus ids must be contiguous 1..N; missing " +
                                          std::to_string(want)});
      break;
    }
  if (refs != 1)
    out.push_back({"network.buses", "expected exactly one reference bus, found " +
                                        std::to_string(refs)});
  for (std::size_t i = 0; i < net.lines.size(); ++i) {
    const auto& l = net.lines[i];
    std::string p = "network.lines[" + std::to_string(i) + "]";
    if (!ids.count(l.from_bus)) out.push_back({p, "unknown from bus " + std::to_string(l.from_bus)});
    if (!ids.count(l.to_bus)) out.push_back({p, "unknown to bus " + std::to_string(l.to_bus)});
    if (l.from_bus == l.to_bus) out.push_back({p, "self-loop"});
    if (!(l.susceptance > 0.0)) out.push_back({p, "susceptance must be positive"});
    if (!(l.capacity > 0.0)) out.push_back({p, "capacity must be positive"});
  }
  if (out.empty() && !net.connected())
    out.push_back({"network", "network is not connected"});
}

void check_generators(const CaseData& c, std::vector<Violation>& out) {
  if (c.generators.empty()) {
    out.push_back({"generators", "no generators"});
    return;
  }
  std::set<int> bus_ids;
  for (const auto& b : c.network.buses) bus_ids.insert(b.id);
  std::set<int> gen_ids;
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    std::string p = "generators[" + std::to_string(i) + "]";
    if (!gen_ids.insert(g.id).second)
      out.push_back({p, "duplicate generator id " + std::to_string(g.id)});
    if (!bus_ids.count(g.bus))
      out.push_back({p + ".bus", "generator " + std::to_string(g.id) + " at nonexistent bus " +
                                     std::to_string(g.bus)});
    if (g.g_min < 0.0 || g.g_min > g.g_max)
      out.push_back({p, "requires 0 <= g_min <= g_max"});
    if (!(g.ramp_limit > 0.0)) out.push_back({p + ".ramp_limit", "must be positive"});
    if (g.min_uptime < 1 || g.min_downtime < 1)
      out.push_back({p, "min up/down times must be at least 1 hour"});
    if (!g.is_wind() && g.offer_quantity_total() + 1e-9 < g.g_max)
      out.push_back({p + ".offer_blocks", "offer quantities must cover g_max"});
    double prev_price = -kInf;
    for (std::size_t bi = 0; bi < g.offer_blocks.size(); ++bi) {
      const auto& b = g.offer_blocks[bi];
      std::string bp = p + ".offer_blocks[" + std::to_string(bi) + "]";
      if (!(b.quantity > 0.0)) out.push_back({bp, "quantity must be positive"});
      if (b.price < prev_price)
        out.push_back({bp, "prices must be non-decreasing across blocks"});
      prev_price = b.price;
    }
    if (g.initial_output < 0.0 || g.initial_output > g.g_max)
      out.push_back({p + ".initial_output", "outside [0, g_max]"});
    if (g.initial_commitment && !g.is_wind() && g.initial_output + 1e-9 < g.g_min)
      out.push_back({p + ".initial_output", "committed unit below g_min"});
  }
}

void check_coal(const CaseData& c, std::vector<Violation>& out) {
  std::set<int> used;
  for (std::size_t i = 0; i < c.coal_plants.size(); ++i) {
    const auto& p = c.coal_plants[i];
    std::string where = "coal_plants[" + std::to_string(i) + "]";
    if (!used.insert(p.generator).second)
      out.push_back({where, "duplicate coal split for generator " + std::to_string(p.generator)});
    const GeneratorSpec* gen = nullptr;
    for (const auto& g : c.generators)
      if (g.id == p.generator) gen = &g;
    if (!gen) {
      out.push_back({where + ".generator", "unknown generator " + std::to_string(p.generator)});
      continue;
    }
    if (gen->kind != GeneratorKind::coal)
      out.push_back({where, "generator " + std::to_string(p.generator) + " is not coal"});
    if (!(p.eol > gen->g_min && p.eol < gen->g_max))
      out.push_back({where + ".eol", "EOL must lie strictly between g_min and g_max"});
    if (!(p.dynamic_params.tau > 0.0 && p.dynamic_params.tau < 1.0))
      out.push_back({where + ".dynamic_params.tau", "transition time must be in (0,1) hours"});
    if (p.dynamic_params.b < 0.0)
      out.push_back({where + ".dynamic_params.b", "must be nonnegative"});
    if (!(p.static_params.f1 > 0.0) || !(p.static_params.n1 > 0.0))
      out.push_back({where + ".static_params", "f1 and n1 must be positive"});
    if (p.ramp_up_cost < 0.0 || p.ramp_down_cost < 0.0)
      out.push_back({where, "ramp costs must be nonnegative"});
  }
}

void check_storage(const CaseData& c, std::vector<Violation>& out) {
  std::set<int> bus_ids;
  for (const auto& b : c.network.buses) bus_ids.insert(b.id);
  std::set<int> sids;
  for (std::size_t i = 0; i < c.storages.size(); ++i) {
    const auto& s = c.storages[i];
    std::string p = "storages[" + std::to_string(i) + "]";
    if (!sids.insert(s.id).second)
      out.push_back({p, "duplicate storage id " + std::to_string(s.id)});
    if (!bus_ids.count(s.bus))
      out.push_back({p + ".bus", "storage " + std::to_string(s.id) + " at nonexistent bus " +
                                     std::to_string(s.bus)});
    if (s.power_rating < 0.0 || s.energy_rating < 0.0)
      out.push_back({p, "ratings must be nonnegative"});
    if (!(s.charge_efficiency > 0.0 && s.charge_efficiency <= 1.0) ||
        !(s.discharge_efficiency > 0.0 && s.discharge_efficiency <= 1.0))
      out.push_back({p, "efficiencies must be in (0, 1]"});
    if (s.initial_energy < 0.0 || s.initial_energy > s.energy_rating)
      out.push_back({p + ".initial_energy", "outside [0, energy_rating]"});
  }
}

void check_profiles(const CaseData& c, std::vector<Violation>& out) {
  std::size_t t = static_cast<std::size_t>(std::max(0, c.horizon));
  std::size_t n = c.network.buses.size();
  if (c.horizon <= 0) out.push_back({"horizon", "must be positive"});
  if (c.slice_hours.size() != t)
    out.push_back({"slice_hours", "must have one entry per slice"});
  for (double h : c.slice_hours)
    if (!(h > 0.0)) {
      out.push_back({"slice_hours", "slice durations must be positive"});
      break;
    }
  auto check_mat = [&](const std::vector<std::vector<double>>& m, std::size_t cols,
                       const std::string& path) {
    if (m.size() != t) {
      out.push_back({path, "expected " + std::to_string(t) + " rows, got " +
                               std::to_string(m.size())});
      return;
    }
    for (std::size_t r = 0; r < m.size(); ++r)
      if (m[r].size() != cols) {
        out.push_back({path + "[" + std::to_string(r) + "]",
                       "expected " + std::to_string(cols) + " columns"});
        return;
      }
  };
  check_mat(c.load, n, "profiles.load");
  std::size_t w = 0;
  for (const auto& g : c.generators)
    if (g.is_wind()) ++w;
  if (w > 0 || !c.wind.empty()) check_mat(c.wind, w, "profiles.wind");

  double prob = 0.0;
  for (std::size_t k = 0; k < c.scenarios.size(); ++k) {
    const auto& sc = c.scenarios[k];
    std::string p = "scenarios[" + std::to_string(k) + "]";
    if (sc.probability < 0.0) out.push_back({p + ".probability", "negative"});
    prob += sc.probability;
    if (!sc.load.empty()) check_mat(sc.load, n, p + ".load");
    if (!sc.wind.empty()) check_mat(sc.wind, w, p + ".wind");
  }
  if (c.scenarios.empty())
    out.push_back({"scenarios", "at least one scenario required"});
  else if (std::abs(prob - 1.0) > 1e-9)
    out.push_back({"scenarios", "probabilities sum to " + std::to_string(prob) + ", expected 1"});

  // hourly system adequacy
  if (c.load.size() == t && !c.generators.empty()) {
    double cap = 0.0;
    for (const auto& g : c.generators)
      if (!g.is_wind()) cap += g.g_max;
    for (std::size_t r = 0; r < c.load.size(); ++r) {
      double d = 0.0;
      for (double v : c.load[r]) d += v;
      double wind_avail = 0.0;
      if (r < c.wind.size())
        for (double v : c.wind[r]) wind_avail += v;
      if (d > cap + wind_avail + 1e-9) {
        out.push_back({"profiles.load", "slice " + std::to_string(r + 1) +
                                            " load exceeds total generation capacity"});
        break;
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_case(const CaseData& c) {
  std::vector<Violation> out;
  check_network(c, out);
  check_generators(c, out);
  check_coal(c, out);
  check_storage(c, out);
  check_profiles(c, out);
  return out;
}

// ---------------------------------------------------------------------------
// Matrices and the coal split

Eigen::MatrixXd build_bus_susceptance(const Network& net) {
  if (!net.connected()) throw ValidationError("build_bus_susceptance: network not connected");
  int n = net.bus_count();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& l : net.lines) {
    int i = l.from_bus - 1, j = l.to_bus - 1;
    m(i, j) -= l.susceptance;
    m(j, i) -= l.susceptance;
    m(i, i) += l.susceptance;
    m(j, j) += l.susceptance;
  }
  return m;
}

Eigen::MatrixXd build_branch_susceptance(const Network& net) {
  if (!net.connected()) throw ValidationError("build_branch_susceptance: network not connected");
  int n = net.bus_count();
  int nl = net.line_count();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nl, n);
  for (int l = 0; l < nl; ++l) {
    const auto& line = net.lines[static_cast<std::size_t>(l)];
    m(l, line.from_bus - 1) = line.susceptance;
    m(l, line.to_bus - 1) = -line.susceptance;
  }
  return m;
}

std::pair<GeneratorSpec, GeneratorSpec> split_coal_plant(const GeneratorSpec& parent,
                                                         const CoalPlantSpec& plant) {
  if (!(plant.eol > parent.g_min && plant.eol < parent.g_max))
    throw ValidationError("split_coal_plant: EOL outside (g_min, g_max)");
  GeneratorSpec unit1 = parent;
  GeneratorSpec unit2 = parent;
  unit1.g_min = parent.g_min;
  unit1.g_max = plant.eol;
  unit2.g_min = 0.0;
  unit2.g_max = parent.g_max - plant.eol;
  // start/stop stays with the parent plant
  unit1.startup_cost = unit2.startup_cost = 0.0;
  unit1.shutdown_cost = unit2.shutdown_cost = 0.0;
  unit1.no_load_cost = unit2.no_load_cost = 0.0;
  unit1.offer_blocks.clear();
  unit2.offer_blocks.clear();
  double acc = 0.0;
  for (const auto& b : parent.offer_blocks) {
    double lo = acc, hi = acc + b.quantity;
    if (hi <= plant.eol + 1e-12) {
      unit1.offer_blocks.push_back(b);
    } else if (lo >= plant.eol - 1e-12) {
      unit2.offer_blocks.push_back(b);
    } else {
      // block straddles the EOL: cut it so the parent curve is preserved
      unit1.offer_blocks.push_back({plant.eol - lo, b.price});
      unit2.offer_blocks.push_back({hi - plant.eol, b.price});
    }
    acc = hi;
  }
  if (parent.initial_commitment) {
    unit1.initial_output = std::min(parent.initial_output, plant.eol);
    unit2.initial_output = parent.initial_output - unit1.initial_output;
  } else {
    unit1.initial_output = unit2.initial_output = 0.0;
  }
  return {unit1, unit2};
}

std::vector<std::vector<double>> profile_from_csv(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::vector<double> row;
    bool numeric = true;
    std::string tok;
    std::istringstream probe(cleaned);
    while (probe >> tok) {
      try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        row.push_back(v);
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (out.empty()) continue;  // header row
      throw ParseError("profile CSV line " + std::to_string(lineno) + ": non-numeric value");
    }
    if (!row.empty()) out.push_back(std::move(row));
  }
  if (!out.empty()) {
    std::size_t cols = out.front().size();
    for (std::size_t r = 1; r < out.size(); ++r)
      if (out[r].size() != cols)
        throw ParseError("profile CSV: ragged rows (row " + std::to_string(r + 1) + ")");
  }
  return out;
}

}  // namespace dcuc::grid
