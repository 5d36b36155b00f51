#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dcuc/common.hpp"
#include "dcuc/emission.hpp"

namespace dcuc::grid {

struct Bus {
  int id = 0;                // 1..N after canonicalization
  bool reference = false;    // exactly one per network
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double susceptance = 0.0;  // per-unit, 1/x under DC assumptions
  double capacity = 0.0;     // MW, symmetric
};

struct Network {
  std::vector<Bus> buses;
  std::vector<Line> lines;

  int bus_count() const { return static_cast<int>(buses.size()); }
  int line_count() const { return static_cast<int>(lines.size()); }
  int reference_bus() const;  // 1-based id
  bool connected() const;
};

struct OfferBlock {
  double quantity = 0.0;  // MW
  double price = 0.0;     // $/MWh
};

enum class GeneratorKind { coal, gas, nuclear, wind };

const char* to_string(GeneratorKind k);
GeneratorKind generator_kind_from_string(const std::string& s);

struct GeneratorSpec {
  int id = 0;
  int bus = 0;
  GeneratorKind kind = GeneratorKind::gas;
  double g_min = 0.0;
  double g_max = 0.0;
  double ramp_limit = 0.0;        // MW per hour
  double no_load_cost = 0.0;      // $/h while committed
  double startup_cost = 0.0;      // $ per start
  double shutdown_cost = 0.0;     // $ per stop
  int min_uptime = 1;             // hours
  int min_downtime = 1;           // hours
  std::vector<OfferBlock> offer_blocks;
  bool initial_commitment = false;
  double initial_output = 0.0;    // MW
  int hours_in_initial_state = 1;

  bool is_wind() const { return kind == GeneratorKind::wind; }
  // Fast-start unit: can reach full output within one slice.
  bool is_peaker() const { return !is_wind() && ramp_limit >= g_max; }
  double offer_quantity_total() const;
  // Convex piecewise-linear energy cost at output level g.
  double offer_cost_at(double g) const;
};

struct CoalPlantSpec {
  int generator = 0;  // id of the parent GeneratorSpec (kind == coal)
  double eol = 0.0;   // economic operation level, MW; Unit I spans [g_min, eol]
  emission::StaticEmissionParams static_params;
  emission::DynamicEmissionParams dynamic_params;
  double ramp_up_cost = 0.0;    // $/MW on alpha, case-level default
  double ramp_down_cost = 0.0;  // $/MW on beta
};

struct StorageSpec {
  int id = 0;
  int bus = 0;
  double power_rating = 0.0;        // MW, psi
  double energy_rating = 0.0;       // MWh, xi
  double charge_efficiency = 1.0;
  double discharge_efficiency = 1.0;
  double initial_energy = 0.0;      // MWh
};

struct Scenario {
  double probability = 1.0;
  // Optional overrides; empty means "use base profiles".
  std::vector<std::vector<double>> load;  // T x N
  std::vector<std::vector<double>> wind;  // T x (#wind units)
};

struct CaseData {
  std::string name;
  double base_mva = 100.0;
  int horizon = 0;                          // T slices
  std::vector<double> slice_hours;          // lambda_t, size T
  Network network;
  std::vector<GeneratorSpec> generators;    // includes coal parents and wind
  std::vector<CoalPlantSpec> coal_plants;
  std::vector<StorageSpec> storages;
  std::vector<std::vector<double>> load;    // T x N, MW
  std::vector<std::vector<double>> wind;    // T x (#wind units), MW
  std::vector<Scenario> scenarios;
  bool allow_curtailment = false;

  const GeneratorSpec& generator_by_id(int id) const;
  std::vector<int> wind_unit_ids() const;   // in generator-list order
  int scenario_count() const { return static_cast<int>(scenarios.size()); }
  // Effective profiles for scenario k (base unless overridden).
  const std::vector<std::vector<double>>& load_for(int k) const;
  const std::vector<std::vector<double>>& wind_for(int k) const;
};

struct Violation {
  std::string path;     // e.g. "storages[0].bus"
  std::string message;
};

// Parses and validates a case file; throws ParseError / ValidationError
// (the latter lists every violation found).
CaseData load_case(const std::string& path);
CaseData parse_case_json(const std::string& text);
std::string serialize_case(const CaseData& c);

// Full invariant sweep; empty result means the case is usable.
std::vector<Violation> validate_case(const CaseData& c);

// N x N DC susceptance matrix: row sums zero, symmetric.
Eigen::MatrixXd build_bus_susceptance(const Network& net);

// L x N line-flow matrix: row l has +b at the from bus, -b at the to bus.
Eigen::MatrixXd build_branch_susceptance(const Network& net);

// Splits a coal plant at its EOL: Unit I keeps [g_min, eol] and the offer
// blocks up to cumulative quantity eol (a straddling block is cut), Unit II
// gets [0, g_max - eol] and the remainder. Start/stop behaviour stays with
// the parent, so the returned specs carry no startup data of their own.
std::pair<GeneratorSpec, GeneratorSpec> split_coal_plant(
    const GeneratorSpec& parent, const CoalPlantSpec& plant);

// rows = slices, columns = buses (or wind units); plain numeric CSV with an
// optional header row.
std::vector<std::vector<double>> profile_from_csv(const std::string& text);

}  // namespace dcuc::grid
