#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "dcuc/emission.hpp"
#include "dcuc/grid.hpp"

namespace dcuc::milp {

// Column kinds, in index-major order. Every kind is laid out contiguously:
// column = offset(kind) + (entity * T + t) * K + k.
enum class VarKind : int {
  theta = 0,   // bus angle, rad
  gen,         // plant output, MW (non-wind, coal parents included)
  wind,        // wind injection, MW
  commit,      // u
  start,       // s
  stop,        // h
  cost,        // y, offer-curve epigraph, $
  coal1,       // Unit I output
  coal2,       // Unit II output
  commit1,     // Unit I commitment
  commit2,     // Unit II commitment
  ramp_up,     // alpha, MW
  ramp_down,   // beta, MW
  cost_up,     // y^alpha, $
  cost_down,   // y^beta, $
  charge,      // gamma, MW
  discharge,   // nu, MW
  soc,         // delta, MWh
};
inline constexpr int kKindCount = 18;

const char* to_string(VarKind k);

struct ColumnKey {
  VarKind kind = VarKind::theta;
  int entity = 0;  // position within the kind's entity list
  int t = 0;
  int k = 0;
};

// Bijection between (kind, entity, t, k) and dense column indices for one case.
class VariableIndex {
 public:
  VariableIndex() = default;
  explicit VariableIndex(const grid::CaseData& c);

  int column(VarKind kind, int entity, int t, int k) const;
  ColumnKey key(int column) const;
  int total() const { return total_; }
  int horizon() const { return T_; }
  int scenarios() const { return K_; }
  int entities(VarKind kind) const { return count_[static_cast<int>(kind)]; }

  // Positions into CaseData::generators for the two disjoint groups.
  const std::vector<int>& nonwind_generators() const { return nonwind_; }
  const std::vector<int>& wind_generators() const { return windg_; }

 private:
  std::array<int, kKindCount> offset_{};
  std::array<int, kKindCount> count_{};
  std::vector<int> nonwind_, windg_;
  int T_ = 0, K_ = 0, total_ = 0;
};

enum class RowSense { le, eq, ge };

struct RowAnnotation {
  int family = 0;   // 1..14 for explicit rows (bound families 15..18 are implicit)
  int entity = -1;  // bus id, generator id, plant id, line index, storage id
  int t = -1;
  int k = -1;
};

struct MilpProblem {
  int ncols = 0;
  std::vector<double> obj;    // minimize obj . x
  std::vector<double> lb, ub;
  std::vector<char> binary;   // per column
  std::vector<ColumnKey> col_info;
  std::vector<std::string> col_names;

  std::vector<std::vector<std::pair<int, double>>> rows;  // sparse, column/coef
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<RowAnnotation> row_info;
  std::vector<std::string> row_names;

  int nrows() const { return static_cast<int>(rows.size()); }
  double row_activity(int r, const std::vector<double>& x) const;
  double objective_value(const std::vector<double>& x) const;
};

struct RampCostLevel {
  double ru = 0.0;  // $/MW on alpha
  double rd = 0.0;  // $/MW on beta
};

// Named sensitivity levels: zeros, low, high, very_high.
RampCostLevel ramp_level_from_name(const std::string& name);

struct AssembleOptions {
  // When set, y^alpha / y^beta epigraphs price the per-plant emission blocks
  // at carbon_price * (1 + damage_mult) dollars per tonne instead of the
  // scalar level rates.
  bool use_emission_blocks = false;
  double carbon_price = 0.0;   // $/tCO2
  double damage_mult = 0.0;
  bool include_energy_adequacy = false;
};

// One epigraph cut y >= slope * x + intercept.
struct EpigraphCut {
  double slope = 0.0;
  double intercept = 0.0;
};

// Cuts tracing a convex block curve; throws on decreasing block prices.
std::vector<EpigraphCut> epigraph_cuts(const std::vector<grid::OfferBlock>& curve);

// Appends the cuts as rows "slope*x - y <= -intercept" with the given
// annotation; names get a _s{i} suffix per segment.
void add_pwl_epigraph(MilpProblem& p, const std::vector<grid::OfferBlock>& curve,
                      int x_col, int y_col, const RowAnnotation& ann,
                      const std::string& name_stem);

// Builds the full commitment problem. `blocks` carries one emission-block
// list per coal plant when options.use_emission_blocks is set (it may be
// empty otherwise).
std::pair<MilpProblem, VariableIndex> assemble(
    const grid::CaseData& c,
    const std::vector<std::vector<emission::EmissionBlock>>& blocks,
    const RampCostLevel& level, const AssembleOptions& options = {});

struct ResidualReport {
  std::array<double, 19> family{};  // indexed 1..18; [0] unused
  double worst = 0.0;               // max over families
  double integrality = 0.0;
  double objective = 0.0;

  bool within(double tol) const;
  std::string to_text() const;
};

const char* family_name(int family);

// Evaluates a candidate point against every row and bound of the problem.
ResidualReport check_solution(const MilpProblem& p, const std::vector<double>& x);

}  // namespace dcuc::milp
