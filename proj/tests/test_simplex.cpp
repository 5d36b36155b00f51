#include "doctest.h"

#include <cmath>
#include <vector>

#include "dcuc/engine.hpp"
#include "dcuc/simplex.hpp"
#include "test_support.hpp"

using namespace dcuc;
using namespace dcuc::simplex;

namespace {

// Reference solver: classic dense two-phase tableau simplex with Bland's
// rule. Bounds become explicit rows, so it shares no machinery with the
// revised bounded-variable path under test. Finite bounds only.
struct DenseResult {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
};

DenseResult dense_tableau_solve(const milp::MilpProblem& p) {
  int n = p.ncols;
  std::vector<double> shift(p.lb);
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<int> slack_sign;  // +1 <=, -1 >=, 0 equality

  for (int r = 0; r < p.nrows(); ++r) {
    std::vector<double> a(static_cast<std::size_t>(n), 0.0);
    for (const auto& [col, coef] : p.rows[static_cast<std::size_t>(r)])
      a[static_cast<std::size_t>(col)] += coef;
    double b = p.rhs[static_cast<std::size_t>(r)];
    for (int j = 0; j < n; ++j) b -= a[static_cast<std::size_t>(j)] * shift[static_cast<std::size_t>(j)];
    eq_rows.push_back(std::move(a));
    eq_rhs.push_back(b);
    switch (p.sense[static_cast<std::size_t>(r)]) {
      case milp::RowSense::le: slack_sign.push_back(+1); break;
      case milp::RowSense::ge: slack_sign.push_back(-1); break;
      case milp::RowSense::eq: slack_sign.push_back(0); break;
    }
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> a(static_cast<std::size_t>(n), 0.0);
    a[static_cast<std::size_t>(j)] = 1.0;
    eq_rows.push_back(std::move(a));
    eq_rhs.push_back(p.ub[static_cast<std::size_t>(j)] - p.lb[static_cast<std::size_t>(j)]);
    slack_sign.push_back(+1);
  }

  int m = static_cast<int>(eq_rows.size());
  int nslack = 0;
  for (int s : slack_sign) nslack += (s != 0);
  int total = n + nslack + m;  // structural, slacks, artificials
  std::vector<std::vector<double>> tab(static_cast<std::size_t>(m),
                                       std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  std::vector<int> basis(static_cast<std::size_t>(m));
  int scol = n;
  for (int r = 0; r < m; ++r) {
    auto& row = tab[static_cast<std::size_t>(r)];
    for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = eq_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
    double rhs = eq_rhs[static_cast<std::size_t>(r)];
    if (slack_sign[static_cast<std::size_t>(r)] != 0)
      row[static_cast<std::size_t>(scol++)] = slack_sign[static_cast<std::size_t>(r)];
    if (rhs < 0.0) {
      for (auto& v : row) v = -v;
      rhs = -rhs;
    }
    row[static_cast<std::size_t>(total)] = rhs;
    int art = n + nslack + r;
    row[static_cast<std::size_t>(art)] = 1.0;
    basis[static_cast<std::size_t>(r)] = art;
  }

  std::vector<double> cost1(static_cast<std::size_t>(total), 0.0);
  for (int j = n + nslack; j < total; ++j) cost1[static_cast<std::size_t>(j)] = 1.0;
  std::vector<double> cost2(static_cast<std::size_t>(total), 0.0);
  for (int j = 0; j < n; ++j) cost2[static_cast<std::size_t>(j)] = p.obj[static_cast<std::size_t>(j)];

  auto run_phase = [&](const std::vector<double>& cost, bool bar_artificials) -> int {
    for (int iter = 0; iter < 20000; ++iter) {
      // reduced costs from scratch; m is tiny
      std::vector<double> y(static_cast<std::size_t>(m));
      for (int r = 0; r < m; ++r) y[static_cast<std::size_t>(r)] = cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])];
      int enter = -1;
      for (int j = 0; j < total && enter < 0; ++j) {
        if (bar_artificials && j >= n + nslack) continue;
        bool in_basis = false;
        for (int r = 0; r < m; ++r) in_basis |= (basis[static_cast<std::size_t>(r)] == j);
        if (in_basis) continue;
        double rc = cost[static_cast<std::size_t>(j)];
        for (int r = 0; r < m; ++r) rc -= y[static_cast<std::size_t>(r)] * tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        if (rc < -1e-9) enter = j;  // Bland: first improving index
      }
      if (enter < 0) return 0;
      int leave = -1;
      double best = 0.0;
      for (int r = 0; r < m; ++r) {
        double a = tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(enter)];
        if (a > 1e-9) {
          double ratio = tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(total)] / a;
          if (leave < 0 || ratio < best - 1e-12 ||
              (ratio < best + 1e-12 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)]))
            leave = r, best = ratio;
        }
      }
      if (leave < 0) return 2;  // unbounded direction
      auto& prow = tab[static_cast<std::size_t>(leave)];
      double piv = prow[static_cast<std::size_t>(enter)];
      for (auto& v : prow) v /= piv;
      for (int r = 0; r < m; ++r) {
        if (r == leave) continue;
        double f = tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(enter)];
        if (f == 0.0) continue;
        for (int j = 0; j <= total; ++j)
          tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      }
      basis[static_cast<std::size_t>(leave)] = enter;
    }
    return 1;  // iteration limit
  };

  DenseResult out;
  if (run_phase(cost1, false) != 0) return out;
  double art_sum = 0.0;
  for (int r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] >= n + nslack)
      art_sum += tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(total)];
  if (art_sum > 1e-7) {
    out.status = LpStatus::infeasible;
    return out;
  }
  int rc2 = run_phase(cost2, true);
  if (rc2 == 2) {
    out.status = LpStatus::unbounded;
    return out;
  }
  if (rc2 != 0) return out;
  double obj = 0.0;
  for (int r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] < n)
      obj += p.obj[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] *
             tab[static_cast<std::size_t>(r)][static_cast<std::size_t>(total)];
  for (int j = 0; j < n; ++j) obj += p.obj[static_cast<std::size_t>(j)] * shift[static_cast<std::size_t>(j)];
  out.status = LpStatus::optimal;
  out.objective = obj;
  return out;
}

milp::MilpProblem random_lp(Rng& rng) {
  milp::MilpProblem p;
  int n = rng.uniform_int(2, 8);
  int m = rng.uniform_int(1, 6);
  p.ncols = n;
  p.lb.assign(static_cast<std::size_t>(n), 0.0);
  p.ub.resize(static_cast<std::size_t>(n));
  p.obj.resize(static_cast<std::size_t>(n));
  p.binary.assign(static_cast<std::size_t>(n), 0);
  p.col_info.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    p.ub[static_cast<std::size_t>(j)] = rng.uniform(1.0, 10.0);
    p.obj[static_cast<std::size_t>(j)] = rng.uniform(-5.0, 5.0);
    p.col_names.push_back("x" + std::to_string(j));
  }
  std::vector<double> anchor(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) anchor[static_cast<std::size_t>(j)] = rng.uniform(0.0, p.ub[static_cast<std::size_t>(j)]);
  for (int r = 0; r < m; ++r) {
    std::vector<std::pair<int, double>> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < 0.6) {
        double coef = rng.uniform(-3.0, 3.0);
        terms.push_back({j, coef});
        act += coef * anchor[static_cast<std::size_t>(j)];
      }
    }
    if (terms.empty()) terms.push_back({0, 1.0}), act = anchor[0];
    double roll = rng.uniform();
    if (roll < 0.6) {
      p.sense.push_back(milp::RowSense::le);
      p.rhs.push_back(act + rng.uniform(-2.0, 4.0));
    } else if (roll < 0.85) {
      p.sense.push_back(milp::RowSense::ge);
      p.rhs.push_back(act - rng.uniform(-2.0, 4.0));
    } else {
      p.sense.push_back(milp::RowSense::eq);
      p.rhs.push_back(act);
    }
    p.rows.push_back(std::move(terms));
    p.row_info.push_back({});
    p.row_names.push_back("r" + std::to_string(r));
  }
  return p;
}

}  // namespace

TEST_CASE("bounded simplex agrees with the dense tableau on random programs") {
  Rng rng(31415);
  int optimal_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 50; ++trial) {
    milp::MilpProblem p = random_lp(rng);
    DenseResult want = dense_tableau_solve(p);
    REQUIRE(want.status != LpStatus::iteration_limit);

    LpSolution got = solve_lp(p);
    CAPTURE(trial);
    CHECK(got.status == want.status);
    if (want.status == LpStatus::optimal && got.status == LpStatus::optimal) {
      ++optimal_seen;
      CHECK(std::abs(got.objective - want.objective) <=
            1e-7 * std::max(1.0, std::abs(want.objective)));

      // returned point satisfies every row and bound
      for (int r = 0; r < p.nrows(); ++r) {
        double a = p.row_activity(r, got.x);
        double b = p.rhs[static_cast<std::size_t>(r)];
        switch (p.sense[static_cast<std::size_t>(r)]) {
          case milp::RowSense::le: CHECK(a <= b + 1e-7); break;
          case milp::RowSense::ge: CHECK(a >= b - 1e-7); break;
          case milp::RowSense::eq: CHECK(a == doctest::Approx(b).epsilon(1e-7)); break;
        }
      }
      for (int j = 0; j < p.ncols; ++j) {
        CHECK(got.x[static_cast<std::size_t>(j)] >= p.lb[static_cast<std::size_t>(j)] - 1e-7);
        CHECK(got.x[static_cast<std::size_t>(j)] <= p.ub[static_cast<std::size_t>(j)] + 1e-7);
      }
    } else {
      infeasible_seen += (want.status == LpStatus::infeasible);
    }
  }
  // the generator must exercise both outcomes to mean anything
  CHECK(optimal_seen >= 20);
  CHECK(infeasible_seen >= 3);
}

TEST_CASE("dual values price the optimal point consistently") {
  Rng rng(27182);
  for (int trial = 0; trial < 20; ++trial) {
    milp::MilpProblem p = random_lp(rng);
    LpSolution sol = solve_lp(p);
    if (sol.status != LpStatus::optimal) continue;
    REQUIRE(sol.duals.size() == static_cast<std::size_t>(p.nrows()));
    REQUIRE(sol.reduced_costs.size() == static_cast<std::size_t>(p.ncols));

    // c = A'y + rc, column by column
    for (int j = 0; j < p.ncols; ++j) {
      double acc = sol.reduced_costs[static_cast<std::size_t>(j)];
      for (int r = 0; r < p.nrows(); ++r) {
        for (const auto& [col, coef] : p.rows[static_cast<std::size_t>(r)])
          if (col == j) acc += coef * sol.duals[static_cast<std::size_t>(r)];
      }
      CHECK(acc == doctest::Approx(p.obj[static_cast<std::size_t>(j)]).epsilon(1e-6));
    }

    // complementary slackness: inactive rows carry no price, interior
    // columns carry no reduced cost
    for (int r = 0; r < p.nrows(); ++r) {
      if (p.sense[static_cast<std::size_t>(r)] == milp::RowSense::eq) continue;
      double slack = std::abs(p.row_activity(r, sol.x) - p.rhs[static_cast<std::size_t>(r)]);
      if (slack > 1e-6) CHECK(std::abs(sol.duals[static_cast<std::size_t>(r)]) <= 1e-6);
    }
    for (int j = 0; j < p.ncols; ++j) {
      double to_lb = sol.x[static_cast<std::size_t>(j)] - p.lb[static_cast<std::size_t>(j)];
      double to_ub = p.ub[static_cast<std::size_t>(j)] - sol.x[static_cast<std::size_t>(j)];
      if (to_lb > 1e-6 && to_ub > 1e-6)
        CHECK(std::abs(sol.reduced_costs[static_cast<std::size_t>(j)]) <= 1e-6);
    }
  }
}

TEST_CASE("single variable box") {
  milp::MilpProblem p;
  p.ncols = 1;
  p.obj = {1.0};
  p.lb = {3.0};
  p.ub = {7.0};
  p.binary = {0};
  p.col_info.resize(1);
  p.col_names = {"x"};
  p.rows.push_back({{0, 1.0}});
  p.sense.push_back(milp::RowSense::le);
  p.rhs.push_back(100.0);
  p.row_info.push_back({});
  p.row_names.push_back("r0");

  LpSolution sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.x[0] == doctest::Approx(3.0));

  p.obj = {-1.0};
  sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.x[0] == doctest::Approx(7.0));
}

TEST_CASE("fixed columns are honored") {
  milp::MilpProblem p;
  p.ncols = 2;
  p.obj = {1.0, 2.0};
  p.lb = {4.0, 0.0};
  p.ub = {4.0, 10.0};
  p.binary = {0, 0};
  p.col_info.resize(2);
  p.col_names = {"x", "y"};
  p.rows.push_back({{0, 1.0}, {1, 1.0}});
  p.sense.push_back(milp::RowSense::ge);
  p.rhs.push_back(6.0);
  p.row_info.push_back({});
  p.row_names.push_back("r0");

  LpSolution sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.x[0] == doctest::Approx(4.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(8.0));
}

TEST_CASE("conflicting rows come back infeasible") {
  milp::MilpProblem p;
  p.ncols = 1;
  p.obj = {0.0};
  p.lb = {0.0};
  p.ub = {10.0};
  p.binary = {0};
  p.col_info.resize(1);
  p.col_names = {"x"};
  p.rows.push_back({{0, 1.0}});
  p.sense.push_back(milp::RowSense::ge);
  p.rhs.push_back(5.0);
  p.rows.push_back({{0, 1.0}});
  p.sense.push_back(milp::RowSense::le);
  p.rhs.push_back(3.0);
  p.row_info.resize(2);
  p.row_names = {"lo", "hi"};

  CHECK(solve_lp(p).status == LpStatus::infeasible);
}

TEST_CASE("free improving ray is reported unbounded") {
  milp::MilpProblem p;
  p.ncols = 2;
  p.obj = {-1.0, 0.0};
  p.lb = {0.0, 0.0};
  p.ub = {kInf, kInf};
  p.binary = {0, 0};
  p.col_info.resize(2);
  p.col_names = {"x", "y"};
  p.rows.push_back({{0, 1.0}, {1, -1.0}});
  p.sense.push_back(milp::RowSense::eq);
  p.rhs.push_back(0.0);
  p.row_info.resize(1);
  p.row_names = {"tie"};

  CHECK(solve_lp(p).status == LpStatus::unbounded);
}

TEST_CASE("reoptimization after bound changes matches a fresh solve") {
  grid::CaseData c = testsupport::tiny_coal_case(3, {40.0, 60.0, 50.0});
  auto [p, vi] = milp::assemble(c, {}, milp::ramp_level_from_name("low"));

  BoundedSimplex solver(p);
  LpSolution relax = solver.primal(p.lb, p.ub);
  REQUIRE(relax.status == LpStatus::optimal);
  CHECK(solver.has_basis());

  // pin the gas unit off in the middle slice and reoptimize dual-side
  std::vector<double> lb = p.lb, ub = p.ub;
  int col = vi.column(milp::VarKind::commit, 1, 1, 0);
  ub[static_cast<std::size_t>(col)] = 0.0;
  LpSolution warm = solver.reoptimize(lb, ub);
  LpSolution fresh = solve_lp([&] {
    milp::MilpProblem q = p;
    q.ub[static_cast<std::size_t>(col)] = 0.0;
    return q;
  }());
  REQUIRE(warm.status == fresh.status);
  if (fresh.status == LpStatus::optimal) {
    CHECK(warm.objective == doctest::Approx(fresh.objective).epsilon(1e-7));
    // a restriction can only cost more
    CHECK(warm.objective >= relax.objective - 1e-7);
  }

  Basis saved = solver.basis();
  CHECK(saved.valid());
  LpSolution again = solver.dual(lb, ub, saved);
  REQUIRE(again.status == fresh.status);
  if (fresh.status == LpStatus::optimal)
    CHECK(again.objective == doctest::Approx(fresh.objective).epsilon(1e-7));
}

TEST_CASE("relaxation of a commitment instance prices below the integer optimum") {
  grid::CaseData c = testsupport::tiny_coal_case(3, {40.0, 60.0, 50.0});
  auto [p, vi] = milp::assemble(c, {}, milp::ramp_level_from_name("high"));
  LpSolution relax = solve_lp(p);
  REQUIRE(relax.status == LpStatus::optimal);
  engine::MilpSolution integer = engine::solve_milp(p);
  REQUIRE(integer.status == engine::MilpStatus::optimal);
  CHECK(relax.objective <= integer.objective + 1e-6);
}
