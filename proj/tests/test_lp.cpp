#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "stsp/lp.hpp"
#include "stsp/milp.hpp"
#include "support/helpers.hpp"
#include "support/tableau_lp.hpp"

using namespace stsp;

namespace {

MilpModel one_var(double lo, double hi, double cost, ObjSense sense) {
  MilpModel m;
  m.add_variable("x", lo, hi, VarKind::kContinuous);
  m.set_objective({{0, cost}}, sense);
  return m;
}

// Dual objective of min c'x s.t. rows, l <= x <= u, from the returned row
// duals: pi'b plus the bound contribution of every nonbasic reduced cost.
double dual_objective(const MilpModel& m, const LpSolution& sol) {
  double val = 0.0;
  for (int i = 0; i < m.n_constraints(); ++i) val += sol.duals[i] * m.constraint(i).rhs;
  std::vector<double> rc(m.n_vars(), 0.0);
  for (const RowEntry& e : m.objective()) rc[e.var] = e.coef;
  for (int i = 0; i < m.n_constraints(); ++i) {
    for (const RowEntry& e : m.constraint(i).row) rc[e.var] -= sol.duals[i] * e.coef;
  }
  for (int j = 0; j < m.n_vars(); ++j) {
    if (rc[j] > kEpsOpt * 10) {
      REQUIRE(m.variable(j).lower > -kInf);  // else the dual would be infeasible
      val += rc[j] * m.variable(j).lower;
    } else if (rc[j] < -kEpsOpt * 10) {
      REQUIRE(m.variable(j).upper < kInf);
      val += rc[j] * m.variable(j).upper;
    }
  }
  return val;
}

}  // namespace

TEST_SUITE_BEGIN("lp_core");

TEST_CASE("minimizes a single variable against a row") {
  MilpModel m = one_var(0, kInf, 1, ObjSense::kMin);
  m.add_constraint("lb", {{0, 1.0}}, RowSense::kGe, 3.0);
  auto [sol, st] = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(sol.duals[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(st.basis.size() == 1);
}

TEST_CASE("no-row models are solved by bounds alone") {
  auto [lo_sol, s1] = solve_lp(one_var(3, 10, 1, ObjSense::kMin));
  REQUIRE(lo_sol.status == LpStatus::kOptimal);
  CHECK(lo_sol.objective == doctest::Approx(3.0));

  auto [hi_sol, s2] = solve_lp(one_var(3, 10, 1, ObjSense::kMax));
  REQUIRE(hi_sol.status == LpStatus::kOptimal);
  CHECK(hi_sol.objective == doctest::Approx(10.0));
  CHECK(hi_sol.x[0] == doctest::Approx(10.0));
}

TEST_CASE("detects an infeasible pair of rows") {
  MilpModel m = one_var(0, kInf, 1, ObjSense::kMin);
  m.add_constraint("le", {{0, 1.0}}, RowSense::kLe, 0.0);
  m.add_constraint("ge", {{0, 1.0}}, RowSense::kGe, 1.0);
  auto [sol, st] = solve_lp(m);
  CHECK(sol.status == LpStatus::kInfeasible);
}

TEST_CASE("detects unboundedness") {
  auto [sol, st] = solve_lp(one_var(0, kInf, 1, ObjSense::kMax));
  CHECK(sol.status == LpStatus::kUnbounded);

  MilpModel m = one_var(-kInf, kInf, 1, ObjSense::kMin);
  m.add_constraint("cap", {{0, 1.0}}, RowSense::kLe, 4.0);
  auto [sol2, st2] = solve_lp(m);
  CHECK(sol2.status == LpStatus::kUnbounded);
}

TEST_CASE("maximization reports duals in the model sense") {
  MilpModel m = one_var(0, kInf, 1, ObjSense::kMax);
  m.add_constraint("cap", {{0, 1.0}}, RowSense::kLe, 5.0);
  auto [sol, st] = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(5.0));
  // Relaxing the capacity by one unit gains one unit of objective.
  CHECK(sol.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("bound flips reach the optimum inside a box") {
  MilpModel m;
  m.add_variable("x", 0, 1, VarKind::kContinuous);
  m.add_variable("y", 0, 1, VarKind::kContinuous);
  m.add_constraint("cap", {{0, 1.0}, {1, 1.0}}, RowSense::kLe, 1.5);
  m.set_objective({{0, -1.0}, {1, -1.0}}, ObjSense::kMin);
  auto [sol, st] = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-1.5).epsilon(1e-9));
  CHECK(sol.x[0] + sol.x[1] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("equality rows with negative rhs are repaired in phase 1") {
  MilpModel m;
  m.add_variable("x", 0, kInf, VarKind::kContinuous);
  m.add_variable("y", 0, kInf, VarKind::kContinuous);
  m.add_constraint("bal", {{0, 1.0}, {1, -1.0}}, RowSense::kEq, -2.0);
  m.set_objective({{0, 1.0}, {1, 1.0}}, ObjSense::kMin);
  auto [sol, st] = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("free variables move in both directions") {
  MilpModel m = one_var(-kInf, kInf, 1, ObjSense::kMin);
  m.add_constraint("lb", {{0, 1.0}}, RowSense::kGe, -4.0);
  auto [sol, st] = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("duplicate and degenerate rows terminate") {
  MilpModel m = one_var(0, kInf, 1, ObjSense::kMin);
  for (int i = 0; i < 5; ++i) {
    m.add_constraint("lb" + std::to_string(i), {{0, 1.0}}, RowSense::kGe, 1.0);
  }
  // A zero-width box on a second variable adds degenerate pivoting fodder.
  m.add_variable("z", 2, 2, VarKind::kContinuous);
  auto [sol, st] = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("agrees with the dense tableau reference on random LPs") {
  std::mt19937 rng(20260819);
  int optimal = 0, infeasible = 0, unbounded = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    MilpModel m = testsup::random_lp_model(rng);
    auto [sol, st] = solve_lp(m);
    testsup::TableauResult ref = testsup::tableau_solve(m);
    REQUIRE(ref.status != LpStatus::kNumericalFailure);
    REQUIRE(sol.status == ref.status);
    if (sol.status == LpStatus::kOptimal) {
      ++optimal;
      CHECK(std::abs(sol.objective - ref.objective) <=
            1e-6 * (1.0 + std::abs(ref.objective)));
      // Primal feasibility of the reported point, row by row.
      for (int i = 0; i < m.n_constraints(); ++i) {
        const Constraint& c = m.constraint(i);
        double lhs = 0.0;
        for (const RowEntry& e : c.row) lhs += e.coef * sol.x[e.var];
        if (c.sense == RowSense::kLe) CHECK(lhs <= c.rhs + 1e-6);
        if (c.sense == RowSense::kGe) CHECK(lhs >= c.rhs - 1e-6);
        if (c.sense == RowSense::kEq) CHECK(lhs == doctest::Approx(c.rhs).epsilon(1e-6));
      }
    } else if (sol.status == LpStatus::kInfeasible) {
      ++infeasible;
    } else if (sol.status == LpStatus::kUnbounded) {
      ++unbounded;
    }
  }
  // The comparison only means something if the draw hits every status.
  CHECK(optimal >= 20);
  CHECK(infeasible >= 5);
  CHECK(unbounded >= 1);
}

TEST_CASE("weak duality and complementary slackness hold on optimal returns") {
  std::mt19937 rng(777);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    MilpModel m = testsup::random_lp_model(rng, 20, 20);
    if (m.objective_sense() != ObjSense::kMin) continue;
    auto [sol, st] = solve_lp(m);
    if (sol.status != LpStatus::kOptimal) continue;
    ++checked;
    double dual = dual_objective(m, sol);
    CHECK(std::abs(sol.objective - dual) <= kEpsOpt * 100 * (1.0 + std::abs(sol.objective)));
    for (int i = 0; i < m.n_constraints(); ++i) {
      if (std::abs(sol.duals[i]) <= 1e-6) continue;
      const Constraint& c = m.constraint(i);
      double lhs = 0.0;
      for (const RowEntry& e : c.row) lhs += e.coef * sol.x[e.var];
      CHECK(lhs == doctest::Approx(c.rhs).epsilon(1e-6));  // active row
    }
  }
  CHECK(checked >= 15);
}

TEST_CASE("long runs exercise the eta file and refactorization") {
  // Chain of equalities x_1 = 1, x_{i+1} - x_i = 1: phase 1 must walk every
  // structural column into the basis, one pivot each, so the eta file fills
  // past the refactorization interval deterministically.
  const int n = 150;
  MilpModel m;
  std::vector<RowEntry> obj;
  for (int j = 0; j < n; ++j) {
    m.add_variable("x" + std::to_string(j + 1), 0, kInf, VarKind::kContinuous);
    obj.push_back({j, 1.0});
  }
  m.set_objective(obj, ObjSense::kMin);
  m.add_constraint("start", {{0, 1.0}}, RowSense::kEq, 1.0);
  for (int j = 0; j + 1 < n; ++j) {
    m.add_constraint("step" + std::to_string(j + 1), {{j, -1.0}, {j + 1, 1.0}},
                     RowSense::kEq, 1.0);
  }

  LpSolver solver(m);
  LpSolution sol = solver.solve();
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(solver.iterations() > 100);  // otherwise the eta path never ran
  CHECK(sol.objective == doctest::Approx(n * (n + 1) / 2.0).epsilon(1e-9));
  for (int j = 0; j < n; ++j) {
    CHECK(sol.x[j] == doctest::Approx(j + 1.0).epsilon(1e-9));
  }

  testsup::TableauResult ref = testsup::tableau_solve(m);
  REQUIRE(ref.status == LpStatus::kOptimal);
  CHECK(std::abs(sol.objective - ref.objective) <= 1e-6 * (1.0 + std::abs(ref.objective)));
}

TEST_CASE("reoptimize with added rows matches cold solves") {
  std::mt19937 rng(99);
  MilpModel base;
  for (int j = 0; j < 8; ++j) {
    base.add_variable("v" + std::to_string(j), 0, 10, VarKind::kContinuous);
  }
  std::vector<RowEntry> obj;
  for (int j = 0; j < 8; ++j) obj.push_back({j, static_cast<double>(j % 3 + 1)});
  base.set_objective(obj, ObjSense::kMin);
  base.add_constraint("mass", obj, RowSense::kGe, 6.0);

  auto [sol0, state] = solve_lp(base);
  REQUIRE(sol0.status == LpStatus::kOptimal);

  SUBCASE("a redundant row keeps the objective") {
    Constraint relax{"relax", {{0, 1.0}}, RowSense::kLe, 50.0};
    auto [sol, st] = reoptimize_with_rows(base, state, {relax});
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(sol0.objective).epsilon(1e-9));
  }

  SUBCASE("twenty sequential cuts equal the cold solve each round") {
    MilpModel grown = base;
    std::vector<Constraint> cuts;
    double prev = sol0.objective;
    for (int round = 0; round < 20; ++round) {
      CAPTURE(round);
      // A fresh >= row, violated at the current point more often than not.
      std::vector<RowEntry> row;
      for (int j = 0; j < 8; ++j) {
        int coef = testsup::uniform_int(rng, 0, 2);
        if (coef != 0) row.push_back({j, static_cast<double>(coef)});
      }
      if (row.empty()) row.push_back({0, 1.0});
      Constraint cut{"cut" + std::to_string(round), row, RowSense::kGe,
                     static_cast<double>(testsup::uniform_int(rng, 1, 12))};
      cuts.push_back(cut);
      grown.add_constraint(cut.name, cut.row, cut.sense, cut.rhs);

      auto [warm_sol, warm_state] = reoptimize_with_rows(base, state, cuts);
      auto [cold_sol, cold_state] = solve_lp(grown);
      REQUIRE(warm_sol.status == cold_sol.status);
      REQUIRE(warm_sol.status == LpStatus::kOptimal);  // rows are satisfiable in the box
      CHECK(std::abs(warm_sol.objective - cold_sol.objective) <=
            1e-6 * (1.0 + std::abs(cold_sol.objective)));
      CHECK(warm_sol.objective >= prev - 1e-7);  // cuts only tighten a min
      prev = warm_sol.objective;
    }
  }
}

TEST_CASE("warm starts resume without re-pivoting") {
  std::mt19937 rng(2024);
  MilpModel m = testsup::random_lp_model(rng, 25, 25);
  auto [sol, st] = solve_lp(m);
  for (int guard = 0; sol.status != LpStatus::kOptimal && guard < 20; ++guard) {
    m = testsup::random_lp_model(rng, 25, 25);
    std::tie(sol, st) = solve_lp(m);
  }
  REQUIRE(sol.status == LpStatus::kOptimal);

  LpSolver resumed(m);
  resumed.install_state(st);
  LpSolution again = resumed.solve();
  REQUIRE(again.status == LpStatus::kOptimal);
  CHECK(again.objective == doctest::Approx(sol.objective).epsilon(1e-9));
  CHECK(resumed.iterations() <= 2);  // optimality confirmed on the spot
}

TEST_CASE("bound overrides match a cold solve of the tightened model") {
  std::mt19937 rng(5150);
  int compared = 0;
  for (int trial = 0; trial < 80 && compared < 10; ++trial) {
    CAPTURE(trial);
    MilpModel m = testsup::random_lp_model(rng, 12, 12);
    auto [sol, st] = solve_lp(m);
    if (sol.status != LpStatus::kOptimal) continue;
    int var = testsup::uniform_int(rng, 0, m.n_vars() - 1);
    double lo = m.variable(var).lower;
    double split = std::floor(sol.x[var]);
    if (split < lo || split >= m.variable(var).upper) continue;
    ++compared;

    LpSolver solver(m);
    solver.install_state(st);
    solver.set_var_bounds(var, lo, split);
    LpSolution warm_sol = solver.solve();

    auto [cold_sol, cold_st] = solve_lp(testsup::clone_with_bounds(m, var, lo, split));
    REQUIRE(warm_sol.status == cold_sol.status);
    if (cold_sol.status == LpStatus::kOptimal) {
      CHECK(std::abs(warm_sol.objective - cold_sol.objective) <=
            1e-6 * (1.0 + std::abs(cold_sol.objective)));
    }
  }
  CHECK(compared >= 10);
}

TEST_SUITE_END();
