#include <doctest.h>

#include "micp/micp_solver.hpp"

#include <cmath>
#include <sstream>

using namespace micp;

namespace {

const double kL = std::log1p(std::exp(1.0));

// Scenario-one recourse model over (x1, x2, y1, y2).
ModelInstance scenario_one(double x1, double x2, bool fix_x) {
  std::vector<VariableSpec> vars = {{"x1", VarKind::Binary, fix_x ? x1 : 0, fix_x ? x1 : 1},
                                    {"x2", VarKind::Binary, fix_x ? x2 : 0, fix_x ? x2 : 1},
                                    {"y1", VarKind::Integer, 0, 5},
                                    {"y2", VarKind::Integer, 0, 5}};
  auto m = make_model(vars);
  m.objective.linear = (Vec(4) << 0, 0, 0.5, 1).finished();
  m.constraints.push_back(ConvexExpr::sum({{1.0, ConvexExpr::softplus((Vec(4) << 0, 0, 1, 1).finished(), 0.0)},
                                           {1.0, ConvexExpr::affine((Vec(4) << -1, -1, -2, -kL).finished(), 1.0)}}));
  m.first_stage = {true, true, false, false};
  return m;
}

ModelInstance disk_model() {
  // min -x - y  s.t.  x^2 + y^2 <= 2.5, x integer in [-3,3], y in [-3,3]
  std::vector<VariableSpec> vars = {{"x", VarKind::Integer, -3, 3}, {"y", VarKind::Continuous, -3, 3}};
  auto m = make_model(vars);
  m.objective.linear = (Vec(2) << -1, -1).finished();
  m.constraints.push_back(ConvexExpr::sum({{1.0, ConvexExpr::squared_norm(Mat::Identity(2, 2), Vec::Zero(2))}}, -2.5));
  return m;
}

}  // namespace

TEST_CASE("micp: scenario one standalone at x = [1, 0]") {
  for (auto mode : {MilpMode::BranchBound, MilpMode::CuttingPlaneParametric}) {
    MicpOptions o;
    o.milp.mode = mode;
    auto c = micp_solve(scenario_one(1, 0, true), o);
    REQUIRE(c.status == SolveStatus::Optimal);
    CHECK(c.x[2] == doctest::Approx(1.0));
    CHECK(c.x[3] == doctest::Approx(0.0));
    CHECK(c.objective == doctest::Approx(0.5));
  }
}

TEST_CASE("micp: parametric mode matches the fixed model") {
  MicpOptions o;
  o.milp.mode = MilpMode::CuttingPlaneParametric;
  o.param_idx = {0, 1};
  o.param_value = (Vec(2) << 1, 0).finished();
  auto c = micp_solve(scenario_one(1, 0, false), o);
  REQUIRE(c.status == SolveStatus::Optimal);
  CHECK(c.objective == doctest::Approx(0.5));
  REQUIRE(c.last_master_result);
  auto t = extract_terminal_lp(*c.last_master, *c.last_master_result);
  REQUIRE(t.solution.optimal());
  CHECK(t.solution.objective == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("micp: integral relaxation inside the set stops at iteration one") {
  std::vector<VariableSpec> vars = {{"x", VarKind::Integer, 0, 3}};
  auto m = make_model(vars);
  m.objective.linear = Vec::Ones(1);
  m.constraints.push_back(ConvexExpr::sum({{1.0, ConvexExpr::power(Vec::Ones(1), 0.0, 2.0)}}, -4.0));
  auto c = micp_solve(m);
  REQUIRE(c.status == SolveStatus::Optimal);
  CHECK(c.iterations == 1);
  CHECK(c.termination == "membership");
}

TEST_CASE("micp: disk with an integer coordinate") {
  std::ostringstream trace;
  MicpOptions o;
  o.trace = &trace;
  auto c = micp_solve(disk_model(), o);
  REQUIRE(c.status == SolveStatus::Optimal);
  // x = 1, y = sqrt(1.5)
  CHECK(c.objective == doctest::Approx(-1.0 - std::sqrt(1.5)).epsilon(1e-6));
  for (size_t k = 1; k < c.L_history.size(); ++k) CHECK(c.L_history[k] >= c.L_history[k - 1]);
  for (const auto& lc : c.lemma_checks) CHECK(lc.passed);
  CHECK(!trace.str().empty());
}

TEST_CASE("micp: infeasible model") {
  std::vector<VariableSpec> vars = {{"x", VarKind::Integer, 0, 3}};
  auto m = make_model(vars);
  m.objective.linear = Vec::Ones(1);
  m.constraints.push_back(ConvexExpr::sum({{1.0, ConvexExpr::power(Vec::Ones(1), -1.5, 2.0)}}, -0.01));
  auto c = micp_solve(m);
  CHECK(c.status == SolveStatus::Infeasible);
}

TEST_CASE("micp: convex objective is epigraph reformulated") {
  std::vector<VariableSpec> vars = {{"x", VarKind::Integer, -3, 3}};
  auto m = make_model(vars);
  m.objective.convex = ConvexExpr::power(Vec::Ones(1), -0.4, 2.0);
  auto c = micp_solve(m);
  REQUIRE(c.status == SolveStatus::Optimal);
  CHECK(c.x.size() == 1);
  CHECK(c.x[0] == doctest::Approx(0.0));
  CHECK(c.objective == doctest::Approx(0.16).epsilon(1e-6));
}
