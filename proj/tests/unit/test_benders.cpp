#include <doctest.h>

#include "micp/benders.hpp"
#include "micp/brute_force.hpp"
#include "micp/instances.hpp"

#include <cmath>

using namespace micp;

TEST_CASE("benders: cut is tight at x0 and valid at every binary x") {
  auto inst = worked_example();
  for (int w = 0; w < 2; ++w) {
    auto m = scenario_model(inst, w);
    for (int code = 1; code < 4; ++code) {
      const Vec x0 = (Vec(2) << (code & 1), (code >> 1) & 1).finished();
      auto pr = parametric_solve(m, {0, 1}, x0);
      auto cut = benders_cut_from_terminal_lp(pr.terminal, x0);
      CHECK(cut(x0) == doctest::Approx(pr.value).epsilon(1e-8));
      for (int k = 0; k < 4; ++k) {
        const Vec x = (Vec(2) << (k & 1), (k >> 1) & 1).finished();
        BruteForceOptions bo;
        bo.pins = {{0, x[0]}, {1, x[1]}};
        auto b = brute_force(m, bo);
        if (b.feasible) CHECK(cut(x) <= b.value + 1e-8);
      }
    }
  }
}

TEST_CASE("benders: infeasible second stage names x0") {
  auto m = scenario_model(worked_example(), 0);
  m.vars[2].upper = 0;  // y pinned at zero cannot satisfy the constraint at x = 0
  m.vars[3].upper = 0;
  try {
    parametric_solve(m, {0, 1}, Vec::Zero(2));
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("x0 = [0,0]") != std::string::npos);
  }
}

TEST_CASE("benders: nonsmooth coupling is rejected") {
  std::vector<VariableSpec> vars = {{"x", VarKind::Binary, 0, 1}, {"y", VarKind::Integer, 0, 3}};
  auto m = make_model(vars);
  m.objective.linear = (Vec(2) << 0, 1).finished();
  m.constraints.push_back(
      ConvexExpr::sum({{1.0, ConvexExpr::norm(Mat::Identity(2, 2), Vec::Zero(2))}}, -2.0));
  CHECK_THROWS_AS(parametric_solve(m, {0}, Vec::Zero(1)), AssumptionError);
}

TEST_CASE("benders: perturbed duals are refused") {
  auto m = scenario_model(worked_example(), 1);
  const Vec x0 = (Vec(2) << 1, 0).finished();
  auto pr = parametric_solve(m, {0, 1}, x0);
  auto t = pr.terminal;
  REQUIRE(t.solution.y_le.size() > 0);
  t.solution.y_le.array() += 0.3;
  CHECK_THROWS(benders_cut_from_terminal_lp(t, x0));
}

TEST_CASE("benders: decomposition of a joint model") {
  auto joint = extensive_form(worked_example());
  joint.first_stage = {true, true, false, false, false, false};
  auto r = decompose_solve(joint);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.75).epsilon(1e-7));
  CHECK(r.x[0] == 1.0);
  CHECK(r.x[1] == 0.0);
  for (const auto& o : r.outer)
    if (!o.revisit) CHECK(std::abs(o.cut_at_x - o.recourse) <= 1e-6);
  for (size_t k = 1; k < r.outer.size(); ++k) CHECK(r.outer[k].L >= r.outer[k - 1].L - 1e-12);
}

TEST_CASE("benders: decomposition matches brute force on separable instances") {
  int tested = 0;
  for (std::uint64_t seed = 1; seed < 40 && tested < 3; seed += 2) {
    auto m = model_from_json(generate_instance(seed, "micp-separable"));
    if (!check_assumption1(m)) continue;
    ++tested;
    auto r = decompose_solve(m);
    auto b = brute_force(m);
    REQUIRE(b.feasible);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.objective - b.value) <= 1e-6 * std::max(1.0, std::abs(b.value)));
  }
  CHECK(tested == 3);
}
