#include <doctest.h>

#include "micp/brute_force.hpp"
#include "micp/instances.hpp"
#include "micp/replay.hpp"

#include <cmath>
#include <sstream>

using namespace micp;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TEST_CASE("brute force: no integers means one convex solve") {
  std::vector<VariableSpec> vars = {{"x", VarKind::Continuous, -2, 2}, {"y", VarKind::Continuous, -2, 2}};
  auto m = make_model(vars);
  m.objective.linear = (Vec(2) << 1, 0).finished();
  m.constraints.push_back(ConvexExpr::sum({{1.0, ConvexExpr::squared_norm(Mat::Identity(2, 2), Vec::Zero(2))}}, -1.0));
  auto b = brute_force(m);
  CHECK(b.lattice_points == 1);
  CHECK(b.convex_solves == 1);
  CHECK(b.value == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("brute force: infeasible patterns leave the argmin") {
  std::vector<VariableSpec> vars = {{"a", VarKind::Binary, 0, 1}, {"b", VarKind::Binary, 0, 1}};
  auto m = make_model(vars);
  m.objective.linear = (Vec(2) << -1, -1).finished();
  // a + b <= 1.5 removes [1, 1]
  m.constraints.push_back(ConvexExpr::affine((Vec(2) << 1, 1).finished(), -1.5));
  auto b = brute_force(m);
  CHECK(b.value == -1.0);
  REQUIRE(b.argmin.size() == 2);
  for (const auto& x : b.argmin) CHECK(x.sum() == 1.0);
}

TEST_CASE("brute force: refuses oversized lattices") {
  std::vector<VariableSpec> vars(21, VariableSpec{"b", VarKind::Binary, 0, 1});
  auto m = make_model(vars);
  try {
    brute_force(m);
    FAIL("expected refusal");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("1048576") != std::string::npos);
  }
}

TEST_CASE("brute force: assumption 1 detection") {
  std::vector<VariableSpec> vars = {{"x", VarKind::Binary, 0, 1}, {"y", VarKind::Integer, 0, 2}};
  auto m = make_model(vars);
  m.first_stage = {true, false};
  // y >= 3 x: x = 1 has no completion
  add_row(m, (Vec(2) << 3, -1).finished(), 0.0);
  CHECK_FALSE(check_assumption1(m));
  m.A(0, 0) = 2.0;
  CHECK(check_assumption1(m));
}

TEST_CASE("generator: deterministic and within profile bounds") {
  for (const auto& profile : instance_profiles()) {
    CHECK(generate_instance(7, profile).dump() == generate_instance(7, profile).dump());
    CHECK(generate_instance(7, profile).dump() != generate_instance(8, profile).dump());
  }
  // Frozen digest of seed 0: the bytes must not drift across builds.
  CHECK(fnv1a(generate_instance(0, "micp-smooth").dump()) == 10866539611158476643ull);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = two_stage_from_json(generate_instance(seed, "twostage-small"));
    CHECK(inst.num_scenarios() >= 2);
    CHECK(inst.num_scenarios() <= 4);
    CHECK(inst.num_x() <= 4);
    auto m = model_from_json(generate_instance(seed, seed % 2 ? "micp-separable" : "micp-smooth"));
    int nb = 0, ni = 0, nc = 0;
    for (const auto& v : m.vars) (v.kind == VarKind::Binary ? nb : v.kind == VarKind::Integer ? ni : nc) += 1;
    CHECK(nb <= 4);
    CHECK(ni <= 3);
    CHECK(nc <= 2);
  }
  CHECK_THROWS_AS(generate_instance(0, "nope"), ModelError);
}

TEST_CASE("generator: planted points are feasible") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const char* profile : {"micp-smooth", "micp-separable"}) {
      const Json j = generate_instance(seed, profile);
      auto m = model_from_json(j);
      const auto p = j["planted"].get<std::vector<double>>();
      CHECK(max_violation(m, Vec::Map(p.data(), static_cast<int>(p.size()))) <= 1e-9);
      if (std::string(profile) == "micp-separable") CHECK(check_assumptions(m).all_assumption2());
    }
    const Json t = generate_instance(seed, "twostage-small");
    auto inst = two_stage_from_json(t);
    for (int w = 0; w < inst.num_scenarios(); ++w) {
      const auto y = t["planted"][w].get<std::vector<double>>();
      auto sm = scenario_model(inst, w);
      for (int code = 0; code < (1 << inst.num_x()); ++code) {
        Vec z(sm.num_vars());
        for (int j = 0; j < inst.num_x(); ++j) z[j] = (code >> j) & 1;
        for (size_t k = 0; k < y.size(); ++k) z[inst.num_x() + static_cast<int>(k)] = y[k];
        CHECK(max_violation(sm, z) <= 1e-9);
      }
    }
  }
}

TEST_CASE("replay: the steps that follow from the data") {
  auto r = replay_worked_example();
  REQUIRE(r.master_relaxation.size() == 2);
  CHECK(r.master_relaxation[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(r.master_relaxation[1] == doctest::Approx(0.0));
  CHECK(r.first_x == (Vec(2) << 1, 0).finished());
  CHECK(r.result.x == (Vec(2) << 1, 0).finished());
  CHECK(r.result.objective == doctest::Approx(1.75));
  // Frozen from an independent one-dimensional solve of the scenario-1
  // relaxation: min 0.5 y1 over the curve at y2 = 0.
  REQUIRE(r.scenario_relaxation.size() == 2);
  CHECK(r.scenario_relaxation[0][0] == doctest::Approx(0.481212).epsilon(1e-5));
  CHECK(std::abs(r.scenario_relaxation[0][1]) <= 1e-6);
  std::ostringstream trace;
  write_replay_trace(trace, r);
  CHECK(trace.str().find("\"tangent-cut\"") != std::string::npos);
}
