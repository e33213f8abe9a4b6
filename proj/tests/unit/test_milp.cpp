#include <doctest.h>

#include "micp/milp.hpp"

#include <random>
#include <sstream>

using namespace micp;

namespace {

MilpProblem tangent_problem() {
  // min 0.5 y1 + y2  s.t.  1.272 y1 + 0.586 y2 >= 0.918,  y in {0..5}^2
  MilpProblem p;
  p.lp = make_lp((Vec(2) << 0.5, 1.0).finished(), Vec::Zero(2), Vec::Constant(2, 5.0));
  p.lp.add_le((Vec(2) << -1.272, -0.586).finished(), -0.918);
  p.integer = {true, true};
  p.param_value = Vec::Zero(0);
  return p;
}

// Enumerates integer points (continuous columns must be absent).
double brute(const MilpProblem& p, bool& feasible) {
  const int n = p.num_vars();
  Vec z = p.lp.lower;
  double best = std::numeric_limits<double>::infinity();
  feasible = false;
  while (true) {
    bool ok = true;
    if (p.lp.num_le()) ok = ((p.lp.A_le * z - p.lp.b_le).array() <= 1e-9).all();
    if (ok) {
      feasible = true;
      best = std::min(best, p.lp.c.dot(z));
    }
    int k = 0;
    while (k < n && z[k] >= p.lp.upper[k]) {
      z[k] = p.lp.lower[k];
      ++k;
    }
    if (k == n) break;
    z[k] += 1;
  }
  return best;
}

MilpProblem random_milp(std::mt19937_64& rng, int n, int rows, int nparams) {
  std::uniform_int_distribution<int> range(1, 4), coef(-5, 5);
  MilpProblem p;
  Vec c(n), lo = Vec::Zero(n), hi(n);
  for (int j = 0; j < n; ++j) {
    c[j] = coef(rng);
    hi[j] = j < nparams ? 1 : range(rng);
  }
  p.lp = make_lp(c, lo, hi);
  Vec planted(n);
  for (int j = 0; j < n; ++j) planted[j] = std::uniform_int_distribution<int>(0, static_cast<int>(hi[j]))(rng);
  for (int i = 0; i < rows; ++i) {
    Vec a(n);
    for (int j = 0; j < n; ++j) a[j] = coef(rng) + 0.5 * (coef(rng) % 2);
    p.lp.add_le(a, a.dot(planted) + std::uniform_int_distribution<int>(0, 2)(rng) + 0.3);
  }
  p.integer.assign(n, true);
  for (int k = 0; k < nparams; ++k) p.param_idx.push_back(k);
  p.param_value = Vec(nparams);
  for (int k = 0; k < nparams; ++k) p.param_value[k] = planted[k];
  return p;
}

}  // namespace

TEST_CASE("milp: tangent-cut subproblem gives y = [1, 0] in both modes") {
  auto p = tangent_problem();
  for (auto mode : {MilpMode::BranchBound, MilpMode::CuttingPlaneParametric}) {
    MilpOptions o;
    o.mode = mode;
    auto r = milp_solve(p, o);
    REQUIRE(r.optimal());
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(0.0));
    CHECK(r.objective == doctest::Approx(0.5));
  }
}

TEST_CASE("milp: worked-example master with x1 >= 1 appended") {
  MilpProblem p;
  p.lp = make_lp((Vec(3) << 1, 2, 1).finished(), Vec::Zero(3), (Vec(3) << 1, 1, 10).finished());
  p.lp.add_le((Vec(3) << -3, -1, 0).finished(), -2);
  p.lp.add_le((Vec(3) << -1, 0, 0).finished(), -1);
  p.integer = {true, true, false};
  p.param_value = Vec::Zero(0);
  auto r = milp_solve(p);
  REQUIRE(r.optimal());
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("milp: integral relaxation returns without cuts") {
  MilpProblem p;
  p.lp = make_lp((Vec(2) << 1, 1).finished(), Vec::Zero(2), Vec::Constant(2, 3.0));
  p.lp.add_le((Vec(2) << -1, 0).finished(), -2);
  p.integer = {true, true};
  p.param_value = Vec::Zero(0);
  MilpOptions o;
  o.mode = MilpMode::CuttingPlaneParametric;
  auto r = milp_solve(p, o);
  REQUIRE(r.optimal());
  CHECK(r.cuts.empty());
  auto t = extract_terminal_lp(p, r);
  CHECK(t.lp.num_le() == 1);
  CHECK(t.solution.objective == doctest::Approx(2.0));
}

TEST_CASE("milp: terminal LP refused after branch and bound") {
  auto p = tangent_problem();
  auto r = milp_solve(p);
  CHECK_THROWS_AS(extract_terminal_lp(p, r), std::logic_error);
}

TEST_CASE("milp: infeasible") {
  MilpProblem p;
  p.lp = make_lp(Vec::Ones(1), Vec::Zero(1), Vec::Constant(1, 3.0));
  p.lp.add_le(Vec::Constant(1, 2.0), 3.0);
  p.lp.add_le(Vec::Constant(1, -2.0), -3.0);
  p.integer = {true};
  p.param_value = Vec::Zero(0);
  for (auto mode : {MilpMode::BranchBound, MilpMode::CuttingPlaneParametric}) {
    MilpOptions o;
    o.mode = mode;
    CHECK(milp_solve(p, o).status == MilpStatus::Infeasible);
  }
}

TEST_CASE("milp: random instances agree with enumeration") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    auto p = random_milp(rng, n, 2 + static_cast<int>(rng() % 3), 0);
    bool feasible = false;
    const double ref = brute(p, feasible);
    for (auto mode : {MilpMode::BranchBound, MilpMode::CuttingPlaneParametric}) {
      MilpOptions o;
      o.mode = mode;
      auto r = milp_solve(p, o);
      if (!feasible) {
        CHECK(r.status == MilpStatus::Infeasible);
        continue;
      }
      REQUIRE(r.optimal());
      CHECK(r.objective == doctest::Approx(ref).epsilon(1e-6));
      if (mode == MilpMode::CuttingPlaneParametric) {
        auto tl = extract_terminal_lp(p, r);
        REQUIRE(tl.solution.optimal());
        CHECK(tl.solution.objective == doctest::Approx(ref).epsilon(1e-6));
      }
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("milp: parametric cuts hold for every parameter value") {
  std::mt19937_64 rng(11);
  int fallbacks = 0, ncuts = 0;
  for (int t = 0; t < 60; ++t) {
    const int n = 4 + static_cast<int>(rng() % 2);
    auto p = random_milp(rng, n, 3, 2);
    MilpOptions o;
    o.mode = MilpMode::CuttingPlaneParametric;
    auto r = milp_solve(p, o);
    REQUIRE(r.optimal());
    fallbacks += r.used_value_cut;
    ncuts += static_cast<int>(r.cuts.size());
    // Every integral point of the original rows, any parameter value.
    MilpProblem full = p;
    full.param_idx.clear();
    full.param_value = Vec::Zero(0);
    Vec z = p.lp.lower;
    while (true) {
      const bool ok = ((p.lp.A_le * z - p.lp.b_le).array() <= 1e-9).all();
      if (ok)
        for (const auto& c : r.cuts) CHECK(c.violation(z) <= 1e-8);
      int k = 0;
      while (k < n && z[k] >= p.lp.upper[k]) {
        z[k] = p.lp.lower[k];
        ++k;
      }
      if (k == n) break;
      z[k] += 1;
    }
  }
  CHECK(fallbacks > 0);
  CHECK(ncuts > fallbacks);
}

TEST_CASE("milp: mps export") {
  auto p = tangent_problem();
  std::ostringstream os;
  write_mps(os, p);
  CHECK(os.str().find("INTORG") != std::string::npos);
  CHECK(os.str().find("ENDATA") != std::string::npos);
}
