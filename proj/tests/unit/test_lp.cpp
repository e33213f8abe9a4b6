#include <doctest.h>

#include "micp/lp.hpp"

#include <random>

using namespace micp;

TEST_CASE("lp: master relaxation of the worked example") {
  // min x1 + 2 x2 + eta, 3 x1 + x2 >= 2, x in [0,1], eta in [0, 10]
  LpProblem lp = make_lp(Vec::Map(std::vector<double>{1, 2, 1}.data(), 3), Vec::Zero(3), Vec::Constant(3, 1.0));
  lp.upper[2] = 10;
  lp.add_le((Vec(3) << -3, -1, 0).finished(), -2);
  auto s = lp_solve(lp);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(s.x[1] == doctest::Approx(0.0));
  CHECK(s.x[2] == doctest::Approx(0.0));
  CHECK(lp_dual_certificate(s, lp).ok);
}

TEST_CASE("lp: infeasible pair") {
  LpProblem lp = make_lp(Vec::Zero(1), Vec::Constant(1, -10), Vec::Constant(1, 10));
  lp.add_le(Vec::Constant(1, 1.0), 0.0);
  lp.add_le(Vec::Constant(1, -1.0), -1.0);
  CHECK(lp_solve(lp).status == LpStatus::Infeasible);
}

TEST_CASE("lp: single row dual") {
  LpProblem lp = make_lp(Vec::Constant(1, -1.0), Vec::Constant(1, -100), Vec::Constant(1, 100));
  lp.add_le(Vec::Constant(1, 1.0), 5.0);
  auto s = lp_solve(lp);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(5.0));
  CHECK(s.y_le[0] == doctest::Approx(1.0));
}

TEST_CASE("lp: one-row terminal problem has dual one half") {
  // min 0.5 y1 + y2  s.t.  -y1 - y2 <= -1   (x = [1,0] substituted)
  LpProblem lp = make_lp((Vec(2) << 0.5, 1.0).finished(), Vec::Zero(2), Vec::Constant(2, 5.0));
  lp.add_le((Vec(2) << -1, -1).finished(), -1.0);
  auto s = lp_solve(lp);
  REQUIRE(s.optimal());
  CHECK(s.y_le[0] == doctest::Approx(0.5));
  CHECK(s.objective == doctest::Approx(0.5));
}

TEST_CASE("lp: perturbed duals are flagged") {
  LpProblem lp = make_lp(Vec::Constant(1, -1.0), Vec::Constant(1, -100), Vec::Constant(1, 100));
  lp.add_le(Vec::Constant(1, 1.0), 5.0);
  auto s = lp_solve(lp);
  s.y_le[0] += 0.1;
  CHECK_FALSE(lp_dual_certificate(s, lp).ok);
}

TEST_CASE("lp: unbounded with infinite bounds") {
  const double inf = std::numeric_limits<double>::infinity();
  LpProblem lp = make_lp(Vec::Constant(1, -1.0), Vec::Constant(1, 0.0), Vec::Constant(1, inf));
  CHECK(lp_solve(lp).status == LpStatus::Unbounded);
}

TEST_CASE("lp: equality rows and free variables") {
  const double inf = std::numeric_limits<double>::infinity();
  LpProblem lp = make_lp((Vec(2) << 1, 1).finished(), Vec::Constant(2, -inf), Vec::Constant(2, inf));
  lp.add_eq((Vec(2) << 1, -1).finished(), 1.0);
  lp.add_le((Vec(2) << -1, 0).finished(), 0.0);
  auto s = lp_solve(lp);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(0.0));
  CHECK(s.x[1] == doctest::Approx(-1.0));
  CHECK(lp_dual_certificate(s, lp).ok);
}
