#include <doctest.h>

#include "micp/convex.hpp"

#include <cmath>

using namespace micp;

namespace {

ConvexProgram box_program(int n, double lo, double hi) {
  ConvexProgram p;
  p.c = Vec::Zero(n);
  p.A = Mat::Zero(0, n);
  p.b = Vec::Zero(0);
  p.G = Mat::Zero(0, n);
  p.h = Vec::Zero(0);
  p.lower = Vec::Constant(n, lo);
  p.upper = Vec::Constant(n, hi);
  return p;
}

ConvexExpr unit_disk(int n, int i, int j) {
  Mat A = Mat::Zero(2, n);
  A(0, i) = 1;
  A(1, j) = 1;
  return ConvexExpr::sum({{1.0, ConvexExpr::squared_norm(A, Vec::Zero(2))}}, -1.0);
}

}  // namespace

TEST_CASE("convex: min x s.t. x^2 <= 1") {
  auto p = box_program(1, -3, 3);
  p.c[0] = 1.0;
  p.constraints = {ConvexExpr::sum({{1.0, ConvexExpr::power(Vec::Constant(1, 1.0), 0.0, 2.0)}}, -1.0)};
  auto cert = convex_solve(p);
  REQUIRE(cert.optimal());
  CHECK(cert.x[0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(cert.lambda_convex[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cert.stationarity < 1e-7);
}

TEST_CASE("convex: pinned binary with a unit ball in y") {
  auto p = box_program(3, -2, 2);
  p.lower.head(2).setZero();
  p.upper.head(2).setOnes();
  p.c[2] = 1.0;
  p.constraints = {ConvexExpr::sum({{1.0, ConvexExpr::power((Vec(3) << 0, 0, 1).finished(), 0.0, 2.0)}}, -1.0)};
  p.pins = {{0, 1.0}, {1, 0.0}};
  auto cert = convex_solve(p);
  REQUIRE(cert.optimal());
  CHECK(cert.x[2] == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("convex: infeasible program") {
  auto p = box_program(1, -3, 3);
  p.constraints = {ConvexExpr::sum({{1.0, ConvexExpr::power(Vec::Constant(1, 1.0), 0.0, 2.0)}}, 1.0)};
  auto cert = convex_solve(p);
  CHECK(cert.status == ConvexStatus::Infeasible);
  CHECK(cert.min_violation > 0.9);
}

TEST_CASE("convex: projections onto the unit disk") {
  auto p = box_program(2, -3, 3);
  p.constraints = {unit_disk(2, 0, 1)};
  auto pr = project((Vec(2) << 2, 0).finished(), p);
  REQUIRE(pr.status == ConvexStatus::Optimal);
  CHECK(pr.z[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(pr.z[1]) < 1e-7);
  CHECK(pr.distance == doctest::Approx(1.0).epsilon(1e-7));

  auto pi = project((Vec(2) << 0.2, -0.3).finished(), p);
  CHECK(pi.distance < 1e-7);

  auto pd = project((Vec(2) << 1, 1).finished(), p);
  CHECK(pd.z[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
  CHECK(pd.z[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
  auto again = project(pd.z, p);
  CHECK((again.z - pd.z).norm() < 1e-8);
}

TEST_CASE("convex: separation cuts") {
  auto c = separation_cut((Vec(2) << 2, 0).finished(), (Vec(2) << 1, 0).finished());
  CHECK(c.coef[0] == doctest::Approx(1.0));
  CHECK(c.coef[1] == doctest::Approx(0.0));
  CHECK(c.rhs == doctest::Approx(1.0));
  const double r = std::sqrt(0.5);
  auto d = normalized(separation_cut((Vec(2) << 1, 1).finished(), (Vec(2) << r, r).finished()));
  CHECK(d.coef[0] == doctest::Approx(1.0));
  CHECK(d.coef[1] == doctest::Approx(1.0));
  CHECK(d.rhs == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS(separation_cut((Vec(2) << 1, 0).finished(), (Vec(2) << 1, 0).finished()));
}

TEST_CASE("convex: supporting cut on the disk and the LP check") {
  auto p = box_program(2, -3, 3);
  p.c = (Vec(2) << 1, 0).finished();
  p.constraints = {unit_disk(2, 0, 1)};
  auto cert = convex_solve(p);
  REQUIRE(cert.optimal());
  CHECK(cert.on_boundary());
  auto cuts = supporting_inequalities(p, cert, SupportMode::Plain);
  REQUIRE(cuts.size() == 1);
  auto n = normalized(cuts[0]);
  CHECK(n.coef[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(std::abs(n.coef[1]) < 1e-6);
  CHECK(n.rhs == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lp_equivalence_check(p, cert, cuts));
  CHECK_FALSE(lp_equivalence_check(p, cert, {}));
}

TEST_CASE("convex: normal cone decomposition") {
  std::vector<ConeSet> sets(2);
  sets[0].kind = ConeSet::Kind::Halfspaces;
  sets[0].A = (Mat(1, 2) << 1, 0).finished();
  sets[0].b = Vec::Constant(1, 0.0);
  sets[1].kind = ConeSet::Kind::Halfspaces;
  sets[1].A = (Mat(1, 2) << 0, 1).finished();
  sets[1].b = Vec::Constant(1, 0.0);
  auto d = decompose_normal_cone((Vec(2) << 1, 1).finished(), Vec::Zero(2), sets);
  CHECK((d.parts[0] - (Vec(2) << 1, 0).finished()).norm() < 1e-10);
  CHECK((d.parts[1] - (Vec(2) << 0, 1).finished()).norm() < 1e-10);

  // min x1 over the unit disk: -c lies in the normal cone of the disk at (-1,0).
  std::vector<ConeSet> one(1);
  one[0].constraints = {unit_disk(2, 0, 1)};
  auto e = decompose_normal_cone((Vec(2) << -1, 0).finished(), (Vec(2) << -1, 0).finished(), one);
  CHECK(e.residual < 1e-10);
  CHECK((e.parts[0] - (Vec(2) << -1, 0).finished()).norm() < 1e-10);
  CHECK_THROWS(decompose_normal_cone((Vec(2) << 1, 0).finished(), (Vec(2) << -1, 0).finished(), one));
}

TEST_CASE("convex: equality rows") {
  auto p = box_program(2, -3, 3);
  p.c = (Vec(2) << 1, 2).finished();
  p.G = (Mat(1, 2) << 1, 1).finished();
  p.h = Vec::Constant(1, 1.0);
  p.constraints = {unit_disk(2, 0, 1)};
  auto cert = convex_solve(p);
  REQUIRE(cert.optimal());
  CHECK(cert.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(cert.x[1]) < 1e-6);
  CHECK(cert.stationarity < 1e-6);
}

TEST_CASE("convex: degenerate single-point feasible set") {
  auto p = box_program(2, -3, 3);
  p.c = (Vec(2) << 1, 1).finished();
  Mat A = Mat::Identity(2, 2);
  p.constraints = {ConvexExpr::squared_norm(A, Vec::Zero(2))};
  auto cert = convex_solve(p);
  REQUIRE(cert.optimal());
  CHECK(cert.x.norm() < 1e-4);
}
