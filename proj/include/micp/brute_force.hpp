#pragma once

#include "micp/convex.hpp"
#include "micp/two_stage.hpp"

#include <utility>
#include <vector>

namespace micp {

struct BruteForceOptions {
  double feas_tol = 1e-6;
  long long max_points = 1LL << 20;  // refuse larger integer lattices
  bool collect_points = false;       // keep feasible points for cut checks
  std::vector<std::pair<int, double>> pins;
  ConvexOptions convex;
};

struct BruteForceResult {
  bool feasible = false;
  double value = 0.0;
  Vec x;
  std::vector<Vec> argmin;  // assignments within feas_tol of the optimum
  long long lattice_points = 0;
  long long convex_solves = 0;
  // Per feasible assignment: the optimum and the extremes along each
  // continuous coordinate.
  std::vector<Vec> feasible_points;
};

/// Enumerates every integer assignment and solves the continuous remainder.
/// Throws ModelError when the lattice exceeds opts.max_points.
BruteForceResult brute_force(const ModelInstance& model, const BruteForceOptions& opts = {});

struct TwoStageBruteForce {
  bool feasible = false;
  double value = 0.0;
  Vec x;
  std::vector<Vec> argmin;
  std::vector<Vec> xs;                      // first-stage feasible x
  std::vector<double> totals;               // c.x + max_p sum_w p_w Q_w(x)
  std::vector<std::vector<double>> recourse;  // Q_w(x), +inf when infeasible
  std::vector<std::vector<Vec>> scenario_points;  // per scenario, feasible (x, y)
};

TwoStageBruteForce brute_force(const TwoStageInstance& inst, const BruteForceOptions& opts = {});

/// Every first-stage point feasible for the x-only constraints admits a
/// feasible completion.
bool check_assumption1(const ModelInstance& model, const BruteForceOptions& opts = {});
bool check_assumption1(const TwoStageInstance& inst, const BruteForceOptions& opts = {});

}  // namespace micp
