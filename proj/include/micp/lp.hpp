#pragma once

#include "micp/model.hpp"

#include <string>

namespace micp {

/// min c.x  s.t.  A_le x <= b_le,  A_eq x = b_eq,  lower <= x <= upper.
/// Infinite bounds are accepted; everything the algorithms build is boxed.
struct LpProblem {
  Vec c;
  Mat A_le;
  Vec b_le;
  Mat A_eq;
  Vec b_eq;
  Vec lower;
  Vec upper;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_le() const { return static_cast<int>(A_le.rows()); }
  int num_eq() const { return static_cast<int>(A_eq.rows()); }
  void add_le(const Vec& a, double rhs);
  void add_eq(const Vec& a, double rhs);
  void validate() const;
};

/// Empty problem over n variables with the given box.
LpProblem make_lp(const Vec& c, const Vec& lower, const Vec& upper);

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
const char* to_string(LpStatus s);

/**
 * Duals follow the Lagrangian convention
 *   c + A_le' y_le + A_eq' y_eq - z_lower + z_upper = 0,
 * with y_le, z_lower, z_upper >= 0.
 */
struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  Vec x;
  Vec y_le;
  Vec y_eq;
  Vec z_lower;
  Vec z_upper;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity_residual = 0.0;
  int iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct LpResidualReport {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double gap = 0.0;       // |primal objective - dual objective|
  double scale = 1.0;     // 1 + ||data||_inf
  bool ok = false;        // all residuals <= 1e-8 * scale
};

struct LpOptions {
  int max_iterations = 0;       // 0: derived from the problem size
  int stall_before_bland = 40;  // degenerate pivots before switching rules
  double tolerance = 1e-9;
};

LpSolution lp_solve(const LpProblem& problem, const LpOptions& opts = {});

/// Recomputes residuals of a claimed optimal primal/dual pair from scratch.
LpResidualReport lp_dual_certificate(const LpSolution& sol, const LpProblem& problem);

/// Dual objective  -b_le.y_le - b_eq.y_eq + l.z_lower - u.z_upper.
double lp_dual_objective(const LpSolution& sol, const LpProblem& problem);

/// Human-readable dump for debugging.
std::string lp_to_string(const LpProblem& problem);

}  // namespace micp
