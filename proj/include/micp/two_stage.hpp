#pragma once

#include "micp/benders.hpp"

#include <optional>
#include <string>
#include <vector>

namespace micp {

/// One scenario: variables y, objective q.y, and rows / convex constraints
/// over the stacked vector (x, y).
struct Scenario {
  std::string name;
  std::vector<VariableSpec> y_vars;
  Vec q;
  Mat A;  // [x y] rows, A z <= b
  Vec b;
  std::vector<ConvexExpr> constraints;
  std::vector<std::string> constraint_names;
};

struct TwoStageInstance {
  std::vector<VariableSpec> x_vars;  // binary
  Vec c;
  Mat A;  // first-stage rows over x
  Vec b;
  std::vector<ConvexExpr> constraints;  // over x
  std::vector<Scenario> scenarios;
  // Ambiguity set: P_A p <= P_b, P_G p = P_h, intersected with the simplex.
  Mat P_A;
  Vec P_b;
  Mat P_G;
  Vec P_h;
  std::optional<double> eta_lower;  // overrides the box-derived bound

  int num_x() const { return static_cast<int>(x_vars.size()); }
  int num_scenarios() const { return static_cast<int>(scenarios.size()); }
  /// Throws ModelError, including for an empty ambiguity set.
  void validate() const;
};

/// Model over (x, y^w) with x flagged as the first stage.
ModelInstance scenario_model(const TwoStageInstance& inst, int w);
/// Master over (x, eta) with objective c.x + eta.
ModelInstance first_stage_model(const TwoStageInstance& inst);

/// Ambiguity set as an LP feasible region over p.
LpProblem ambiguity_lp(const TwoStageInstance& inst, const Vec& objective);

/// argmax over P of sum_w p_w values_w (a vertex).
Vec worst_case_distribution(const std::vector<double>& values, const TwoStageInstance& inst);

/// sum_w p_w cut_w.
BendersCut aggregate_benders(const Vec& p, const std::vector<BendersCut>& cuts);

/// Terminal-LP blocks of one scenario in >= form  Q y >= s - R x  with
/// duals mu >= 0, plus the bound-dual contribution of the y box.
struct ScenarioDual {
  Mat Q, R;
  Vec s, mu;
  double bound_term = 0.0;
  double value = 0.0;          // recourse value from the scenario solve
  double duality_value = 0.0;  // mu'(s - R x) + bound_term
};

ScenarioDual scenario_dual(const TerminalLp& t, const Vec& x, double value);

DecompositionResult dr_solve(const TwoStageInstance& inst, const DecompositionOptions& opts = {});

/// Deterministic equivalent for a singleton ambiguity set.
ModelInstance extensive_form(const TwoStageInstance& inst);

/// True when the ambiguity set is a single point; the point goes to `p`.
bool ambiguity_singleton(const TwoStageInstance& inst, Vec* p = nullptr);

}  // namespace micp
