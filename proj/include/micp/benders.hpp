#pragma once

#include "micp/micp_solver.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace micp {

/// eta >= slope . x + intercept on the first-stage block.
struct BendersCut {
  Vec slope;
  double intercept = 0.0;
  std::string provenance = "single";  // or "aggregated"
  int iteration = 0;

  double operator()(const Vec& x) const { return slope.dot(x) + intercept; }
};

struct ParametricResult {
  SolveCertificate certificate;
  TerminalLp terminal;
  double value = 0.0;  // optimal second-stage objective at x0
  Vec y;               // full point (x0 included)
};

/// Solves the model over its non-parameter variables with `x_idx` held at
/// x0, using the cutting-plane master engine so the terminal LP is valid for
/// every x. Throws AssumptionError when a constraint fails the product rule
/// and std::runtime_error when the model is infeasible at x0.
ParametricResult parametric_solve(const ModelInstance& model, const std::vector<int>& x_idx, const Vec& x0,
                                  MicpOptions opts = {});

/// Benders cut from certified terminal-LP duals, tight at x0.
BendersCut benders_cut_from_terminal_lp(const TerminalLp& terminal, const Vec& x0);

/// A cut emitted somewhere in a decomposition run. `scenario` < 0 means the
/// master space (x, eta); otherwise the subproblem space (x, y^scenario).
struct TaggedCut {
  LinearCut cut;
  int scenario = -1;
};

struct OuterRecord {
  int m = 0;
  Vec x;
  double L = 0.0;
  double U = 0.0;
  double recourse = 0.0;   // second-stage (or worst-case) value at x
  BendersCut cut;
  double cut_at_x = 0.0;
  Vec p;                   // worst-case distribution (two-stage only)
  std::vector<double> scenario_values;
  std::vector<double> duality_values;  // terminal-LP dual objective per scenario
  bool revisit = false;
};

struct DecompositionOptions {
  MicpOptions master;
  MicpOptions sub;
  int max_outer = 500;
  double tol = 1e-6;
  int threads = 1;
  bool carry_master_cuts = true;
  std::ostream* trace = nullptr;  // JSON lines, one per outer iteration
};

struct DecompositionResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string termination;
  Vec x;          // first stage
  double objective = 0.0;
  double L = 0.0;
  double U = 0.0;
  std::vector<OuterRecord> outer;
  std::vector<BendersCut> benders;
  std::vector<TaggedCut> cuts;
  std::vector<LemmaCheck> lemma_checks;
  std::vector<Vec> master_relaxations;  // root LP point of each master
  int iterations = 0;
  double wall_time = 0.0;
};

/// What one outer iteration learns at a first-stage point.
struct OuterEvaluation {
  double recourse = 0.0;
  BendersCut cut;
  Vec p;
  std::vector<double> scenario_values;
  std::vector<double> duality_values;
  std::vector<TaggedCut> cuts;
  std::vector<LemmaCheck> lemma_checks;
};

using OuterOracle = std::function<OuterEvaluation(const Vec& x, int m)>;

/// Shared outer loop: `master` holds the first-stage variables followed by
/// eta (last column) with objective c.x + eta.
DecompositionResult benders_outer_loop(const ModelInstance& master, const OuterOracle& oracle,
                                       const DecompositionOptions& opts);

/// Decomposition for a joint model whose first-stage block is
/// model.first_stage (binary variables by default).
DecompositionResult decompose_solve(const ModelInstance& model, const DecompositionOptions& opts = {});

/// Bounds of q.y over the box of the non-first-stage variables.
std::pair<double, double> recourse_bounds(const ModelInstance& model, const std::vector<bool>& first_stage);

}  // namespace micp
