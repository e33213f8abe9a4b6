#pragma once

#include "micp/convex.hpp"
#include "micp/milp.hpp"
#include "micp/model.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace micp {

enum class SolveStatus { Optimal, Infeasible, BudgetExhausted, NumericalFailure };
const char* to_string(SolveStatus s);

struct IterationRecord {
  int n = 0;
  Vec master;                  // x^(n)
  std::optional<Vec> projection;
  std::optional<Vec> polished;
  double L = 0.0;
  double U = 0.0;
  int pool = 0;
  std::string branch;          // "membership" | "separated"
  std::string polish_case;     // "infeasible" | "interior" | "boundary" | ""
  bool terminated = false;
};

/// Outcome of one polishing-LP comparison at a boundary point.
struct LemmaCheck {
  int iteration = 0;
  bool passed = false;
  double convex_value = 0.0;
};

struct MicpState {
  int n = 0;
  std::vector<LinearCut> pool;       // separation and supporting cuts
  std::vector<LinearCut> milp_pool;  // cuts produced by the master engine
  std::vector<int> index_set;        // iterations that produced supporting cuts
  double L = -std::numeric_limits<double>::infinity();
  double U = std::numeric_limits<double>::infinity();
  std::optional<Vec> incumbent;
  std::vector<IterationRecord> trace;
  int duplicates = 0;
};

struct MicpOptions {
  double tol = 1e-6;  // stop when U - L <= tol (1 + |U|)
  int max_iter = 500;
  MilpOptions milp;
  ConvexOptions convex;
  double membership_tol = 1e-6;
  double activity = 1e-6;
  /// Supporting cuts at the continuous relaxation before the first master.
  bool seed_root_cuts = false;
  /// Parameter block held fixed during the solve (parametric mode).
  std::vector<int> param_idx;
  Vec param_value;
  /// Extra valid rows for the master, e.g. a carried cut pool.
  std::vector<LinearCut> initial_cuts;
  std::ostream* trace = nullptr;  // JSON lines, one per iteration
};

struct SolveCertificate {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec x;
  double objective = 0.0;
  double L = 0.0;
  double U = 0.0;
  std::vector<double> L_history;
  std::vector<double> U_history;
  std::string termination;
  int iterations = 0;
  std::vector<LinearCut> cuts;  // every emitted cut, in emission order
  std::vector<LemmaCheck> lemma_checks;
  std::vector<IterationRecord> trace;
  Vec root_relaxation;  // LP point of the first master, before cuts
  std::optional<Vec> root_point;  // continuous relaxation optimum when seeding
  int milp_calls = 0;
  int convex_calls = 0;
  double wall_time = 0.0;
  // Master engine state at exit (cutting-plane mode exposes the terminal LP).
  std::optional<MilpProblem> last_master;
  std::optional<MilpResult> last_master_result;
};

/// Base linear rows plus every pooled cut; convex constraints are dropped.
MilpProblem build_master(const MicpState& state, const ModelInstance& base, const MicpOptions& opts = {});

enum class PolishCase { Infeasible, Interior, Boundary };

struct PolishOutcome {
  PolishCase kind = PolishCase::Infeasible;
  KktCertificate certificate;
  std::vector<LinearCut> cuts;
  std::optional<bool> lp_equivalent;
};

/// Pins the integer block (and the parameter block) at x_n and solves the
/// continuous remainder. Adds supporting cuts in the boundary case and
/// updates U and the index set.
PolishOutcome polish_step(MicpState& state, const ModelInstance& model, const Vec& x_n, const MicpOptions& opts = {});

/// Cutting-plane loop with projection cuts, polishing and supporting cuts.
/// A convex objective is epigraph-reformulated first; the returned point is
/// in the original variables.
SolveCertificate micp_solve(const ModelInstance& model, const MicpOptions& opts = {});

}  // namespace micp
