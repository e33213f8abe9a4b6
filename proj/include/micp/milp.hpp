#pragma once

#include "micp/cut.hpp"
#include "micp/lp.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace micp {

/// LP plus integrality marks. The optional parameter block is held at
/// `param_value` during the solve, while cuts are generated over its
/// original box so they stay valid for every parameter value.
struct MilpProblem {
  LpProblem lp;
  std::vector<bool> integer;
  std::vector<int> param_idx;
  Vec param_value;

  int num_vars() const { return lp.num_vars(); }
  void validate() const;
};

enum class MilpMode { BranchBound, CuttingPlaneParametric };
enum class MilpStatus { Optimal, Infeasible, NumericalFailure, BudgetExhausted };

const char* to_string(MilpMode m);
const char* to_string(MilpStatus s);

struct MilpOptions {
  MilpMode mode = MilpMode::BranchBound;
  int max_nodes = 200000;
  int cglp_rounds = 20;
  double integrality_tol = 1e-6;
  double min_cut_violation = 1e-7;
};

struct MilpResult {
  MilpStatus status = MilpStatus::NumericalFailure;
  MilpMode mode = MilpMode::BranchBound;
  Vec x;
  double objective = 0.0;
  Vec root_relaxation;          // first LP point, before any cut or branch
  std::vector<LinearCut> cuts;  // generated by this call; all parametric-valid
  bool used_value_cut = false;
  bool has_terminal = false;
  LpProblem terminal;           // rows + cuts, parameter block pinned
  LpSolution terminal_solution;
  int nodes = 0;
  int lp_solves = 0;

  bool optimal() const { return status == MilpStatus::Optimal; }
};

MilpResult milp_solve(const MilpProblem& problem, const MilpOptions& opts = {});

/// Terminal LP split as  C x + D y <= F  (le rows) and  Ce x + De y = Fe,
/// x the parameter block and y everything else. Rows touching only the
/// parameter block are dropped; `row_origin[i]` is the index into the
/// terminal problem's le rows.
struct TerminalLp {
  LpProblem lp;
  std::vector<int> param_idx;
  std::vector<int> other_idx;
  Mat C, D;
  Vec F;
  Mat Ce, De;
  Vec Fe;
  std::vector<int> row_origin;
  LpSolution solution;
};

/// Throws std::logic_error unless the result came from the cutting-plane mode.
TerminalLp extract_terminal_lp(const MilpProblem& problem, const MilpResult& result);

/// Free-MPS dump of the problem (parameter block pinned), for debugging.
void write_mps(std::ostream& os, const MilpProblem& problem, const std::string& name = "MASTER");

}  // namespace micp
