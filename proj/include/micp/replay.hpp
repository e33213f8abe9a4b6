#pragma once

#include "micp/two_stage.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace micp {

struct ReplayCheck {
  std::string name;
  bool passed = false;
  std::string expected;
  std::string observed;
};

/// Step-by-step record of the decomposition on worked_example().
struct ReplayReport {
  Vec master_relaxation;
  Vec first_x;
  std::vector<Vec> scenario_relaxation;  // continuous optimum in y, per scenario
  // Tangent cut per scenario in >= form on y with x substituted:
  // (coef, rhs) with coef.y >= rhs.
  std::vector<Vec> tangent_coef;
  std::vector<double> tangent_rhs;
  // Cutting-plane cuts of scenario 1 at the first x, same form.
  std::vector<Vec> integrality_coef;
  std::vector<double> integrality_rhs;
  std::vector<BendersCut> scenario_cuts;
  BendersCut aggregated;
  DecompositionResult result;
  double seconds = 0.0;
  std::vector<ReplayCheck> checks;
  bool all_passed() const;
};

/// Runs the decomposition with root-seeded scenario solves and compares
/// each step against hand-computed reference values.
ReplayReport replay_worked_example(DecompositionOptions opts = {});

void print_replay(std::ostream& os, const ReplayReport& r);
/// One JSON object per step.
void write_replay_trace(std::ostream& os, const ReplayReport& r);

}  // namespace micp
