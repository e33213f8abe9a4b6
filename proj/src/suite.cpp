#include "micp/suite.hpp"

#include <algorithm>
#include <cmath>

namespace micp {

bool rel_match(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

std::string micp_profile_for(std::uint64_t seed) { return seed % 2 == 0 ? "micp-smooth" : "micp-separable"; }

MicpCase run_micp_case(std::uint64_t seed, const std::string& profile, const MicpOptions& opts, bool collect_points) {
  MicpCase c;
  c.seed = seed;
  c.profile = profile;
  const Json j = generate_instance(seed, profile);
  c.model = model_from_json(j);
  const auto pl = j.at("planted").get<std::vector<double>>();
  c.planted = Vec::Map(pl.data(), static_cast<int>(pl.size()));
  c.cert = micp_solve(c.model, opts);
  BruteForceOptions bo;
  bo.collect_points = collect_points;
  c.brute = brute_force(c.model, bo);
  if (c.cert.status == SolveStatus::Optimal && c.brute.feasible) {
    c.error = std::abs(c.cert.objective - c.brute.value);
    c.match = rel_match(c.cert.objective, c.brute.value);
  } else {
    c.match = c.cert.status == SolveStatus::Infeasible && !c.brute.feasible;
  }
  return c;
}

TwoStageCase run_twostage_case(const TwoStageInstance& inst, const DecompositionOptions& opts, bool collect_points) {
  TwoStageCase c;
  c.inst = inst;
  c.dr = dr_solve(inst, opts);
  BruteForceOptions bo;
  bo.collect_points = collect_points;
  c.brute = brute_force(inst, bo);
  if (c.dr.status == SolveStatus::Optimal && c.brute.feasible) {
    c.error = std::abs(c.dr.objective - c.brute.value);
    c.match = rel_match(c.dr.objective, c.brute.value);
  } else {
    c.match = c.dr.status == SolveStatus::Infeasible && !c.brute.feasible;
  }
  c.singleton = ambiguity_singleton(inst);
  if (c.singleton) {
    c.extensive = micp_solve(extensive_form(inst), opts.master);
    c.extensive_match = c.extensive->status == SolveStatus::Optimal && c.dr.status == SolveStatus::Optimal &&
                        rel_match(c.dr.objective, c.extensive->objective);
  }
  return c;
}

TwoStageCase run_twostage_case(std::uint64_t seed, const DecompositionOptions& opts, bool collect_points) {
  auto c = run_twostage_case(two_stage_from_json(generate_instance(seed, "twostage-small")), opts, collect_points);
  c.seed = seed;
  return c;
}

}  // namespace micp
