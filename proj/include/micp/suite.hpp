#pragma once

#include "micp/brute_force.hpp"
#include "micp/instances.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace micp {

/// |a - b| <= tol * max(1, |b|)
bool rel_match(double a, double b, double tol = 1e-6);

struct MicpCase {
  std::uint64_t seed = 0;
  std::string profile;
  ModelInstance model;
  Vec planted;
  SolveCertificate cert;
  BruteForceResult brute;
  bool match = false;
  double error = 0.0;
};

/// Profile alternates micp-smooth / micp-separable with the seed parity.
std::string micp_profile_for(std::uint64_t seed);

MicpCase run_micp_case(std::uint64_t seed, const std::string& profile, const MicpOptions& opts = {},
                       bool collect_points = false);

struct TwoStageCase {
  std::uint64_t seed = 0;
  TwoStageInstance inst;
  DecompositionResult dr;
  TwoStageBruteForce brute;
  bool match = false;
  double error = 0.0;
  bool singleton = false;
  std::optional<SolveCertificate> extensive;
  bool extensive_match = true;
};

TwoStageCase run_twostage_case(std::uint64_t seed, const DecompositionOptions& opts = {}, bool collect_points = false);
TwoStageCase run_twostage_case(const TwoStageInstance& inst, const DecompositionOptions& opts = {},
                               bool collect_points = false);

}  // namespace micp
