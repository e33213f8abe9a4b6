#pragma once

#include "micp/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace micp {

/// Two binaries, two scenarios with two integer recourse variables each and
/// a softplus coupling constraint; p fixed at (0.5, 0.5). Optimum 1.75 at
/// x = [1, 0].
TwoStageInstance worked_example();

const std::vector<std::string>& instance_profiles();

/// Deterministic in (seed, profile). Model profiles return a model file with
/// an extra "planted" point; twostage-small returns a two-stage file whose
/// "planted" entry holds one recourse point per scenario feasible for every x.
/// Throws ModelError for an unknown profile.
Json generate_instance(std::uint64_t seed, const std::string& profile);

}  // namespace micp
