#pragma once

#include "mobilegen/distribution.hpp"
#include "mobilegen/trajectory.hpp"

#include <climits>
#include <cstdint>
#include <string>
#include <vector>

namespace mobilegen {

struct SampledParams {
    DifficultyParams params;
    // Set when no breadth value fit under the sampled depth and b fell back to 1.
    bool bot_fallback = false;
};

// Draws (d, b, icd, iud); b is drawn from the breadth law restricted to values
// <= min(d, max_bot). The app set is left empty.
SampledParams sample_params_checked(const Plan& plan, std::uint64_t seed, int max_bot = INT_MAX);
DifficultyParams sample_params(const Plan& plan, std::uint64_t seed, int max_bot = INT_MAX);

// b distinct apps by repeated weighted draws, removing each pick.
std::vector<std::string> sample_app_set(const DiscreteDistribution<std::string>& apps, int b, std::uint64_t seed);

// Full parameters for trajectory number `index` of a run seeded with `seed`.
// Each trajectory owns an independent stream. Breadth never exceeds the number
// of apps with positive probability.
DifficultyParams sample_trajectory_params(const Plan& plan, std::uint64_t seed, std::uint64_t index);

}  // namespace mobilegen
