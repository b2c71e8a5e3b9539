#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftbandit/scenario.hpp"

namespace shiftbandit {

/// Rotating three-arm scenario: mu_k^(i) = 0.2, 0.5, 0.8 for (i + k) mod 3 = 2, 0, 1
/// (1-based i and k), M equal-length segments.
Scenario fig3a_scenario(Step horizon = 20000, std::size_t segments = 5);

/// Three arms over M segments: arm 1 alternates 0.8/0.2 in pairs of segments,
/// arms 2 and 3 alternate 0.4/0.6 out of phase with each other.
Scenario fig5d_scenario(Step horizon = 20000, std::size_t segments = 8);

/// Eight segments, every boundary a change, but only one change of the best
/// arm (S = 2): arm 1 leads for four segments alternating 0.3/0.9, then arm 2
/// leads alternating 0.9/0.3; arms not in the lead sit at 0.1 and 0.2.
Scenario skip8_scenario(Step horizon = 20000);

/// Single segment, every arm at `mean`.
Scenario stationary_scenario(Step horizon = 5000, std::size_t arms = 3, double mean = 0.5);

/// One change at `change_at`: the optimal arm 1 drops from 0.75 to 0.25, arms
/// 2..K stay at 0.5.
Scenario single_change_scenario(Step horizon = 5000, Step change_at = 2500, std::size_t arms = 3);

/// Uniform [0,1] means drawn per segment and arm from `instance_seed`.
Scenario random_scenario(std::size_t arms, Step horizon, std::size_t segments,
                         std::uint64_t instance_seed);

struct BuiltinParams {
    std::optional<Step> horizon;
    std::optional<std::size_t> segments;
    std::optional<std::size_t> arms;
    std::uint64_t instance_seed = 0;
};

const std::vector<std::string>& builtin_names();
bool is_builtin(const std::string& name);
Scenario builtin_scenario(const std::string& name, const BuiltinParams& params = {});

/// Lengths of `segments` near-equal pieces summing to `horizon`.
std::vector<Step> split_horizon(Step horizon, std::size_t segments);

}  // namespace shiftbandit
