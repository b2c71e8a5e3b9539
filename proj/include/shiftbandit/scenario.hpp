#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shiftbandit/rng.hpp"

namespace shiftbandit {

// Arms are 0-based in the C++ and Python APIs; time steps run 1..T.
using Arm = std::size_t;
using Step = std::int64_t;

enum class RewardKind {
    bernoulli,  // reward ~ Bernoulli(mean)
    bounded,    // reward ~ Uniform[mean - r, mean + r], r = min(mean, 1 - mean)
};

std::string to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& name);

struct Segment {
    Step length = 0;
    std::vector<double> means;
};

/// Piecewise-stationary environment: an ordered list of segments over which
/// every arm's mean reward is constant.
///
/// Construction merges adjacent segments with identical mean vectors, so the
/// segment count equals 1 + the number of steps at which some arm's mean
/// changes. The optimal arm of a segment is the smallest index attaining the
/// maximum mean; the super-segment count S counts changes of that arm.
class Scenario {
public:
    static Scenario from_segments(std::size_t arms, std::vector<Segment> segments,
                                  RewardKind kind = RewardKind::bernoulli);

    std::size_t arms() const noexcept { return arms_; }
    Step horizon() const noexcept { return ends_.empty() ? 0 : ends_.back(); }
    RewardKind kind() const noexcept { return kind_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }

    /// M.
    std::size_t segment_count() const noexcept { return segments_.size(); }
    /// S.
    std::size_t super_segment_count() const noexcept { return super_starts_.size(); }

    /// nu_0 = 0 < nu_1 < ... < nu_M = T.
    std::vector<Step> change_points() const;
    /// Steps nu*_r (r = 1..S-1) after which the optimal arm differs.
    std::vector<Step> optimal_arm_changes() const;

    /// Segment containing step t (1-based time, 0-based segment index).
    std::size_t segment_index(Step t) const;
    double mean(Step t, Arm k) const;
    double best_mean(Step t) const { return best_means_[segment_index(t)]; }
    Arm best_arm_of_segment(std::size_t segment) const { return best_arms_[segment]; }
    std::vector<Arm> optimal_arms_of_segment(std::size_t segment) const;

private:
    std::size_t arms_ = 0;
    RewardKind kind_ = RewardKind::bernoulli;
    std::vector<Segment> segments_;
    std::vector<Step> ends_;            // cumulative segment ends nu_1..nu_M
    std::vector<double> best_means_;
    std::vector<Arm> best_arms_;
    std::vector<std::size_t> super_starts_;  // first segment of each super-segment
};

/// Per-change and per-segment gaps of a scenario.
struct GapProfile {
    // delta^(i) = max_k |mu_k^(i+1) - mu_k^(i)|, one entry per change (M-1).
    std::vector<double> change_gaps;
    // delta_k^(i), [change][arm].
    std::vector<std::vector<double>> arm_change_gaps;
    // Delta_k^(i) = max mean of segment i - mu_k^(i), [segment][arm].
    std::vector<std::vector<double>> suboptimality_gaps;
    // Smallest positive Delta_{k,t}; nullopt when every arm is always optimal.
    std::optional<double> min_positive_gap;
    // Smallest positive delta_k^(i) over all changes and arms.
    std::optional<double> min_positive_arm_change;
};

GapProfile gap_profile(const Scenario& s);

/// Builds a scenario from (length, means) pairs; see Scenario.
Scenario scenario_from_segments(std::size_t arms, std::vector<Segment> segments,
                                RewardKind kind = RewardKind::bernoulli);

/// One reward draw for arm k at step t. Consumes exactly one value of `rng`.
double sample_reward(const Scenario& s, Step t, Arm k, Rng& rng);

// Scenario JSON: {"K": int, "kind": "bernoulli", "segments": [{"length": int, "means": [...]}]}
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario_json(const std::filesystem::path& path);

struct LoadedTrace {
    Scenario scenario;
    std::vector<std::string> warnings;
};

/// Reads a per-segment mean table with header `segment,arm,mean` and an
/// optional `length` column. Segments and arms are numbered from 1. Means are
/// multiplied by `scale` and clamped to [0,1]; every clamp is reported in
/// `warnings`. Without a `length` column, `segment_length` must be given.
LoadedTrace load_trace_csv(const std::filesystem::path& path, double scale,
                           std::optional<Step> segment_length = std::nullopt);

/// Diagnostics for the detection-delay and segment-length conditions used by
/// the regret analysis. Never blocks a run.
struct AssumptionReport {
    double delta = 0.0;       // lower bound supplied by the caller
    double true_min_change_gap = 0.0;  // min_i delta^(i); 0 when M = 1
    std::vector<Step> mucb_delays;     // h_0 = 0, h_1..h_{M-1}
    std::vector<Step> glr_delays;      // h_0 = 0, h_1..h_{M-1}
    double glr_beta = 0.0;             // beta(T) used in the GLR delays
    bool gap_lower_bound_ok = false;   // delta <= min_i delta^(i)
    bool segment_growth_ok = false;    // s_i >= (ln KT + sqrt(K ln KT)) sqrt(s_{i-1})
    bool segment_length_ok = false;    // s_i >= 2 max(h_i, h_{i-1}) with GLR h
    std::vector<std::string> violations;
};

/// M-UCB tolerated delay ceil(w (K/2a+1) sqrt(s+1) + (w^2/4)(K/2a+1)^2).
Step mucb_delay_bound(double window, std::size_t arms, double alpha, Step segment_length);
/// GLR tolerated delay for a change of size `change_gap` with threshold `beta`.
Step glr_delay_bound(double beta, double change_gap, std::size_t arms, double alpha,
                     Step segment_length);

AssumptionReport validate_assumptions(const Scenario& s, double delta, double alpha,
                                      double window);

std::string format_report(const AssumptionReport& r);

}  // namespace shiftbandit
