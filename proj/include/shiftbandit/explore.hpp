#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "shiftbandit/scenario.hpp"

namespace shiftbandit {

/// Start offset of the first exploration session after a restart:
/// max(1, ceil((alpha - K/(4 alpha))^2)).
std::int64_t initial_u(std::size_t arms, double alpha);

/// ceil(u + (K/alpha) sqrt(u) + K^2/(4 alpha^2)). Always >= u + K.
std::int64_t next_u(std::int64_t u_prev, std::size_t arms, double alpha);

/// Diminishing exploration: round-robin sessions of K forced pulls starting
/// at offsets u_1 < u_2 < ... (relative to the last restart) whose gaps grow
/// like sqrt(u).
class ExplorationSchedule {
public:
    ExplorationSchedule(std::size_t arms, double alpha);

    /// Forced arm at step t given last restart tau, or nullopt for a free
    /// step. Advances u when t - tau == u + K, so calls must be made for
    /// consecutive t.
    std::optional<Arm> forced_arm(Step t, Step tau);

    void reset() noexcept;

    std::int64_t u() const noexcept { return u_; }
    std::int64_t session() const noexcept { return session_; }
    std::size_t arms() const noexcept { return arms_; }
    double alpha() const noexcept { return alpha_; }

    friend bool operator==(const ExplorationSchedule&, const ExplorationSchedule&) = default;

private:
    std::size_t arms_;
    double alpha_;
    std::int64_t u_;
    std::int64_t session_ = 1;
};

/// Fixed-rate round-robin exploration used by the uniform baselines.
struct UniformSchedule {
    double gamma = 1.0;
    std::size_t arms = 2;

    UniformSchedule(double rate, std::size_t k);

    /// ceil(K / gamma).
    std::int64_t period() const;
};

/// Forced arm when ((t - tau - 1) mod period) < K, cycling arms 0..K-1.
std::optional<Arm> uniform_forced_arm(Step t, Step tau, const UniformSchedule& us);

/// sqrt(m K ln T / T), the rate of an M-aware uniform explorer.
double uniform_rate(std::size_t segments, std::size_t arms, Step horizon);

/// c sqrt(K ln(K T)), the alpha that balances the regret bound.
double theory_alpha(std::size_t arms, Step horizon, double c = 1.0);

}  // namespace shiftbandit
