#include "shiftbandit/explore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftbandit {

namespace {

void check_params(std::size_t arms, double alpha) {
    if (arms < 1) throw std::invalid_argument("exploration needs at least one arm");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

}  // namespace

std::int64_t initial_u(std::size_t arms, double alpha) {
    check_params(arms, alpha);
    const double k = static_cast<double>(arms);
    const double root = alpha - k / (4.0 * alpha);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(root * root)));
}

std::int64_t next_u(std::int64_t u_prev, std::size_t arms, double alpha) {
    check_params(arms, alpha);
    if (u_prev < 1) throw std::invalid_argument("u must be >= 1");
    const double k = static_cast<double>(arms);
    const double u = static_cast<double>(u_prev);
    const double next = std::ceil(u + (k / alpha) * std::sqrt(u) + k * k / (4.0 * alpha * alpha));
    // the real-valued increment exceeds K whenever u >= 1; guard rounding anyway
    return std::max(static_cast<std::int64_t>(next), u_prev + static_cast<std::int64_t>(arms));
}

ExplorationSchedule::ExplorationSchedule(std::size_t arms, double alpha)
    : arms_(arms), alpha_(alpha), u_(initial_u(arms, alpha)) {}

std::optional<Arm> ExplorationSchedule::forced_arm(Step t, Step tau) {
    if (t <= tau) throw std::invalid_argument("forced_arm requires t > tau");
    const std::int64_t elapsed = t - tau;
    const auto k = static_cast<std::int64_t>(arms_);
    if (u_ <= elapsed && elapsed < u_ + k) return static_cast<Arm>(elapsed - u_);
    if (elapsed == u_ + k) {
        u_ = next_u(u_, arms_, alpha_);
        ++session_;
    }
    return std::nullopt;
}

void ExplorationSchedule::reset() noexcept {
    u_ = initial_u(arms_, alpha_);
    session_ = 1;
}

UniformSchedule::UniformSchedule(double rate, std::size_t k) : gamma(rate), arms(k) {
    if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (k < 1) throw std::invalid_argument("uniform schedule needs at least one arm");
}

std::int64_t UniformSchedule::period() const {
    // 1e-12 slack keeps K/gamma from rounding up past an exact integer
    const double ratio = static_cast<double>(arms) / gamma;
    return std::max(static_cast<std::int64_t>(arms),
                    static_cast<std::int64_t>(std::ceil(ratio - 1e-12)));
}

std::optional<Arm> uniform_forced_arm(Step t, Step tau, const UniformSchedule& us) {
    if (t <= tau) throw std::invalid_argument("uniform_forced_arm requires t > tau");
    const std::int64_t phase = (t - tau - 1) % us.period();
    if (phase < static_cast<std::int64_t>(us.arms)) return static_cast<Arm>(phase);
    return std::nullopt;
}

double uniform_rate(std::size_t segments, std::size_t arms, Step horizon) {
    if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
    const double t = static_cast<double>(horizon);
    return std::min(1.0, std::sqrt(static_cast<double>(segments) * static_cast<double>(arms) *
                                   std::log(t) / t));
}

double theory_alpha(std::size_t arms, Step horizon, double c) {
    const double k = static_cast<double>(arms);
    return c * std::sqrt(k * std::log(k * static_cast<double>(horizon)));
}

}  // namespace shiftbandit
