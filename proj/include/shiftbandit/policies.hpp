#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shiftbandit/detectors.hpp"
#include "shiftbandit/explore.hpp"
#include "shiftbandit/scenario.hpp"

namespace shiftbandit {

enum class EventKind { alarm, skip, restart };
std::string to_string(EventKind kind);

struct Event {
    Step t = 0;
    EventKind kind = EventKind::alarm;
    Arm arm = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

struct StepOutcome {
    Arm action = 0;
    double reward = 0.0;
    bool forced = false;
    std::vector<Event> events;
};

/// sum/n + sqrt(2 ln(elapsed) / n); +inf for an unseen arm.
double ucb_index(std::int64_t count, double sum, Step elapsed);

/// True (ignore the alarm) iff mean(x) < mean(y) + eta.
bool skip(std::span<const double> x, std::span<const double> y, double eta);

/// Sequential bandit policy. `select` must be called for t = 1, 2, ... and
/// each call followed by `update` with the same t.
class Policy {
public:
    virtual ~Policy() = default;

    virtual Arm select(Step t) = 0;
    virtual void update(Step t, Arm action, double reward) = 0;

    /// select + sample + update. Events raised during the update are returned.
    StepOutcome step(Step t, const Scenario& env, Rng& rng);

    const std::vector<Event>& events() const noexcept { return events_; }
    bool last_forced() const noexcept { return last_forced_; }

protected:
    std::vector<Event> events_;
    bool last_forced_ = false;
};

enum class ExplorationKind { none, diminishing, uniform, increasing };
enum class DetectorKind { none, mucb, glr, cusum };

/// Post-alarm filter that only restarts when the alarm dethrones the
/// empirically best arm.
struct SkipConfig {
    double eta = 0.0;
    std::int64_t n_ignore = 50;  // N_I; also the size of the compared recent-sample sets
};

struct CdUcbConfig {
    ExplorationKind exploration = ExplorationKind::diminishing;
    double alpha = 1.0;          // diminishing
    double gamma = 1.0;          // uniform
    Step horizon = 2;            // increasing: gamma_m = sqrt((m+1) K ln T / T)
    DetectorKind detector = DetectorKind::mucb;
    MUcbConfig mucb{};
    GlrConfig glr{};
    CusumConfig cusum{};
    std::optional<SkipConfig> skipping;
};

/// UCB on post-restart statistics, forced exploration, and a change detector
/// whose alarms restart everything (or, with `skipping`, only alarms that
/// change the best arm).
class CdUcbPolicy final : public Policy {
public:
    CdUcbPolicy(std::size_t arms, CdUcbConfig config);

    Arm select(Step t) override;
    void update(Step t, Arm action, double reward) override;

    /// Full reset at time t: tau <- t, fresh schedule, empty buffers. `cause` is
    /// the alarmed arm recorded in the restart event.
    void restart(Step t, Arm cause = 0);

    Step last_restart() const noexcept { return tau_; }
    std::int64_t count(Arm k) const { return static_cast<std::int64_t>(samples_.at(k).size()); }
    double sum(Arm k) const { return sums_.at(k); }
    std::span<const double> samples(Arm k) const { return samples_.at(k); }
    const ExplorationSchedule& schedule() const noexcept { return schedule_; }
    std::int64_t restarts() const noexcept { return restarts_; }
    const CdUcbConfig& config() const noexcept { return config_; }

    /// Decision of the skipping filter for an alarm on `alarmed`, given the
    /// current buffers: true means restart.
    bool should_restart(Arm alarmed) const;

private:
    std::optional<Arm> forced(Step t);
    bool detect(Arm action, double reward);

    std::size_t arms_;
    CdUcbConfig config_;
    Step tau_ = 0;
    ExplorationSchedule schedule_;
    std::int64_t restarts_ = 0;
    std::vector<std::vector<double>> samples_;
    std::vector<double> sums_;
    std::variant<std::monostate, MUcbDetector, GlrDetector, CusumDetector> detector_;
};

/// Discounted UCB: statistics decay by `discount` each step;
/// index = S_k/N_k + sqrt(2 ln(n_t) / N_k), n_t the discounted step count.
class DiscountedUcbPolicy final : public Policy {
public:
    DiscountedUcbPolicy(std::size_t arms, double discount);
    Arm select(Step t) override;
    void update(Step t, Arm action, double reward) override;
    double index(Arm k) const;

private:
    double discount_;
    double effective_steps_ = 0.0;
    std::vector<double> sums_;
    std::vector<double> counts_;
};

/// Sliding-window UCB over the last `window` steps.
class SlidingWindowUcbPolicy final : public Policy {
public:
    SlidingWindowUcbPolicy(std::size_t arms, std::int64_t window);
    Arm select(Step t) override;
    void update(Step t, Arm action, double reward) override;

private:
    std::int64_t window_;
    std::deque<std::pair<Arm, double>> history_;
    std::vector<double> sums_;
    std::vector<std::int64_t> counts_;
};

/// Named policy plus every tunable; unset values take the documented defaults
/// when the policy is built against a scenario.
struct PolicySpec {
    std::string name = "mucb-de";
    double alpha = 1.0;
    std::optional<std::int64_t> window;     // M-UCB w (default 200, or from delta)
    std::optional<double> threshold;        // M-UCB b
    std::optional<double> delta;            // gap lower bound for w
    double eta = 0.0;
    std::int64_t n_ignore = 50;
    std::optional<double> gamma;            // uniform exploration rate
    GlrMode glr_mode = GlrMode::practical;
    std::optional<double> glr_confidence;   // default 1/sqrt(T)
    std::int64_t glr_every = 1;
    double cusum_drift = 0.1;
    std::int64_t cusum_warmup = 100;
    std::optional<double> cusum_threshold;  // default ln(T/M - 1)
    std::optional<double> discount;         // default 1 - sqrt(M/T)/4
    std::optional<std::int64_t> sliding_window;  // default 2 sqrt(T ln T / M)
};

const std::vector<std::string>& policy_names();
bool is_known_policy(const std::string& name);

/// Resolved configuration of a CD-UCB style policy (throws for d-ucb/sw-ucb).
CdUcbConfig resolve_cd_config(const PolicySpec& spec, const Scenario& env);

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Scenario& env);

}  // namespace shiftbandit
