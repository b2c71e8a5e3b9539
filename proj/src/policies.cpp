#include "shiftbandit/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace shiftbandit {

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::alarm: return "alarm";
        case EventKind::skip: return "skip";
        case EventKind::restart: return "restart";
    }
    return "unknown";
}

double ucb_index(std::int64_t count, double sum, Step elapsed) {
    if (count < 0) throw std::invalid_argument("negative pull count");
    if (elapsed < 1) throw std::invalid_argument("UCB index needs t - tau >= 1");
    if (count == 0) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(count);
    return sum / n + std::sqrt(2.0 * std::log(static_cast<double>(elapsed)) / n);
}

bool skip(std::span<const double> x, std::span<const double> y, double eta) {
    if (x.empty() || y.empty()) throw std::invalid_argument("skip needs non-empty sample sets");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    return mx < my + eta;
}

StepOutcome Policy::step(Step t, const Scenario& env, Rng& rng) {
    if (t > env.horizon()) throw std::out_of_range("environment exhausted at t = " + std::to_string(t));
    StepOutcome out;
    out.action = select(t);
    out.forced = last_forced_;
    out.reward = sample_reward(env, t, out.action, rng);
    const std::size_t before = events_.size();
    update(t, out.action, out.reward);
    out.events.assign(events_.begin() + static_cast<std::ptrdiff_t>(before), events_.end());
    return out;
}

CdUcbPolicy::CdUcbPolicy(std::size_t arms, CdUcbConfig config)
    : arms_(arms), config_(config), schedule_(arms, config.alpha),
      samples_(arms), sums_(arms, 0.0) {
    if (arms < 2) throw std::invalid_argument("a policy needs K >= 2 arms");
    if (config_.exploration == ExplorationKind::uniform) UniformSchedule(config_.gamma, arms);
    if (config_.exploration == ExplorationKind::increasing && config_.horizon < 2)
        throw std::invalid_argument("increasing exploration needs the horizon T >= 2");
    if (config_.skipping && config_.skipping->n_ignore < 1)
        throw std::invalid_argument("N_I must be >= 1");
    switch (config_.detector) {
        case DetectorKind::none: break;
        case DetectorKind::mucb: detector_.emplace<MUcbDetector>(arms, config_.mucb); break;
        case DetectorKind::glr: detector_.emplace<GlrDetector>(arms, config_.glr); break;
        case DetectorKind::cusum: detector_.emplace<CusumDetector>(arms, config_.cusum); break;
    }
}

std::optional<Arm> CdUcbPolicy::forced(Step t) {
    switch (config_.exploration) {
        case ExplorationKind::none: return std::nullopt;
        case ExplorationKind::diminishing: return schedule_.forced_arm(t, tau_);
        case ExplorationKind::uniform:
            return uniform_forced_arm(t, tau_, UniformSchedule(config_.gamma, arms_));
        case ExplorationKind::increasing: {
            const double horizon = static_cast<double>(config_.horizon);
            const double rate = std::min(
                1.0, std::sqrt(static_cast<double>(restarts_ + 1) * static_cast<double>(arms_) *
                               std::log(horizon) / horizon));
            return uniform_forced_arm(t, tau_, UniformSchedule(rate, arms_));
        }
    }
    return std::nullopt;
}

Arm CdUcbPolicy::select(Step t) {
    if (const auto arm = forced(t)) {
        last_forced_ = true;
        return *arm;
    }
    last_forced_ = false;
    const Step elapsed = t - tau_;
    Arm best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (Arm k = 0; k < arms_; ++k) {
        const double idx = ucb_index(count(k), sums_[k], elapsed);
        if (idx > best_index) {
            best_index = idx;
            best = k;
        }
    }
    return best;
}

bool CdUcbPolicy::detect(Arm action, double reward) {
    return std::visit(
        [&](auto& d) -> bool {
            if constexpr (std::is_same_v<std::decay_t<decltype(d)>, std::monostate>) {
                return false;
            } else {
                return d.observe(action, reward);
            }
        },
        detector_);
}

void CdUcbPolicy::update(Step t, Arm action, double reward) {
    if (action >= arms_) throw std::out_of_range("arm out of range");
    samples_[action].push_back(reward);
    sums_[action] += reward;
    if (!detect(action, reward)) return;
    events_.push_back({t, EventKind::alarm, action});
    if (config_.skipping && !should_restart(action)) {
        events_.push_back({t, EventKind::skip, action});
        return;
    }
    restart(t, action);
}

bool CdUcbPolicy::should_restart(Arm alarmed) const {
    if (!config_.skipping) return true;
    const auto& sc = *config_.skipping;

    // k*: best full post-restart mean among arms with samples, smallest index on ties
    std::optional<Arm> best;
    double best_mean = -1.0;
    for (Arm k = 0; k < arms_; ++k) {
        if (samples_[k].empty()) continue;
        const double m = sums_[k] / static_cast<double>(samples_[k].size());
        if (!best || m > best_mean) {
            best = k;
            best_mean = m;
        }
    }
    if (!best) return true;

    auto recent = [&](Arm k) {
        const auto& z = samples_[k];
        const auto take = std::min<std::size_t>(z.size(), static_cast<std::size_t>(sc.n_ignore));
        return std::span<const double>(z).last(take);
    };
    if (alarmed == *best) {
        for (Arm k = 0; k < arms_; ++k) {
            if (k == *best || count(k) <= sc.n_ignore) continue;
            if (!skip(recent(k), recent(*best), sc.eta)) return true;
        }
        return false;
    }
    return count(alarmed) >= sc.n_ignore && !skip(recent(alarmed), recent(*best), sc.eta);
}

void CdUcbPolicy::restart(Step t, Arm cause) {
    tau_ = t;
    schedule_.reset();
    for (auto& z : samples_) z.clear();
    std::fill(sums_.begin(), sums_.end(), 0.0);
    std::visit(
        [](auto& d) {
            if constexpr (!std::is_same_v<std::decay_t<decltype(d)>, std::monostate>) d.reset();
        },
        detector_);
    ++restarts_;
    events_.push_back({t, EventKind::restart, cause});
}

DiscountedUcbPolicy::DiscountedUcbPolicy(std::size_t arms, double discount)
    : discount_(discount), sums_(arms, 0.0), counts_(arms, 0.0) {
    if (arms < 2) throw std::invalid_argument("a policy needs K >= 2 arms");
    if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in (0, 1]");
}

double DiscountedUcbPolicy::index(Arm k) const {
    if (counts_[k] <= 0.0) return std::numeric_limits<double>::infinity();
    return sums_[k] / counts_[k] + std::sqrt(2.0 * std::log(effective_steps_) / counts_[k]);
}

Arm DiscountedUcbPolicy::select(Step) {
    last_forced_ = false;
    effective_steps_ = discount_ * effective_steps_ + 1.0;
    Arm best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (Arm k = 0; k < sums_.size(); ++k) {
        const double idx = index(k);
        if (idx > best_index) {
            best_index = idx;
            best = k;
        }
    }
    return best;
}

void DiscountedUcbPolicy::update(Step, Arm action, double reward) {
    for (Arm k = 0; k < sums_.size(); ++k) {
        sums_[k] = discount_ * sums_[k] + (k == action ? reward : 0.0);
        counts_[k] = discount_ * counts_[k] + (k == action ? 1.0 : 0.0);
    }
}

SlidingWindowUcbPolicy::SlidingWindowUcbPolicy(std::size_t arms, std::int64_t window)
    : window_(window), sums_(arms, 0.0), counts_(arms, 0) {
    if (arms < 2) throw std::invalid_argument("a policy needs K >= 2 arms");
    if (window < 1) throw std::invalid_argument("sliding window must be >= 1");
}

Arm SlidingWindowUcbPolicy::select(Step t) {
    last_forced_ = false;
    const Step horizon = std::min<Step>(t, window_);
    Arm best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (Arm k = 0; k < sums_.size(); ++k) {
        const double idx = ucb_index(counts_[k], sums_[k], horizon);
        if (idx > best_index) {
            best_index = idx;
            best = k;
        }
    }
    return best;
}

void SlidingWindowUcbPolicy::update(Step, Arm action, double reward) {
    history_.emplace_back(action, reward);
    sums_[action] += reward;
    ++counts_[action];
    if (static_cast<std::int64_t>(history_.size()) > window_) {
        const auto [old_arm, old_reward] = history_.front();
        history_.pop_front();
        --counts_[old_arm];
        sums_[old_arm] = counts_[old_arm] == 0 ? 0.0 : sums_[old_arm] - old_reward;
    }
}

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{
        "ucb",       "mucb-de",   "mucb-uniform", "mucb-de-skip", "glr-de", "glr-increasing",
        "glr-de-skip", "cusum-de", "cusum-ucb",   "d-ucb",        "sw-ucb"};
    return names;
}

bool is_known_policy(const std::string& name) {
    const auto& names = policy_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

CdUcbConfig resolve_cd_config(const PolicySpec& spec, const Scenario& env) {
    if (!is_known_policy(spec.name)) throw std::invalid_argument("unknown policy: " + spec.name);
    if (spec.name == "d-ucb" || spec.name == "sw-ucb")
        throw std::invalid_argument(spec.name + " is not a change-detection policy");

    const std::size_t k = env.arms();
    const Step horizon = env.horizon();
    const std::size_t segments = env.segment_count();  // only M-aware baselines read this
    const auto& n = spec.name;
    const bool skipping = n.ends_with("-skip");

    CdUcbConfig c;
    c.alpha = spec.alpha;
    c.horizon = horizon;
    if (n == "ucb") {
        c.exploration = ExplorationKind::none;
    } else if (n.find("-de") != std::string::npos) {
        c.exploration = ExplorationKind::diminishing;
    } else if (n == "glr-increasing") {
        c.exploration = ExplorationKind::increasing;
    } else {
        c.exploration = ExplorationKind::uniform;
        c.gamma = spec.gamma.value_or(uniform_rate(segments, k, horizon));
    }

    if (n == "ucb") {
        c.detector = DetectorKind::none;
    } else if (n.starts_with("mucb")) {
        c.detector = DetectorKind::mucb;
        std::int64_t w = 200;
        if (spec.window) {
            w = *spec.window;
        } else if (spec.delta) {
            const auto gaps = gap_profile(env);
            w = skipping ? mucb_window_extended(*spec.delta, gaps.min_positive_gap.value_or(*spec.delta),
                                                k, horizon)
                         : mucb_window(*spec.delta, k, horizon);
        }
        c.mucb.window = w;
        c.mucb.threshold = spec.threshold.value_or(mucb_threshold(w, k, horizon));
    } else if (n.starts_with("glr")) {
        c.detector = DetectorKind::glr;
        c.glr.mode = spec.glr_mode;
        c.glr.horizon = horizon;
        c.glr.confidence = spec.glr_confidence.value_or(1.0 / std::sqrt(static_cast<double>(horizon)));
        c.glr.every = spec.glr_every;
    } else {
        c.detector = DetectorKind::cusum;
        c.cusum.drift = spec.cusum_drift;
        c.cusum.warmup = spec.cusum_warmup;
        c.cusum.threshold = spec.cusum_threshold.value_or(cusum_threshold(horizon, segments));
    }
    if (skipping) c.skipping = SkipConfig{spec.eta, spec.n_ignore};
    return c;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Scenario& env) {
    const double horizon = static_cast<double>(env.horizon());
    const double segments = static_cast<double>(env.segment_count());
    if (spec.name == "d-ucb") {
        const double discount = spec.discount.value_or(1.0 - 0.25 * std::sqrt(segments / horizon));
        return std::make_unique<DiscountedUcbPolicy>(env.arms(), discount);
    }
    if (spec.name == "sw-ucb") {
        const auto window = spec.sliding_window.value_or(
            static_cast<std::int64_t>(std::ceil(2.0 * std::sqrt(horizon * std::log(horizon) / segments))));
        return std::make_unique<SlidingWindowUcbPolicy>(env.arms(), window);
    }
    return std::make_unique<CdUcbPolicy>(env.arms(), resolve_cd_config(spec, env));
}

}  // namespace shiftbandit
