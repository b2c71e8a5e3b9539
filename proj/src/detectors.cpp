#include "shiftbandit/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace shiftbandit {

namespace {

void check_horizon(std::size_t arms, std::int64_t horizon) {
    if (arms < 2) throw std::invalid_argument("detector parameters need K >= 2");
    if (horizon < 2) throw std::invalid_argument("detector parameters need T >= 2");
}

double window_core(std::size_t arms, std::int64_t horizon) {
    const double k = static_cast<double>(arms);
    const double t = static_cast<double>(horizon);
    const double root = std::sqrt(std::log(2.0 * k * t * t)) + std::sqrt(std::log(2.0 * t));
    return root * root;
}

std::int64_t round_up_even(double x) {
    auto w = static_cast<std::int64_t>(std::ceil(x));
    if (w % 2 != 0) ++w;
    return std::max<std::int64_t>(w, 2);
}

}  // namespace

double mucb_stat(std::span<const double> window) {
    if (window.empty() || window.size() % 2 != 0)
        throw std::invalid_argument("M-UCB window length must be even and positive");
    const std::size_t half = window.size() / 2;
    double older = 0.0;
    double newer = 0.0;
    for (std::size_t i = 0; i < half; ++i) older += window[i];
    for (std::size_t i = half; i < window.size(); ++i) newer += window[i];
    return std::abs(newer - older);
}

std::int64_t mucb_window(double delta, std::size_t arms, std::int64_t horizon) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    check_horizon(arms, horizon);
    return round_up_even(4.0 / (delta * delta) * window_core(arms, horizon));
}

std::int64_t mucb_window_extended(double delta, double min_gap, std::size_t arms,
                                  std::int64_t horizon) {
    if (!(delta > 0.0) || !(min_gap > 0.0))
        throw std::invalid_argument("delta and the minimum gap must be positive");
    check_horizon(arms, horizon);
    const double d = std::min(delta, min_gap);
    return round_up_even(8.0 / (d * d) * window_core(arms, horizon));
}

double mucb_delta_for_window(double window, std::size_t arms, std::int64_t horizon) {
    if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
    check_horizon(arms, horizon);
    return std::sqrt(4.0 * window_core(arms, horizon) / window);
}

double mucb_threshold(std::int64_t window, std::size_t arms, std::int64_t horizon) {
    if (window < 2) throw std::invalid_argument("window must be >= 2");
    check_horizon(arms, horizon);
    const double t = static_cast<double>(horizon);
    return std::sqrt(static_cast<double>(window) / 2.0 *
                     std::log(2.0 * static_cast<double>(arms) * t * t));
}

MUcbDetector::MUcbDetector(std::size_t arms, MUcbConfig config) : config_(config) {
    if (config.window < 2 || config.window % 2 != 0)
        throw std::invalid_argument("M-UCB window must be even and >= 2");
    if (!(config.threshold > 0.0)) throw std::invalid_argument("M-UCB threshold must be positive");
    rings_.resize(arms);
    for (auto& r : rings_) r.data.assign(static_cast<std::size_t>(config.window), 0.0);
}

double MUcbDetector::at(const Ring& r, std::size_t i) const {
    return r.data[(r.head + i) % r.data.size()];
}

void MUcbDetector::resum(Ring& r) const {
    const std::size_t half = r.data.size() / 2;
    r.older = 0.0;
    r.newer = 0.0;
    for (std::size_t i = 0; i < half; ++i) r.older += at(r, i);
    for (std::size_t i = half; i < r.data.size(); ++i) r.newer += at(r, i);
    r.since_resum = 0;
}

bool MUcbDetector::observe(std::size_t arm, double reward) {
    Ring& r = rings_.at(arm);
    const std::size_t w = r.data.size();
    if (r.size < w) {
        r.data[(r.head + r.size) % w] = reward;
        if (++r.size == w) resum(r);
    } else {
        const double oldest = r.data[r.head];
        const double middle = at(r, w / 2);
        r.data[r.head] = reward;
        r.head = (r.head + 1) % w;
        // running sums drift for non-binary rewards; recompute once per window
        if (++r.since_resum >= w) {
            resum(r);
        } else {
            r.older += middle - oldest;
            r.newer += reward - middle;
        }
    }
    return r.size == w && std::abs(r.newer - r.older) > config_.threshold;
}

double MUcbDetector::statistic(std::size_t arm) const {
    const Ring& r = rings_.at(arm);
    if (r.size < r.data.size()) return 0.0;
    return std::abs(r.newer - r.older);
}

std::size_t MUcbDetector::buffered(std::size_t arm) const { return rings_.at(arm).size; }

std::vector<double> MUcbDetector::window_of(std::size_t arm) const {
    const Ring& r = rings_.at(arm);
    std::vector<double> out(r.size);
    for (std::size_t i = 0; i < r.size; ++i) out[i] = at(r, i);
    return out;
}

void MUcbDetector::reset() {
    for (auto& r : rings_) {
        r.head = 0;
        r.size = 0;
        r.since_resum = 0;
        r.older = 0.0;
        r.newer = 0.0;
    }
}

double bernoulli_kl(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("Bernoulli KL arguments must lie in [0, 1]");
    if (p == q) return 0.0;
    if (q == 0.0 || q == 1.0) return std::numeric_limits<double>::infinity();
    double kl = 0.0;
    if (p > 0.0) kl += p * std::log(p / q);
    if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return std::max(kl, 0.0);
}

GlrResult glr_stat_prefix(std::span<const double> prefix) {
    if (prefix.size() < 3) throw std::invalid_argument("GLR statistic needs n >= 2 samples");
    const std::size_t n = prefix.size() - 1;
    const double total = prefix[n];
    const double mean = std::clamp(total / static_cast<double>(n), 0.0, 1.0);
    GlrResult best;
    for (std::size_t s = 1; s < n; ++s) {
        const double ds = static_cast<double>(s);
        const double rest = static_cast<double>(n - s);
        const double m1 = std::clamp(prefix[s] / ds, 0.0, 1.0);
        const double m2 = std::clamp((total - prefix[s]) / rest, 0.0, 1.0);
        const double value = ds * bernoulli_kl(m1, mean) + rest * bernoulli_kl(m2, mean);
        if (value > best.statistic || best.split == 0) {
            best.statistic = value;
            best.split = s;
        }
    }
    return best;
}

GlrResult glr_stat(std::span<const double> samples) {
    std::vector<double> prefix(samples.size() + 1, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) prefix[i + 1] = prefix[i] + samples[i];
    return glr_stat_prefix(prefix);
}

double glr_g(double y) {
    if (!(y >= 1.0)) throw std::invalid_argument("g(y) = y - ln y is defined for y >= 1");
    return y - std::log(y);
}

double glr_g_inverse(double x) {
    if (!(x >= 1.0)) throw std::invalid_argument("g^-1 argument must be >= 1");
    if (x == 1.0) return 1.0;
    auto f = [x](double y) { return y - std::log(y) - x; };
    std::uintmax_t iterations = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        f, 1.0, 1.0 + 2.0 * x, boost::math::tools::eps_tolerance<double>(45), iterations);
    return 0.5 * (lo + hi);
}

double glr_g_tilde(double x) {
    static const double cut = glr_g_inverse(1.0 / std::log(1.5));
    if (x >= cut) {
        const double y = glr_g_inverse(x);
        return std::exp(1.0 / y) * y;
    }
    return 1.5 * (x - std::log(std::log(1.5)));
}

double glr_J(double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("J is defined for x >= 0");
    const double pi2_3 = std::numbers::pi * std::numbers::pi / 3.0;
    return 2.0 * glr_g_tilde((glr_g_inverse(1.0 + x) + std::log(pi2_3)) / 2.0);
}

double glr_beta(double n, double eps) {
    if (!(n >= 2.0)) throw std::invalid_argument("beta(n, eps) needs n >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    return 2.0 * glr_J(std::log(3.0 * n * std::sqrt(n) / eps) / 2.0) +
           6.0 * std::log(1.0 + std::log(n));
}

double glr_threshold_theoretical(std::int64_t horizon) {
    if (horizon < 2) throw std::invalid_argument("T must be >= 2");
    const double t = static_cast<double>(horizon);
    return 2.0 * glr_J(std::log(3.0 * t * t) / 2.0) + 6.0 * std::log(1.0 + std::log(t));
}

double glr_threshold_practical(std::int64_t n, double delta_conf) {
    if (n < 2) throw std::invalid_argument("practical GLR threshold needs n >= 2");
    if (!(delta_conf > 0.0 && delta_conf <= 1.0))
        throw std::invalid_argument("delta_conf must lie in (0, 1]");
    return 1.5 * std::log(static_cast<double>(n)) - std::log(delta_conf);
}

GlrDetector::GlrDetector(std::size_t arms, GlrConfig config) : config_(config) {
    if (config.every < 1) throw std::invalid_argument("GLR cadence must be >= 1");
    if (config.mode == GlrMode::theoretical) {
        fixed_threshold_ = glr_beta(static_cast<double>(config.horizon), config.confidence);
    } else if (!(config.confidence > 0.0 && config.confidence <= 1.0)) {
        throw std::invalid_argument("delta_conf must lie in (0, 1]");
    }
    prefix_.assign(arms, std::vector<double>{0.0});
}

double GlrDetector::threshold(std::int64_t n) const {
    if (config_.mode == GlrMode::theoretical) return fixed_threshold_;
    return glr_threshold_practical(n, config_.confidence);
}

bool GlrDetector::observe(std::size_t arm, double reward) {
    auto& p = prefix_.at(arm);
    p.push_back(p.back() + reward);
    const auto n = static_cast<std::int64_t>(p.size() - 1);
    if (n < 2 || n % config_.every != 0) return false;
    return glr_stat_prefix(p).statistic >= threshold(n);
}

void GlrDetector::reset() {
    for (auto& p : prefix_) p.assign(1, 0.0);
}

bool cusum_step(CusumState& state, const CusumConfig& config, double reward) {
    if (state.seen < config.warmup) {
        state.warmup_sum += reward;
        if (++state.seen == config.warmup)
            state.baseline = state.warmup_sum / static_cast<double>(config.warmup);
        return false;
    }
    ++state.seen;
    state.upper = std::max(0.0, state.upper + (reward - state.baseline - config.drift));
    state.lower = std::max(0.0, state.lower + (state.baseline - reward - config.drift));
    return std::max(state.upper, state.lower) > config.threshold;
}

double cusum_threshold(std::int64_t horizon, std::size_t segments) {
    const double ratio = static_cast<double>(horizon) / static_cast<double>(segments) - 1.0;
    if (!(ratio > 1.0)) throw std::invalid_argument("CUSUM threshold needs T/M > 2");
    return std::log(ratio);
}

CusumDetector::CusumDetector(std::size_t arms, CusumConfig config) : config_(config) {
    if (config.warmup < 1) throw std::invalid_argument("CUSUM warm-up must be >= 1");
    if (!(config.threshold > 0.0)) throw std::invalid_argument("CUSUM threshold must be positive");
    states_.assign(arms, CusumState{});
}

bool CusumDetector::observe(std::size_t arm, double reward) {
    return cusum_step(states_.at(arm), config_, reward);
}

void CusumDetector::reset() { states_.assign(states_.size(), CusumState{}); }

}  // namespace shiftbandit
