#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shiftbandit {

// ---------------------------------------------------------------------------
// M-UCB two-halves test

/// |sum of the newer half - sum of the older half| of an even-length window.
double mucb_stat(std::span<const double> window);

/// Window size (4/delta^2) [sqrt(ln 2KT^2) + sqrt(ln 2T)]^2 rounded up to an
/// even integer.
std::int64_t mucb_window(double delta, std::size_t arms, std::int64_t horizon);

/// Window for the optimal-arm-change variant: factor 8 and min(delta, Delta_min).
std::int64_t mucb_window_extended(double delta, double min_gap, std::size_t arms,
                                  std::int64_t horizon);

/// Gap lower bound implied by a window size (inverse of mucb_window, unrounded).
double mucb_delta_for_window(double window, std::size_t arms, std::int64_t horizon);

/// b = sqrt((w/2) ln(2 K T^2)).
double mucb_threshold(std::int64_t window, std::size_t arms, std::int64_t horizon);

struct MUcbConfig {
    std::int64_t window = 200;
    double threshold = 1.0;
};

/// Per-arm ring buffers of the latest `window` rewards with running half sums.
class MUcbDetector {
public:
    MUcbDetector(std::size_t arms, MUcbConfig config);

    /// Records a reward for `arm`; returns true when the arm's buffer is full
    /// and the half-sum difference exceeds the threshold.
    bool observe(std::size_t arm, double reward);
    double statistic(std::size_t arm) const;
    std::size_t buffered(std::size_t arm) const;
    /// Latest min(n, window) rewards of `arm`, oldest first.
    std::vector<double> window_of(std::size_t arm) const;
    void reset();

    const MUcbConfig& config() const noexcept { return config_; }

private:
    struct Ring {
        std::vector<double> data;
        std::size_t head = 0;   // index of the oldest element once full
        std::size_t size = 0;
        std::size_t since_resum = 0;
        double older = 0.0;     // sum of the older half (valid once full)
        double newer = 0.0;     // sum of the newer half (valid once full)
    };
    double at(const Ring& r, std::size_t i) const;  // i-th oldest
    void resum(Ring& r) const;

    MUcbConfig config_;
    std::vector<Ring> rings_;
};

// ---------------------------------------------------------------------------
// Bernoulli GLR

/// kl(p, q) between Bernoulli laws, with 0 ln 0 = 0 and +inf when q is 0 or 1
/// and p differs from q.
double bernoulli_kl(double p, double q);

struct GlrResult {
    double statistic = 0.0;
    std::size_t split = 0;  // s*: samples in the first part
};

/// sup over s in [1, n-1] of s kl(mean_{1:s}, mean_{1:n}) + (n-s) kl(mean_{s+1:n}, mean_{1:n}).
GlrResult glr_stat(std::span<const double> samples);
/// Same statistic from a prefix-sum array p with p[0] = 0 and p.size() = n + 1.
GlrResult glr_stat_prefix(std::span<const double> prefix);

/// g(y) = y - ln y for y >= 1.
double glr_g(double y);
/// Inverse of g on [1, inf); bracketed root finding to relative tolerance 1e-10.
double glr_g_inverse(double x);
/// Two-branch g-tilde used inside J.
double glr_g_tilde(double x);
/// J(x) = 2 g~((g^-1(1 + x) + ln(pi^2/3)) / 2).
double glr_J(double x);

/// beta(n, eps) = 2 J(ln(3 n sqrt(n) / eps) / 2) + 6 ln(1 + ln n).
double glr_beta(double n, double eps);
/// beta = 2 J(ln(3 T^2) / 2) + 6 ln(1 + ln T), i.e. beta(T, 1/sqrt(T)).
double glr_threshold_theoretical(std::int64_t horizon);
/// ln(n^{3/2} / delta_conf).
double glr_threshold_practical(std::int64_t n, double delta_conf);

enum class GlrMode { theoretical, practical };

struct GlrConfig {
    GlrMode mode = GlrMode::practical;
    double confidence = 0.01;  // eps (theoretical) or delta_conf (practical)
    std::int64_t horizon = 2;  // T, used by the theoretical threshold
    std::int64_t every = 1;    // run the test on every `every`-th sample of an arm
};

/// Per-arm prefix sums of the full post-restart history.
class GlrDetector {
public:
    GlrDetector(std::size_t arms, GlrConfig config);

    bool observe(std::size_t arm, double reward);
    double threshold(std::int64_t n) const;
    std::size_t samples(std::size_t arm) const { return prefix_[arm].size() - 1; }
    void reset();

    const GlrConfig& config() const noexcept { return config_; }

private:
    GlrConfig config_;
    double fixed_threshold_ = 0.0;
    std::vector<std::vector<double>> prefix_;
};

// ---------------------------------------------------------------------------
// Two-sided CUSUM

struct CusumConfig {
    double drift = 0.1;      // epsilon
    double threshold = 1.0;  // h
    std::int64_t warmup = 100;  // H samples estimate the baseline mean
};

struct CusumState {
    std::int64_t seen = 0;
    double warmup_sum = 0.0;
    double baseline = 0.0;
    double upper = 0.0;
    double lower = 0.0;
};

/// One CUSUM update. Alarms when max(g+, g-) > threshold after the warm-up.
bool cusum_step(CusumState& state, const CusumConfig& config, double reward);

/// ln(T/M - 1).
double cusum_threshold(std::int64_t horizon, std::size_t segments);

class CusumDetector {
public:
    CusumDetector(std::size_t arms, CusumConfig config);
    bool observe(std::size_t arm, double reward);
    const CusumState& state(std::size_t arm) const { return states_[arm]; }
    void reset();

private:
    CusumConfig config_;
    std::vector<CusumState> states_;
};

}  // namespace shiftbandit
