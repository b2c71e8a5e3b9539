// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "alg1_oracle.hpp"
#include "shiftbandit/builtin.hpp"
#include "shiftbandit/detectors.hpp"
#include "shiftbandit/explore.hpp"
#include "shiftbandit/harness.hpp"
#include "shiftbandit/policies.hpp"
#include "shiftbandit/rng.hpp"

using namespace shiftbandit;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double budget1_s = 5.0;
constexpr double budget2_s = 5.0;
constexpr double budget3_s = 60.0;
constexpr double budget4_s = 60.0;
constexpr double budget5_s = 600.0;
constexpr double budget6_s = 1800.0;
constexpr double budget8_s = 600.0;
constexpr std::size_t max_false_alarms = 2;
constexpr double min_detection_rate = 0.95;
constexpr double median_delay_fraction = 0.1;
constexpr double min_se_multiple = 2.0;
constexpr double min_scaling_ratio = 1.5;
constexpr double max_scaling_ratio = 3.0;
constexpr double max_skip_regret_ratio = 1.05;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::size_t workers() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::shared_ptr<const Scenario> shared(Scenario s) { return std::make_shared<const Scenario>(std::move(s)); }

Batch run(std::shared_ptr<const Scenario> env, PolicySpec policy, std::size_t reps, std::uint64_t seed,
          std::size_t threads = workers()) {
    return run_many(RunSpec{std::move(env), std::move(policy), reps, seed, threads, false});
}

PolicySpec named(const std::string& name) {
    PolicySpec p;
    p.name = name;
    return p;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict scheduler_exactness() {
    std::size_t checks = 0;
    for (std::size_t k : {2u, 3u, 10u})
        for (double alpha : {0.5, 1.0, 2.0}) {
            // session starts
            std::int64_t u = initial_u(k, alpha);
            std::int64_t prev = 0;
            for (int j = 1; u <= 1'000'000; ++j) {
                const double lower = std::pow((2.0 * j - 3.0) * static_cast<double>(k) / (4.0 * alpha) + alpha, 2);
                if (static_cast<double>(u) < lower)
                    return {false, fmt("u_%d = %lld below bound %.3f (K=%zu alpha=%g)", j, (long long)u, lower, k, alpha)};
                if (j > 1 && u < prev + static_cast<std::int64_t>(k))
                    return {false, fmt("u_%d overlaps the previous session (K=%zu alpha=%g)", j, k, alpha)};
                prev = u;
                u = next_u(u, k, alpha);
                ++checks;
            }
            // per-arm forced counts at every step
            ExplorationSchedule s(k, alpha);
            std::vector<std::int64_t> count(k, 0);
            std::int64_t most = 0;
            for (Step t = 1; t <= 1'000'000; ++t) {
                if (const auto a = s.forced_arm(t, 0)) most = std::max(most, ++count[*a]);
                const double bound = 2.0 * alpha * std::sqrt(static_cast<double>(t)) / static_cast<double>(k) + 1.5;
                if (static_cast<double>(most) > bound)
                    return {false, fmt("forced count %lld > %.3f at t=%lld (K=%zu alpha=%g)", (long long)most,
                                       bound, (long long)t, k, alpha)};
                ++checks;
            }
        }
    return {true, fmt("%zu checks over 9 (K, alpha) pairs", checks)};
}

Verdict detector_oracles() {
    Rng rng(20240601);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 63;
        const double p = uniform01(rng);
        std::vector<double> x(n);
        for (auto& v : x) v = uniform01(rng) < p ? 1.0 : 0.0;
        // every split, sums recomputed from scratch
        double total = 0.0;
        for (double v : x) total += v;
        const double mean = total / static_cast<double>(n);
        double best = -1.0;
        std::size_t best_s = 0;
        for (std::size_t s = 1; s < n; ++s) {
            double a = 0.0, b = 0.0;
            for (std::size_t i = 0; i < s; ++i) a += x[i];
            for (std::size_t i = s; i < n; ++i) b += x[i];
            const double value = static_cast<double>(s) * bernoulli_kl(a / static_cast<double>(s), mean) +
                                 static_cast<double>(n - s) * bernoulli_kl(b / static_cast<double>(n - s), mean);
            if (best_s == 0 || value > best) {
                best = value;
                best_s = s;
            }
        }
        const auto fast = glr_stat(x);
        if (fast.statistic != best || fast.split != best_s)
            return {false, fmt("GLR instance %d (n=%zu): %.17g vs brute force %.17g", trial, n, fast.statistic, best)};
    }
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t w = 2 * (1 + rng() % 256);
        std::vector<double> x(w);
        for (auto& v : x) v = trial % 2 ? uniform01(rng) : static_cast<double>(rng() % 2);
        double older = 0.0, newer = 0.0;
        for (std::size_t i = 0; i < w / 2; ++i) older += x[i];
        for (std::size_t i = w / 2; i < w; ++i) newer += x[i];
        const double hand = std::fabs(newer - older);
        if (mucb_stat(x) != hand) return {false, fmt("M-UCB window %d (w=%zu) differs", trial, w)};
    }
    return {true, "1000 GLR instances (n <= 64) and 1000 M-UCB windows match exactly"};
}

PolicySpec mucb_at_half() {
    PolicySpec p = named("mucb-de");
    p.delta = 0.5;  // w from delta, b from w
    return p;
}

Verdict false_alarms() {
    const auto env = shared(stationary_scenario(5000, 3, 0.5));
    const auto cfg = resolve_cd_config(mucb_at_half(), *env);
    const auto b = run(env, mucb_at_half(), 200, 3001);
    std::size_t alarms = 0;
    for (const auto& r : b.runs) alarms += r.count(EventKind::alarm);
    return {alarms <= max_false_alarms,
            fmt("%zu alarms in 200 runs (w=%lld, b=%.3f, limit %zu)", alarms, (long long)cfg.mucb.window,
                cfg.mucb.threshold, max_false_alarms)};
}

Verdict detection() {
    const auto env = shared(single_change_scenario(5000, 2500, 3));
    const auto cfg = resolve_cd_config(mucb_at_half(), *env);
    const auto report = validate_assumptions(*env, 0.5, 1.0, static_cast<double>(cfg.mucb.window));
    const Step nu = env->change_points().at(1);
    const Step h1 = report.mucb_delays.at(1);
    const auto b = run(env, mucb_at_half(), 200, 4001);
    std::size_t detected = 0;
    std::vector<double> delays;
    for (const auto& r : b.runs) {
        double delay = std::numeric_limits<double>::infinity();
        for (const auto& e : r.events)
            if (e.kind == EventKind::alarm && e.t > nu) {
                delay = static_cast<double>(e.t - nu);
                break;
            }
        detected += delay <= static_cast<double>(h1);
        delays.push_back(delay);
    }
    const double rate = static_cast<double>(detected) / static_cast<double>(b.runs.size());
    const double med = median(delays);
    const bool ok = rate >= min_detection_rate && med <= median_delay_fraction * static_cast<double>(h1);
    return {ok, fmt("detected %.1f%% within h_1=%lld, median delay %.1f (limit %.1f)", 100 * rate, (long long)h1,
                    med, median_delay_fraction * static_cast<double>(h1))};
}

Verdict exploration_ordering() {
    const auto env = shared(fig3a_scenario(20000, 5));
    PolicySpec de = named("mucb-de");
    de.window = 200;
    PolicySpec uni = named("mucb-uniform");
    uni.window = 200;
    const auto a = run(env, de, 100, 5001);
    const auto b = run(env, uni, 100, 5002);
    const double gap = b.summary.final_mean - a.summary.final_mean;
    const double se = std::hypot(a.summary.final_stderr, b.summary.final_stderr);
    return {gap > min_se_multiple * se, fmt("DE %.1f +- %.2f, uniform %.1f +- %.2f, gap %.1f vs %.1f",
                                            a.summary.final_mean, a.summary.final_stderr, b.summary.final_mean,
                                            b.summary.final_stderr, gap, min_se_multiple * se)};
}

Verdict sqrt_scaling() {
    std::vector<double> finals;
    std::string detail;
    for (Step horizon : {5000, 20000, 80000}) {
        PolicySpec p = named("mucb-de");
        p.window = 200;
        const auto b = run(shared(fig3a_scenario(horizon, 5)), p, 100, 6000 + static_cast<std::uint64_t>(horizon));
        finals.push_back(b.summary.final_mean);
        detail += fmt("T=%lld: %.1f  ", (long long)horizon, b.summary.final_mean);
    }
    bool ok = true;
    for (std::size_t i = 1; i < finals.size(); ++i) {
        const double ratio = finals[i] / finals[i - 1];
        ok = ok && ratio >= min_scaling_ratio && ratio <= max_scaling_ratio;
        detail += fmt("ratio %.2f  ", ratio);
    }
    detail.pop_back();
    detail.pop_back();
    return {ok, detail};
}

Verdict oracle_trace() {
    struct Case {
        Scenario env;
        std::int64_t w;
        double b;
    };
    const auto stationary = Scenario::from_segments(2, {{200, {0.6, 0.4}}});
    const auto changing = Scenario::from_segments(2, {{100, {0.8, 0.2}}, {100, {0.1, 0.9}}});
    const std::vector<Case> cases{
        {stationary, mucb_window(0.5, 2, 200), mucb_threshold(mucb_window(0.5, 2, 200), 2, 200)},
        {changing, 20, 4.0},
        {changing, 10, 2.0},
    };
    std::size_t restarts = 0;
    for (std::size_t c = 0; c < cases.size(); ++c)
        for (std::uint64_t seed : {7u, 8u, 9u}) {
            CdUcbConfig cfg;
            cfg.alpha = 1.0;
            cfg.mucb = {cases[c].w, cases[c].b};
            CdUcbPolicy p(2, cfg);
            const auto oracle = alg1_oracle_actions(cases[c].env, 1.0, static_cast<int>(cases[c].w), cases[c].b, seed);
            Rng rng(seed);
            for (Step t = 1; t <= 200; ++t) {
                const auto out = p.step(t, cases[c].env, rng);
                if (static_cast<int>(out.action) + 1 != oracle[static_cast<std::size_t>(t - 1)])
                    return {false, fmt("case %zu seed %llu diverges at t=%lld", c, (unsigned long long)seed,
                                       (long long)t)};
            }
            restarts += static_cast<std::size_t>(p.restarts());
        }
    return {true, fmt("9 traces of 200 steps identical (%zu restarts exercised)", restarts)};
}

Verdict skipping() {
    const auto env = shared(skip8_scenario(20000));
    PolicySpec plain = named("mucb-de");
    plain.window = 200;
    PolicySpec skip = named("mucb-de-skip");
    skip.window = 200;
    skip.eta = 0.0;
    skip.n_ignore = 50;
    const auto a = run(env, plain, 100, 8001);
    const auto b = run(env, skip, 100, 8001);
    auto restarts = [](const Batch& x) {
        std::vector<double> r;
        for (const auto& run : x.runs) r.push_back(static_cast<double>(run.count(EventKind::restart)));
        return median(r);
    };
    const double ra = restarts(a), rb = restarts(b);
    const bool ok = rb < ra && b.summary.final_mean <= max_skip_regret_ratio * a.summary.final_mean;
    return {ok, fmt("M=%zu S=%zu; median restarts %.1f (skip) vs %.1f, regret %.1f vs %.1f (limit %.1f)",
                    env->segment_count(), env->super_segment_count(), rb, ra, b.summary.final_mean,
                    a.summary.final_mean, max_skip_regret_ratio * a.summary.final_mean)};
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    const auto root = fs::temp_directory_path() / "shiftbandit_acceptance";
    fs::remove_all(root);
    const auto env = shared(fig5d_scenario(5000, 8));
    const std::vector<std::string> names{"mucb-de", "mucb-de-skip", "glr-de", "cusum-ucb", "d-ucb", "sw-ucb"};
    std::vector<std::string> exports;
    for (const std::size_t threads : {std::size_t{1}, std::size_t{1}, std::size_t{4}}) {
        std::vector<Batch> batches;
        for (const auto& n : names) batches.push_back(run(env, named(n), 6, 9001, threads));
        std::vector<PolicyResults> rows;
        for (std::size_t i = 0; i < names.size(); ++i) rows.push_back({names[i], &batches[i]});
        const auto dir = root / std::to_string(exports.size());
        std::string bytes;
        for (const auto fmt_kind : {ExportFormat::csv, ExportFormat::json})
            for (const auto& f : export_results(rows, fmt_kind, dir)) bytes += read_all(f);
        exports.push_back(std::move(bytes));
    }
    fs::remove_all(root);
    const bool ok = exports[0] == exports[1] && exports[0] == exports[2];
    return {ok, fmt("serial, serial and 4-thread exports %s (%zu bytes)", ok ? "identical" : "differ",
                    exports[0].size())};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "scheduler exactness", budget1_s, scheduler_exactness},
        {2, "detector oracle equivalence", budget2_s, detector_oracles},
        {3, "false alarms", budget3_s, false_alarms},
        {4, "detection", budget4_s, detection},
        {5, "diminishing vs uniform exploration", budget5_s, exploration_ordering},
        {6, "sqrt(T) scaling", budget6_s, sqrt_scaling},
        {7, "pseudo-code oracle trace", 0.0, oracle_trace},
        {8, "skipping effectiveness", budget8_s, skipping},
        {9, "determinism", 0.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && secs > c.budget_s) {
            v.pass = false;
            v.detail += fmt("; over the %.0f s budget", c.budget_s);
        }
        failures += !v.pass;
        std::printf("%s %d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
