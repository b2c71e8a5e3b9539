#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "shiftbandit/builtin.hpp"
#include "shiftbandit/detectors.hpp"
#include "shiftbandit/rng.hpp"
#include "shiftbandit/scenario.hpp"

using namespace shiftbandit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& text) {
    const auto dir = fs::temp_directory_path() / "shiftbandit_test_env";
    fs::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << text;
    return path;
}

// M from the per-step indicator sum 1 + sum_t 1{mu_t != mu_{t+1}}.
std::size_t indicator_segment_count(const Scenario& s) {
    std::size_t m = 1;
    for (Step t = 1; t < s.horizon(); ++t)
        for (Arm k = 0; k < s.arms(); ++k)
            if (s.mean(t, k) != s.mean(t + 1, k)) {
                ++m;
                break;
            }
    return m;
}

std::size_t indicator_super_count(const Scenario& s) {
    auto best = [&](Step t) {
        Arm b = 0;
        for (Arm k = 1; k < s.arms(); ++k)
            if (s.mean(t, k) > s.mean(t, b)) b = k;
        return b;
    };
    std::size_t n = 1;
    for (Step t = 1; t < s.horizon(); ++t) n += best(t) != best(t + 1);
    return n;
}

}  // namespace

TEST_CASE("scenario counts segments and optimal-arm changes") {
    const auto a = Scenario::from_segments(2, {{3, {0.1, 0.9}}, {2, {0.9, 0.1}}});
    CHECK(a.segment_count() == 2);
    CHECK(a.super_segment_count() == 2);
    CHECK(a.horizon() == 5);
    CHECK(a.change_points() == std::vector<Step>{0, 3, 5});

    const auto b = Scenario::from_segments(2, {{3, {0.2, 0.8}}, {3, {0.3, 0.9}}});
    CHECK(b.segment_count() == 2);
    CHECK(b.super_segment_count() == 1);
    CHECK(b.optimal_arm_changes().empty());

    const auto c = Scenario::from_segments(2, {{5, {0.5, 0.5}}});
    CHECK(c.segment_count() == 1);
    CHECK(c.super_segment_count() == 1);
    CHECK(c.optimal_arms_of_segment(0) == std::vector<Arm>{0, 1});
}

TEST_CASE("adjacent identical segments merge") {
    const auto s = Scenario::from_segments(2, {{2, {0.4, 0.6}}, {3, {0.4, 0.6}}, {1, {0.6, 0.4}}});
    CHECK(s.segment_count() == 2);
    CHECK(s.segments()[0].length == 5);
    CHECK(s.horizon() == 6);
}

TEST_CASE("scenario construction errors") {
    CHECK_THROWS(Scenario::from_segments(2, {}));
    CHECK_THROWS(Scenario::from_segments(1, {{3, {0.5}}}));
    CHECK_THROWS(Scenario::from_segments(2, {{3, {0.5}}}));
    CHECK_THROWS(Scenario::from_segments(2, {{3, {0.5, 1.2}}}));
    CHECK_THROWS(Scenario::from_segments(2, {{3, {-0.1, 0.5}}}));
    CHECK_THROWS(Scenario::from_segments(2, {{0, {0.5, 0.5}}}));
}

TEST_CASE("segment lookup") {
    const auto s = Scenario::from_segments(2, {{3, {0.1, 0.9}}, {2, {0.9, 0.1}}});
    CHECK(s.segment_index(1) == 0);
    CHECK(s.segment_index(3) == 0);
    CHECK(s.segment_index(4) == 1);
    CHECK(s.segment_index(5) == 1);
    CHECK_THROWS(s.segment_index(0));
    CHECK_THROWS(s.segment_index(6));
    CHECK(s.mean(4, 0) == doctest::Approx(0.9));
    CHECK(s.best_mean(2) == doctest::Approx(0.9));
}

TEST_CASE("segment count matches the per-step indicator sum on random scenarios") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng() % 4;
        const std::size_t n = 1 + rng() % 8;
        std::vector<Segment> segs;
        for (std::size_t i = 0; i < n; ++i) {
            Segment seg{static_cast<Step>(1 + rng() % 5), std::vector<double>(k)};
            // coarse grid so that repeats, merges and ties occur
            for (auto& m : seg.means) m = static_cast<double>(rng() % 3) / 2.0;
            segs.push_back(seg);
        }
        const auto s = Scenario::from_segments(k, segs);
        CHECK(s.segment_count() == indicator_segment_count(s));
        CHECK(s.super_segment_count() == indicator_super_count(s));
        CHECK(s.super_segment_count() <= s.segment_count());
    }
}

TEST_CASE("gap profile") {
    const auto s = Scenario::from_segments(3, {{4, {0.2, 0.5, 0.8}}, {4, {0.5, 0.8, 0.2}}});
    const auto g = gap_profile(s);
    REQUIRE(g.change_gaps.size() == 1);
    CHECK(g.change_gaps[0] == doctest::Approx(0.6));
    CHECK(g.arm_change_gaps[0][0] == doctest::Approx(0.3));
    CHECK(g.suboptimality_gaps[0][2] == doctest::Approx(0.0));
    CHECK(g.suboptimality_gaps[1][2] == doctest::Approx(0.6));
    REQUIRE(g.min_positive_gap);
    CHECK(*g.min_positive_gap == doctest::Approx(0.3));
    REQUIRE(g.min_positive_arm_change);
    CHECK(*g.min_positive_arm_change == doctest::Approx(0.3));
}

TEST_CASE("bernoulli rewards") {
    const auto s = Scenario::from_segments(3, {{10, {1.0, 0.0, 0.5}}});
    Rng rng(7);
    for (Step t = 1; t <= 10; ++t) {
        CHECK(sample_reward(s, t, 0, rng) == 1.0);
        CHECK(sample_reward(s, t, 1, rng) == 0.0);
    }
    const auto big = Scenario::from_segments(2, {{100000, {0.5, 0.5}}});
    Rng r2(12345);
    double sum = 0.0;
    for (Step t = 1; t <= 100000; ++t) {
        const double x = sample_reward(big, t, 0, r2);
        CHECK((x == 0.0 || x == 1.0));
        sum += x;
    }
    CHECK(sum / 100000.0 >= 0.49);
    CHECK(sum / 100000.0 <= 0.51);
    CHECK_THROWS(sample_reward(s, 0, 0, rng));
    CHECK_THROWS(sample_reward(s, 11, 0, rng));
    CHECK_THROWS(sample_reward(s, 1, 3, rng));
}

TEST_CASE("reward draws consume exactly one value") {
    const auto s = Scenario::from_segments(2, {{5, {0.3, 0.7}}}, RewardKind::bounded);
    Rng a(99), b(99);
    sample_reward(s, 1, 0, a);
    b();
    CHECK(a() == b());
}

TEST_CASE("bounded rewards stay inside the mean-centred interval") {
    const auto s = Scenario::from_segments(2, {{20000, {0.3, 0.9}}}, RewardKind::bounded);
    Rng rng(5);
    double sum = 0.0;
    for (Step t = 1; t <= 20000; ++t) {
        const double x = sample_reward(s, t, 1, rng);
        CHECK(x >= 0.8);
        CHECK(x <= 1.0);
        sum += sample_reward(s, t, 0, rng);
    }
    CHECK(sum / 20000.0 == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("scenario JSON round trip") {
    const auto s = Scenario::from_segments(3, {{7, {0.1, 0.2, 0.3}}, {5, {0.3, 0.2, 0.1}}});
    const auto back = scenario_from_json(scenario_to_json(s));
    CHECK(back.arms() == 3);
    CHECK(back.horizon() == 12);
    CHECK(back.segments()[1].means == s.segments()[1].means);
    CHECK_THROWS(scenario_from_json("{\"K\": 2}"));
    CHECK_THROWS(scenario_from_json("not json"));
    const auto path = temp_file("s.json", scenario_to_json(s));
    CHECK(load_scenario_json(path).segment_count() == 2);
    CHECK_THROWS(load_scenario_json("/nonexistent/scenario.json"));
}

TEST_CASE("trace CSV ingestion") {
    std::string text = "segment,arm,mean\n";
    for (int i = 1; i <= 9; ++i)
        for (int k = 1; k <= 6; ++k)
            text += std::to_string(i) + "," + std::to_string(k) + "," +
                    std::to_string(0.01 * ((i * 7 + k * 3) % 10)) + "\n";
    const auto path = temp_file("yahoo.csv", text);
    const auto loaded = load_trace_csv(path, 10.0, 100);
    CHECK(loaded.scenario.arms() == 6);
    CHECK(loaded.scenario.segment_count() <= 9);
    CHECK(loaded.scenario.horizon() == 900);

    const auto single = load_trace_csv(temp_file("single.csv", "segment,arm,mean\n1,1,0.2\n1,2,0.4\n"), 1.0, 50);
    CHECK(single.scenario.segment_count() == 1);
    CHECK(single.warnings.empty());

    const auto clamped = load_trace_csv(temp_file("clamp.csv", "segment,arm,mean,length\n1,1,0.15,10\n1,2,0.05,10\n"), 10.0);
    CHECK(clamped.scenario.mean(1, 0) == 1.0);
    CHECK(clamped.scenario.mean(1, 1) == doctest::Approx(0.5));
    CHECK(clamped.warnings.size() == 1);

    CHECK_THROWS(load_trace_csv(temp_file("missing.csv", "segment,arm,mean\n1,1,0.2\n1,2,0.4\n2,1,0.3\n"), 1.0, 5));
    CHECK_THROWS(load_trace_csv(temp_file("nonnum.csv", "segment,arm,mean\n1,1,abc\n1,2,0.4\n"), 1.0, 5));
    CHECK_THROWS(load_trace_csv(path, 0.0, 5));
    CHECK_THROWS(load_trace_csv(path, -1.0, 5));
    CHECK_THROWS(load_trace_csv(path, 1.0));  // no length column, no segment length
    CHECK_THROWS(load_trace_csv(temp_file("gap.csv", "segment,arm,mean\n1,1,0.2\n1,2,0.4\n3,1,0.3\n3,2,0.1\n"), 1.0, 5));
    CHECK_THROWS(load_trace_csv(temp_file("header.csv", "seg,arm,value\n1,1,0.2\n"), 1.0, 5));
}

TEST_CASE("M-UCB tolerated delay") {
    CHECK(mucb_delay_bound(20, 2, 1.0, 400) == 1201);
    // s = 0: ceil(w f + w^2 f^2 / 4) with f = K/(2 alpha) + 1
    CHECK(mucb_delay_bound(20, 2, 1.0, 0) == 440);
    CHECK(mucb_delay_bound(200, 3, 1.0, 4000) > 4000);
}

TEST_CASE("assumption report") {
    const auto fig = fig3a_scenario();
    const double back_computed = mucb_delta_for_window(200, 3, 20000);
    const auto r = validate_assumptions(fig, back_computed, 1.0, 200);
    CHECK(back_computed > 0.3);
    CHECK_FALSE(r.gap_lower_bound_ok);
    CHECK_FALSE(r.segment_length_ok);
    CHECK_FALSE(r.violations.empty());
    CHECK(r.mucb_delays.size() == fig.segment_count());
    CHECK(r.mucb_delays[0] == 0);
    CHECK(r.mucb_delays[1] > 4000);

    // Purity.
    const auto again = validate_assumptions(fig, back_computed, 1.0, 200);
    CHECK(format_report(r) == format_report(again));

    CHECK_THROWS(validate_assumptions(fig, 0.0, 1.0, 200));
    CHECK_THROWS(validate_assumptions(fig, 0.5, 0.0, 200));
    CHECK_THROWS(validate_assumptions(fig, 0.5, 1.0, 0));
}

TEST_CASE("long segments satisfy every condition") {
    const Step len = 1'000'000'000;
    const auto s = Scenario::from_segments(2, {{len, {0.0, 1.0}}, {len, {1.0, 0.0}}});
    const auto r = validate_assumptions(s, 1.0, 1.0, 20);
    REQUIRE(r.glr_delays.size() == 2);
    CHECK(2 * r.glr_delays[1] <= len);
    CHECK(r.gap_lower_bound_ok);
    CHECK(r.segment_growth_ok);
    CHECK(r.segment_length_ok);
    CHECK(r.violations.empty());
}

TEST_CASE("builtin scenarios") {
    const auto f = fig3a_scenario();
    CHECK(f.arms() == 3);
    CHECK(f.horizon() == 20000);
    CHECK(f.segment_count() == 5);
    // (i + k) mod 3 = 2, 0, 1 -> 0.2, 0.5, 0.8 with 1-based i, k
    CHECK(f.segments()[0].means == std::vector<double>{0.2, 0.5, 0.8});
    CHECK(f.segments()[1].means == std::vector<double>{0.5, 0.8, 0.2});
    CHECK(f.segments()[2].means == std::vector<double>{0.8, 0.2, 0.5});

    const auto d = fig5d_scenario();
    CHECK(d.segment_count() == 8);
    CHECK(d.segments()[0].means == std::vector<double>{0.8, 0.6, 0.4});
    CHECK(d.segments()[2].means == std::vector<double>{0.2, 0.6, 0.4});

    const auto k = skip8_scenario();
    CHECK(k.segment_count() == 8);
    CHECK(k.super_segment_count() == 2);

    const auto c = single_change_scenario();
    CHECK(c.segment_count() == 2);
    CHECK(c.change_points()[1] == 2500);
    CHECK(gap_profile(c).change_gaps[0] == doctest::Approx(0.5));

    const auto r1 = random_scenario(4, 1000, 5, 11);
    const auto r2 = random_scenario(4, 1000, 5, 11);
    CHECK(r1.segments()[3].means == r2.segments()[3].means);
    CHECK(r1.segment_count() == 5);

    CHECK(split_horizon(10, 3) == std::vector<Step>{3, 3, 4});
    CHECK_THROWS(split_horizon(2, 3));
    CHECK_THROWS(builtin_scenario("nope"));
    for (const auto& name : builtin_names()) CHECK(is_builtin(name));
}
