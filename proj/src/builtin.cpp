#include "shiftbandit/builtin.hpp"

#include <algorithm>
#include <stdexcept>

#include "shiftbandit/rng.hpp"

namespace shiftbandit {

std::vector<Step> split_horizon(Step horizon, std::size_t segments) {
    if (segments < 1) throw std::invalid_argument("need at least one segment");
    if (horizon < static_cast<Step>(segments))
        throw std::invalid_argument("horizon shorter than the number of segments");
    std::vector<Step> out;
    const auto m = static_cast<Step>(segments);
    for (Step i = 1; i <= m; ++i) out.push_back(i * horizon / m - (i - 1) * horizon / m);
    return out;
}

Scenario fig3a_scenario(Step horizon, std::size_t segments) {
    const auto lengths = split_horizon(horizon, segments);
    std::vector<Segment> segs;
    for (std::size_t i = 1; i <= segments; ++i) {
        Segment s{lengths[i - 1], {}};
        for (std::size_t k = 1; k <= 3; ++k) {
            switch ((i + k) % 3) {
                case 2: s.means.push_back(0.2); break;
                case 0: s.means.push_back(0.5); break;
                default: s.means.push_back(0.8); break;
            }
        }
        segs.push_back(std::move(s));
    }
    return Scenario::from_segments(3, std::move(segs));
}

Scenario fig5d_scenario(Step horizon, std::size_t segments) {
    const auto lengths = split_horizon(horizon, segments);
    std::vector<Segment> segs;
    for (std::size_t i = 1; i <= segments; ++i) {
        const std::size_t phase = (i + 1) % 4;
        const double arm1 = (phase == 2 || phase == 3) ? 0.8 : 0.2;
        const double arm2 = (i + 2) % 2 == 0 ? 0.4 : 0.6;
        const double arm3 = (i + 3) % 2 == 0 ? 0.4 : 0.6;
        segs.push_back({lengths[i - 1], {arm1, arm2, arm3}});
    }
    return Scenario::from_segments(3, std::move(segs));
}

Scenario skip8_scenario(Step horizon) {
    static const double table[8][3] = {
        {0.3, 0.1, 0.2}, {0.9, 0.1, 0.2}, {0.3, 0.1, 0.2}, {0.9, 0.1, 0.2},
        {0.1, 0.9, 0.2}, {0.1, 0.3, 0.2}, {0.1, 0.9, 0.2}, {0.1, 0.3, 0.2},
    };
    const auto lengths = split_horizon(horizon, 8);
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < 8; ++i)
        segs.push_back({lengths[i], {table[i][0], table[i][1], table[i][2]}});
    return Scenario::from_segments(3, std::move(segs));
}

Scenario stationary_scenario(Step horizon, std::size_t arms, double mean) {
    return Scenario::from_segments(arms, {{horizon, std::vector<double>(arms, mean)}});
}

Scenario single_change_scenario(Step horizon, Step change_at, std::size_t arms) {
    if (change_at < 1 || change_at >= horizon)
        throw std::invalid_argument("change point must lie inside the horizon");
    std::vector<double> before(arms, 0.5);
    std::vector<double> after(arms, 0.5);
    before[0] = 0.75;
    after[0] = 0.25;
    return Scenario::from_segments(arms, {{change_at, before}, {horizon - change_at, after}});
}

Scenario random_scenario(std::size_t arms, Step horizon, std::size_t segments,
                         std::uint64_t instance_seed) {
    Rng rng(splitmix64(instance_seed));
    const auto lengths = split_horizon(horizon, segments);
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < segments; ++i) {
        Segment s{lengths[i], std::vector<double>(arms)};
        for (auto& m : s.means) m = uniform01(rng);
        segs.push_back(std::move(s));
    }
    return Scenario::from_segments(arms, std::move(segs));
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"fig3a", "fig5d", "skip8", "stationary",
                                                "single-change", "random"};
    return names;
}

bool is_builtin(const std::string& name) {
    const auto& n = builtin_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

Scenario builtin_scenario(const std::string& name, const BuiltinParams& p) {
    if (name == "fig3a") return fig3a_scenario(p.horizon.value_or(20000), p.segments.value_or(5));
    if (name == "fig5d") return fig5d_scenario(p.horizon.value_or(20000), p.segments.value_or(8));
    if (name == "skip8") return skip8_scenario(p.horizon.value_or(20000));
    if (name == "stationary") return stationary_scenario(p.horizon.value_or(5000), p.arms.value_or(3));
    if (name == "single-change") {
        const Step t = p.horizon.value_or(5000);
        return single_change_scenario(t, t / 2, p.arms.value_or(3));
    }
    if (name == "random")
        return random_scenario(p.arms.value_or(5), p.horizon.value_or(20000), p.segments.value_or(5),
                               p.instance_seed);
    throw std::invalid_argument("unknown builtin scenario: " + name);
}

}  // namespace shiftbandit
