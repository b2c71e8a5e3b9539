#include "shiftbandit/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace shiftbandit {

std::string to_string(RewardKind kind) {
    return kind == RewardKind::bernoulli ? "bernoulli" : "bounded";
}

RewardKind reward_kind_from_string(const std::string& name) {
    if (name == "bernoulli") return RewardKind::bernoulli;
    if (name == "bounded") return RewardKind::bounded;
    throw std::invalid_argument("unknown reward kind: " + name);
}

Scenario Scenario::from_segments(std::size_t arms, std::vector<Segment> segments,
                                 RewardKind kind) {
    if (arms < 2) throw std::invalid_argument("a scenario needs K >= 2 arms");
    if (segments.empty()) throw std::invalid_argument("a scenario needs at least one segment");

    Scenario s;
    s.arms_ = arms;
    s.kind_ = kind;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        auto& seg = segments[i];
        if (seg.length < 1)
            throw std::invalid_argument("segment " + std::to_string(i + 1) + " has length < 1");
        if (seg.means.size() != arms)
            throw std::invalid_argument("segment " + std::to_string(i + 1) + " has " +
                                        std::to_string(seg.means.size()) + " means, expected " +
                                        std::to_string(arms));
        for (double m : seg.means)
            if (!(m >= 0.0 && m <= 1.0))
                throw std::invalid_argument("segment " + std::to_string(i + 1) +
                                            " has a mean outside [0, 1]");
        if (!s.segments_.empty() && s.segments_.back().means == seg.means) {
            s.segments_.back().length += seg.length;
        } else {
            s.segments_.push_back(std::move(seg));
        }
    }

    Step end = 0;
    for (std::size_t i = 0; i < s.segments_.size(); ++i) {
        const auto& means = s.segments_[i].means;
        end += s.segments_[i].length;
        s.ends_.push_back(end);
        const auto best = std::max_element(means.begin(), means.end());  // first maximum
        s.best_means_.push_back(*best);
        s.best_arms_.push_back(static_cast<Arm>(best - means.begin()));
        if (i == 0 || s.best_arms_[i] != s.best_arms_[i - 1]) s.super_starts_.push_back(i);
    }
    return s;
}

std::vector<Step> Scenario::change_points() const {
    std::vector<Step> out{0};
    out.insert(out.end(), ends_.begin(), ends_.end());
    return out;
}

std::vector<Step> Scenario::optimal_arm_changes() const {
    std::vector<Step> out;
    for (std::size_t r = 1; r < super_starts_.size(); ++r) out.push_back(ends_[super_starts_[r] - 1]);
    return out;
}

std::size_t Scenario::segment_index(Step t) const {
    if (t < 1 || t > horizon())
        throw std::out_of_range("step " + std::to_string(t) + " outside 1.." +
                                std::to_string(horizon()));
    return static_cast<std::size_t>(std::lower_bound(ends_.begin(), ends_.end(), t) - ends_.begin());
}

double Scenario::mean(Step t, Arm k) const {
    if (k >= arms_) throw std::out_of_range("arm " + std::to_string(k) + " out of range");
    return segments_[segment_index(t)].means[k];
}

std::vector<Arm> Scenario::optimal_arms_of_segment(std::size_t segment) const {
    std::vector<Arm> out;
    const auto& means = segments_.at(segment).means;
    for (Arm k = 0; k < arms_; ++k)
        if (means[k] == best_means_[segment]) out.push_back(k);
    return out;
}

GapProfile gap_profile(const Scenario& s) {
    GapProfile g;
    const auto& segs = s.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double best = *std::max_element(segs[i].means.begin(), segs[i].means.end());
        std::vector<double> sub(s.arms());
        for (Arm k = 0; k < s.arms(); ++k) {
            sub[k] = best - segs[i].means[k];
            if (sub[k] > 0.0 && (!g.min_positive_gap || sub[k] < *g.min_positive_gap))
                g.min_positive_gap = sub[k];
        }
        g.suboptimality_gaps.push_back(std::move(sub));
        if (i + 1 < segs.size()) {
            std::vector<double> change(s.arms());
            double widest = 0.0;
            for (Arm k = 0; k < s.arms(); ++k) {
                change[k] = std::abs(segs[i + 1].means[k] - segs[i].means[k]);
                widest = std::max(widest, change[k]);
                if (change[k] > 0.0 &&
                    (!g.min_positive_arm_change || change[k] < *g.min_positive_arm_change))
                    g.min_positive_arm_change = change[k];
            }
            g.change_gaps.push_back(widest);
            g.arm_change_gaps.push_back(std::move(change));
        }
    }
    return g;
}

Scenario scenario_from_segments(std::size_t arms, std::vector<Segment> segments, RewardKind kind) {
    return Scenario::from_segments(arms, std::move(segments), kind);
}

double sample_reward(const Scenario& s, Step t, Arm k, Rng& rng) {
    const double mu = s.mean(t, k);
    const double u = uniform01(rng);
    if (s.kind() == RewardKind::bernoulli) return u < mu ? 1.0 : 0.0;
    const double radius = std::min(mu, 1.0 - mu);
    return std::clamp(mu + radius * (2.0 * u - 1.0), 0.0, 1.0);
}

std::string scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    j["K"] = s.arms();
    j["kind"] = to_string(s.kind());
    j["segments"] = nlohmann::json::array();
    for (const auto& seg : s.segments())
        j["segments"].push_back({{"length", seg.length}, {"means", seg.means}});
    return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        const auto arms = j.at("K").get<std::size_t>();
        const auto kind = reward_kind_from_string(j.value("kind", std::string("bernoulli")));
        std::vector<Segment> segs;
        for (const auto& item : j.at("segments"))
            segs.push_back({item.at("length").get<Step>(), item.at("means").get<std::vector<double>>()});
        return Scenario::from_segments(arms, std::move(segs), kind);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed scenario JSON: ") + e.what());
    }
}

Scenario load_scenario_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return scenario_from_json(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, const std::string& what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": non-numeric " + what +
                                    " '" + text + "'");
    }
}

}  // namespace

LoadedTrace load_trace_csv(const std::filesystem::path& path, double scale,
                           std::optional<Step> segment_length) {
    if (!(scale > 0.0)) throw std::invalid_argument("trace scale must be positive");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty trace file");
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto seg_col = column("segment");
    const auto arm_col = column("arm");
    const auto mean_col = column("mean");
    const auto len_col = column("length");
    if (!seg_col || !arm_col || !mean_col)
        throw std::invalid_argument(path.string() + ": header must contain segment,arm,mean");
    if (!len_col && !segment_length)
        throw std::invalid_argument(path.string() +
                                    ": no length column; a uniform segment length is required");
    if (segment_length && *segment_length < 1)
        throw std::invalid_argument("segment length must be >= 1");

    struct Row {
        std::map<long, double> means;
        std::optional<Step> length;
    };
    std::map<long, Row> rows;
    LoadedTrace out{Scenario{}, {}};
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        if (f.size() < header.size())
            throw std::invalid_argument(path.string() + ": line " + std::to_string(line_no) +
                                        " has too few fields");
        const auto seg = static_cast<long>(parse_number(f[*seg_col], "segment", line_no));
        const auto arm = static_cast<long>(parse_number(f[*arm_col], "arm", line_no));
        double mean = parse_number(f[*mean_col], "mean", line_no) * scale;
        if (mean < 0.0 || mean > 1.0) {
            const double clamped = std::clamp(mean, 0.0, 1.0);
            out.warnings.push_back("segment " + std::to_string(seg) + " arm " + std::to_string(arm) +
                                   ": scaled mean " + std::to_string(mean) + " clamped to " +
                                   std::to_string(clamped));
            mean = clamped;
        }
        Row& row = rows[seg];
        if (!row.means.emplace(arm, mean).second)
            throw std::invalid_argument(path.string() + ": duplicate row for segment " +
                                        std::to_string(seg) + " arm " + std::to_string(arm));
        if (len_col) {
            const auto len = static_cast<Step>(parse_number(f[*len_col], "length", line_no));
            if (row.length && *row.length != len)
                throw std::invalid_argument(path.string() + ": inconsistent length for segment " +
                                            std::to_string(seg));
            row.length = len;
        }
    }
    if (rows.empty()) throw std::invalid_argument(path.string() + ": no segment rows");

    const std::size_t arms = rows.begin()->second.means.size();
    std::vector<Segment> segs;
    long expected = 1;
    for (const auto& [index, row] : rows) {
        if (index != expected)
            throw std::invalid_argument(path.string() + ": segment indices must be contiguous from 1");
        ++expected;
        Segment s;
        s.length = segment_length ? *segment_length : row.length.value_or(0);
        if (len_col && row.length) s.length = *row.length;
        for (long k = 1; k <= static_cast<long>(arms); ++k) {
            const auto it = row.means.find(k);
            if (it == row.means.end() || row.means.size() != arms)
                throw std::invalid_argument(path.string() + ": segment " + std::to_string(index) +
                                            " is missing arm rows");
            s.means.push_back(it->second);
        }
        segs.push_back(std::move(s));
    }
    out.scenario = Scenario::from_segments(arms, std::move(segs));
    return out;
}

}  // namespace shiftbandit
