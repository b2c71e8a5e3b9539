#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "shiftbandit/detectors.hpp"
#include "shiftbandit/scenario.hpp"

namespace shiftbandit {

namespace {

double exploration_factor(std::size_t arms, double alpha) {
    return static_cast<double>(arms) / (2.0 * alpha) + 1.0;
}

}  // namespace

Step mucb_delay_bound(double window, std::size_t arms, double alpha, Step segment_length) {
    if (!(window > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("w and alpha must be positive");
    const double f = exploration_factor(arms, alpha);
    const double s = static_cast<double>(segment_length);
    return static_cast<Step>(std::ceil(window * f * std::sqrt(s + 1.0) + window * window / 4.0 * f * f));
}

Step glr_delay_bound(double beta, double change_gap, std::size_t arms, double alpha,
                     Step segment_length) {
    if (!(change_gap > 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("change gap and alpha must be positive");
    const double f = exploration_factor(arms, alpha);
    const double n = 4.0 / (change_gap * change_gap) * beta + 2.0;
    const double s = static_cast<double>(segment_length);
    return static_cast<Step>(std::ceil(2.0 * n * f * std::sqrt(s + 1.0) + n * n * f * f));
}

AssumptionReport validate_assumptions(const Scenario& s, double delta, double alpha, double window) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(window > 0.0)) throw std::invalid_argument("window must be positive");

    AssumptionReport r;
    r.delta = delta;
    const auto gaps = gap_profile(s);
    const auto& segs = s.segments();
    const std::size_t m = segs.size();
    const std::size_t k = s.arms();
    const Step horizon = s.horizon();

    if (!gaps.change_gaps.empty())
        r.true_min_change_gap = *std::min_element(gaps.change_gaps.begin(), gaps.change_gaps.end());
    r.gap_lower_bound_ok = gaps.change_gaps.empty() || delta <= r.true_min_change_gap;
    if (!r.gap_lower_bound_ok) {
        std::ostringstream msg;
        msg << "gap lower bound: delta = " << delta << " exceeds the smallest change gap "
            << r.true_min_change_gap;
        r.violations.push_back(msg.str());
    }

    r.glr_beta = horizon >= 2 ? glr_threshold_theoretical(horizon) : 0.0;
    r.mucb_delays.push_back(0);
    r.glr_delays.push_back(0);
    for (std::size_t i = 1; i < m; ++i) {
        const Step len = segs[i - 1].length;
        r.mucb_delays.push_back(mucb_delay_bound(window, k, alpha, len));
        r.glr_delays.push_back(glr_delay_bound(r.glr_beta, gaps.change_gaps[i - 1], k, alpha, len));
    }

    const double kt = static_cast<double>(k) * static_cast<double>(horizon);
    const double growth = std::log(kt) + std::sqrt(static_cast<double>(k) * std::log(kt));
    r.segment_growth_ok = true;
    for (std::size_t i = 1; i < m; ++i) {
        const double need = growth * std::sqrt(static_cast<double>(segs[i - 1].length));
        if (static_cast<double>(segs[i].length) < need) {
            r.segment_growth_ok = false;
            std::ostringstream msg;
            msg << "segment growth: s_" << i + 1 << " = " << segs[i].length << " < "
                << std::ceil(need) << " = (ln KT + sqrt(K ln KT)) sqrt(s_" << i << ")";
            r.violations.push_back(msg.str());
        }
    }

    r.segment_length_ok = true;
    for (std::size_t i = 1; i <= m; ++i) {
        const Step h_prev = r.glr_delays[i - 1];
        const Step h_here = i < m ? r.glr_delays[i] : 0;
        const Step need = 2 * std::max(h_prev, h_here);
        if (segs[i - 1].length < need) {
            r.segment_length_ok = false;
            std::ostringstream msg;
            msg << "segment length: s_" << i << " = " << segs[i - 1].length
                << " < 2 max(h_" << i << ", h_" << i - 1 << ") = " << need;
            r.violations.push_back(msg.str());
        }
    }
    return r;
}

std::string format_report(const AssumptionReport& r) {
    std::ostringstream out;
    out << "delta (supplied)            " << r.delta << "\n";
    out << "min change gap (scenario)   " << r.true_min_change_gap << "\n";
    out << "GLR beta(T)                 " << r.glr_beta << "\n";
    out << "M-UCB delays h_i            ";
    for (auto h : r.mucb_delays) out << h << ' ';
    out << "\nGLR delays h_i              ";
    for (auto h : r.glr_delays) out << h << ' ';
    out << "\n";
    auto flag = [](bool ok) { return ok ? "ok" : "VIOLATED"; };
    out << "gap lower bound             " << flag(r.gap_lower_bound_ok) << "\n";
    out << "segment growth              " << flag(r.segment_growth_ok) << "\n";
    out << "segment length vs delays    " << flag(r.segment_length_ok) << "\n";
    for (const auto& v : r.violations) out << "  - " << v << "\n";
    return out.str();
}

}  // namespace shiftbandit
