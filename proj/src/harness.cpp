#include "shiftbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace shiftbandit {

std::vector<double> dynamic_regret_trace(const Scenario& s, std::span<const Arm> actions) {
    if (static_cast<Step>(actions.size()) != s.horizon())
        throw std::invalid_argument("action trace length " + std::to_string(actions.size()) +
                                    " differs from the horizon " + std::to_string(s.horizon()));
    std::vector<double> out(actions.size());
    double total = 0.0;
    Step t = 0;
    for (const auto& seg : s.segments()) {
        const double best = *std::max_element(seg.means.begin(), seg.means.end());
        for (Step i = 0; i < seg.length; ++i, ++t) {
            const Arm a = actions[static_cast<std::size_t>(t)];
            if (a >= s.arms()) throw std::out_of_range("action out of range at t = " + std::to_string(t + 1));
            total += best - seg.means[a];
            out[static_cast<std::size_t>(t)] = total;
        }
    }
    return out;
}

std::size_t RunResult::count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [kind](const Event& e) { return e.kind == kind; }));
}

RunResult run_once(const RunSpec& spec, std::size_t replication) {
    if (!spec.scenario) throw std::invalid_argument("run spec has no scenario");
    const Scenario& env = *spec.scenario;
    RunResult r;
    r.replication = replication;
    r.seed = derive_seed(spec.master_seed, replication);

    auto policy = make_policy(spec.policy, env);
    Rng rng(r.seed);
    const Step horizon = env.horizon();
    std::vector<Arm> actions(static_cast<std::size_t>(horizon));
    std::vector<double> rewards;
    if (spec.keep_actions) rewards.resize(actions.size());

    const auto start = std::chrono::steady_clock::now();
    for (Step t = 1; t <= horizon; ++t) {
        const Arm a = policy->select(t);
        const double x = sample_reward(env, t, a, rng);
        policy->update(t, a, x);
        actions[static_cast<std::size_t>(t - 1)] = a;
        if (spec.keep_actions) rewards[static_cast<std::size_t>(t - 1)] = x;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    r.cum_regret = dynamic_regret_trace(env, actions);
    r.events = policy->events();
    if (spec.keep_actions) {
        r.actions = std::move(actions);
        r.rewards = std::move(rewards);
    }
    return r;
}

Aggregate aggregate(const std::string& policy, std::span<const RunResult> results) {
    if (results.empty()) throw std::invalid_argument("cannot aggregate zero runs");
    Aggregate a;
    a.policy = policy;
    a.replications = results.size();
    const std::size_t steps = results.front().cum_regret.size();
    a.mean_regret.assign(steps, 0.0);
    a.stderr_regret.assign(steps, 0.0);
    const double n = static_cast<double>(results.size());
    for (const auto& r : results) {
        if (r.cum_regret.size() != steps) throw std::invalid_argument("runs differ in length");
        for (std::size_t i = 0; i < steps; ++i) a.mean_regret[i] += r.cum_regret[i];
        a.mean_seconds += r.seconds;
    }
    for (auto& m : a.mean_regret) m /= n;
    a.mean_seconds /= n;
    if (results.size() > 1) {
        for (const auto& r : results)
            for (std::size_t i = 0; i < steps; ++i) {
                const double d = r.cum_regret[i] - a.mean_regret[i];
                a.stderr_regret[i] += d * d;
            }
        for (auto& s : a.stderr_regret) s = std::sqrt(s / (n - 1.0) / n);
    }
    if (steps > 0) {
        a.final_mean = a.mean_regret.back();
        a.final_stderr = a.stderr_regret.back();
    }
    return a;
}

Batch run_many(const RunSpec& spec) {
    if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");
    Batch b;
    b.runs.resize(spec.replications);
    const std::size_t workers = std::max<std::size_t>(1, std::min(spec.threads, spec.replications));
    if (workers == 1) {
        for (std::size_t i = 0; i < spec.replications; ++i) b.runs[i] = run_once(spec, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < spec.replications; i = next++) {
                    try {
                        b.runs[i] = run_once(spec, i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    b.summary = aggregate(spec.policy.name, b.runs);
    return b;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ExportFormat export_format_from_string(const std::string& name) {
    if (name == "csv") return ExportFormat::csv;
    if (name == "json") return ExportFormat::json;
    throw std::invalid_argument("unknown export format: " + name);
}

namespace {

void check_nonempty(std::span<const PolicyResults> results) {
    if (results.empty()) throw std::invalid_argument("nothing to export");
    for (const auto& p : results) {
        if (!p.batch || p.batch->runs.empty()) throw std::invalid_argument("nothing to export");
        if (p.batch->runs.front().cum_regret.empty())
            throw std::invalid_argument("cannot export an empty step range");
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

void json_array(std::ostream& out, std::span<const double> values) {
    out << '[';
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_number(values[i]);
    out << ']';
}

}  // namespace

std::string runs_csv(std::span<const PolicyResults> results) {
    check_nonempty(results);
    std::ostringstream out;
    out << "step,policy,replication,cum_regret\n";
    for (const auto& p : results)
        for (const auto& r : p.batch->runs)
            for (std::size_t i = 0; i < r.cum_regret.size(); ++i)
                out << i + 1 << ',' << p.policy << ',' << r.replication << ','
                    << format_number(r.cum_regret[i]) << '\n';
    return out.str();
}

std::string aggregate_csv(std::span<const PolicyResults> results) {
    check_nonempty(results);
    std::ostringstream out;
    out << "step,policy,mean_regret,stderr\n";
    for (const auto& p : results) {
        const auto& a = p.batch->summary;
        for (std::size_t i = 0; i < a.mean_regret.size(); ++i)
            out << i + 1 << ',' << p.policy << ',' << format_number(a.mean_regret[i]) << ','
                << format_number(a.stderr_regret[i]) << '\n';
    }
    return out.str();
}

std::string events_csv(std::span<const PolicyResults> results) {
    check_nonempty(results);
    std::ostringstream out;
    out << "replication,t,kind,policy,arm\n";
    for (const auto& p : results)
        for (const auto& r : p.batch->runs)
            for (const auto& e : r.events)
                out << r.replication << ',' << e.t << ',' << to_string(e.kind) << ',' << p.policy
                    << ',' << e.arm + 1 << '\n';
    return out.str();
}

std::string results_json(std::span<const PolicyResults> results) {
    check_nonempty(results);
    std::ostringstream out;
    out << "{\n\"runs\": [";
    bool first = true;
    for (const auto& p : results)
        for (const auto& r : p.batch->runs) {
            out << (first ? "\n" : ",\n") << "{\"policy\": " << json_string(p.policy)
                << ", \"replication\": " << r.replication << ", \"seed\": " << r.seed
                << ", \"cum_regret\": ";
            json_array(out, r.cum_regret);
            out << '}';
            first = false;
        }
    out << "\n],\n\"aggregate\": [";
    first = true;
    for (const auto& p : results) {
        out << (first ? "\n" : ",\n") << "{\"policy\": " << json_string(p.policy)
            << ", \"replications\": " << p.batch->summary.replications << ", \"mean_regret\": ";
        json_array(out, p.batch->summary.mean_regret);
        out << ", \"stderr\": ";
        json_array(out, p.batch->summary.stderr_regret);
        out << '}';
        first = false;
    }
    out << "\n],\n\"events\": [";
    first = true;
    for (const auto& p : results)
        for (const auto& r : p.batch->runs)
            for (const auto& e : r.events) {
                out << (first ? "\n" : ",\n") << "{\"policy\": " << json_string(p.policy)
                    << ", \"replication\": " << r.replication << ", \"t\": " << e.t
                    << ", \"kind\": " << json_string(to_string(e.kind)) << ", \"arm\": " << e.arm + 1
                    << '}';
                first = false;
            }
    out << "\n]\n}\n";
    return out.str();
}

std::vector<std::filesystem::path> export_results(std::span<const PolicyResults> results,
                                                  ExportFormat format,
                                                  const std::filesystem::path& dir) {
    check_nonempty(results);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    if (format == ExportFormat::json) {
        written.push_back(dir / "results.json");
        write_file(written.back(), results_json(results));
        return written;
    }
    written = {dir / "runs.csv", dir / "aggregate.csv", dir / "events.csv"};
    write_file(written[0], runs_csv(results));
    write_file(written[1], aggregate_csv(results));
    write_file(written[2], events_csv(results));
    return written;
}

std::vector<ParsedRun> parse_runs_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "step,policy,replication,cum_regret")
        throw std::invalid_argument("not a runs CSV");
    std::vector<ParsedRun> out;
    std::map<std::pair<std::string, std::size_t>, std::size_t> where;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string step, policy, rep, value;
        if (!std::getline(row, step, ',') || !std::getline(row, policy, ',') ||
            !std::getline(row, rep, ',') || !std::getline(row, value))
            throw std::invalid_argument("malformed runs CSV row: " + line);
        const auto key = std::make_pair(policy, static_cast<std::size_t>(std::stoull(rep)));
        auto [it, inserted] = where.emplace(key, out.size());
        if (inserted) out.push_back({policy, key.second, {}});
        out[it->second].cum_regret.push_back(std::strtod(value.c_str(), nullptr));
    }
    return out;
}

}  // namespace shiftbandit
