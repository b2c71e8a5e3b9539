#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shiftbandit/policies.hpp"
#include "shiftbandit/scenario.hpp"

namespace shiftbandit {

/// Cumulative expected dynamic regret: step t adds max_k mu_{k,t} - mu_{A_t,t}.
std::vector<double> dynamic_regret_trace(const Scenario& s, std::span<const Arm> actions);

struct RunSpec {
    std::shared_ptr<const Scenario> scenario;
    PolicySpec policy;
    std::size_t replications = 100;
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
    bool keep_actions = false;  // retain per-step actions and rewards in each RunResult
};

struct RunResult {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    std::vector<double> cum_regret;
    std::vector<Event> events;
    double seconds = 0.0;  // step loop only
    std::vector<Arm> actions;
    std::vector<double> rewards;

    std::size_t count(EventKind kind) const;
    double final_regret() const { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
};

/// One replication; the random stream is seeded with derive_seed(master, index).
RunResult run_once(const RunSpec& spec, std::size_t replication);

struct Aggregate {
    std::string policy;
    std::vector<double> mean_regret;
    std::vector<double> stderr_regret;
    double final_mean = 0.0;
    double final_stderr = 0.0;
    double mean_seconds = 0.0;
    std::size_t replications = 0;
};

/// Mean and standard error per step over a set of results of equal length.
Aggregate aggregate(const std::string& policy, std::span<const RunResult> results);

struct Batch {
    std::vector<RunResult> runs;  // ordered by replication index
    Aggregate summary;
};

/// All replications of `spec`, serially or on `spec.threads` workers. The
/// output does not depend on the number of threads.
Batch run_many(const RunSpec& spec);

// ---------------------------------------------------------------------------
// Export. Numbers are written with 17 significant digits.

struct PolicyResults {
    std::string policy;
    const Batch* batch = nullptr;
};

enum class ExportFormat { csv, json };
ExportFormat export_format_from_string(const std::string& name);

/// Writes `runs`, `aggregate` and `events` files (CSV: runs.csv, aggregate.csv,
/// events.csv; JSON: results.json) under `dir`; returns the paths written.
std::vector<std::filesystem::path> export_results(std::span<const PolicyResults> results,
                                                  ExportFormat format,
                                                  const std::filesystem::path& dir);

/// Text of the individual CSV tables.
std::string runs_csv(std::span<const PolicyResults> results);
std::string aggregate_csv(std::span<const PolicyResults> results);
std::string events_csv(std::span<const PolicyResults> results);
std::string results_json(std::span<const PolicyResults> results);

std::string format_number(double v);

/// Parses a runs CSV back into (policy, replication) -> cumulative regret rows.
struct ParsedRun {
    std::string policy;
    std::size_t replication = 0;
    std::vector<double> cum_regret;
};
std::vector<ParsedRun> parse_runs_csv(const std::string& text);

}  // namespace shiftbandit
