#include "shiftbandit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "shiftbandit/builtin.hpp"
#include "shiftbandit/detectors.hpp"
#include "shiftbandit/harness.hpp"
#include "shiftbandit/policies.hpp"
#include "shiftbandit/rng.hpp"
#include "shiftbandit/scenario.hpp"

#ifndef SHIFTBANDIT_VERSION
#define SHIFTBANDIT_VERSION "0.0.0"
#endif

namespace shiftbandit {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioFlags {
    std::string name;
    std::optional<Step> horizon;
    std::optional<std::size_t> segments;
    std::optional<std::size_t> arms;
    std::uint64_t instance_seed = 0;
    std::optional<Step> segment_length;
    double scale = 1.0;
};

struct PolicyFlags {
    std::vector<std::string> names;
    PolicySpec spec;
    std::string glr_mode = "practical";
};

struct RunFlags {
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::string out = "shiftbandit-out";
    std::string format = "csv";
    std::size_t threads = 1;
};

struct Flags {
    ScenarioFlags scenario;
    PolicyFlags policy;
    RunFlags run;
    // sweep
    std::string param;
    std::vector<double> values;
    std::size_t instances = 5;
    // trace
    std::string events_out;
    std::string config;
    // validate
    std::optional<double> delta;
    std::optional<double> window;
    double alpha = 1.0;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

const CLI::Validator policy_list = CLI::Validator(
    [](std::string& value) -> std::string {
        const auto names = split_list(value);
        if (names.empty()) return "empty policy list";
        for (const auto& n : names)
            if (!is_known_policy(n)) return "unknown policy '" + n + "'";
        return {};
    },
    "POLICY[,POLICY...]");

void add_scenario_options(CLI::App* app, ScenarioFlags& f, bool required) {
    std::string builtins;
    for (const auto& b : builtin_names()) builtins += (builtins.empty() ? "" : ", ") + b;
    auto* opt = app->add_option("--scenario", f.name,
                                "Builtin name (" + builtins + ") or a .json / .csv file");
    if (required) opt->required();
    app->add_option("--T", f.horizon, "Horizon for builtin scenarios")->check(CLI::PositiveNumber);
    app->add_option("--M", f.segments, "Segment count for builtin scenarios")->check(CLI::PositiveNumber);
    app->add_option("--K", f.arms, "Arm count for builtin scenarios")->check(CLI::Range(2, 1000000));
    app->add_option("--instance-seed", f.instance_seed, "Seed of the random builtin scenario")
        ->capture_default_str();
    app->add_option("--segment-length", f.segment_length,
                    "Segment length for CSV traces without a length column")
        ->check(CLI::PositiveNumber);
    app->add_option("--scale", f.scale, "Multiplier applied to CSV trace means")->capture_default_str();
}

void add_policy_options(CLI::App* app, PolicyFlags& f, bool single) {
    std::string names;
    for (const auto& n : policy_names()) names += (names.empty() ? "" : ", ") + n;
    app->add_option("--policy", f.names, (single ? "Policy: " : "Comma-separated policies: ") + names)
        ->required()
        ->delimiter(',')
        ->check(policy_list);
    auto& s = f.spec;
    app->add_option("--alpha", s.alpha, "Diminishing exploration constant")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--w", s.window, "M-UCB window (default 200, or derived from --delta)")
        ->check(CLI::PositiveNumber);
    app->add_option("--b", s.threshold, "M-UCB threshold (default from w, K, T)");
    app->add_option("--delta", s.delta, "Change-size lower bound used to derive w")
        ->check(CLI::PositiveNumber);
    app->add_option("--eta", s.eta, "Skipping margin")->capture_default_str();
    app->add_option("--n-ignore", s.n_ignore, "Skipping sample threshold N_I")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--gamma", s.gamma, "Uniform exploration rate (default sqrt(M K ln T / T))")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--glr-mode", f.glr_mode, "GLR threshold: theoretical or practical")
        ->capture_default_str()
        ->check(CLI::IsMember({"theoretical", "practical"}));
    app->add_option("--glr-confidence", s.glr_confidence, "GLR confidence (default 1/sqrt(T))")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--glr-every", s.glr_every, "Run the GLR test every n samples")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--cusum-drift", s.cusum_drift, "CUSUM drift")->capture_default_str();
    app->add_option("--cusum-warmup", s.cusum_warmup, "CUSUM warm-up samples")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--cusum-threshold", s.cusum_threshold, "CUSUM threshold (default ln(T/M - 1))");
    app->add_option("--discount", s.discount, "D-UCB discount (default 1 - sqrt(M/T)/4)")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--sw-window", s.sliding_window, "SW-UCB window (default 2 sqrt(T ln T / M))")
        ->check(CLI::PositiveNumber);
}

void add_run_options(CLI::App* app, RunFlags& f, bool with_reps) {
    if (with_reps)
        app->add_option("--reps", f.reps, "Replications")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--seed", f.seed, "Master seed")->capture_default_str();
    app->add_option("--threads", f.threads, "Worker threads")
        ->capture_default_str()
        ->envname("SHIFTBANDIT_THREADS")
        ->check(CLI::PositiveNumber);
}

void add_export_options(CLI::App* app, RunFlags& f) {
    app->add_option("--out", f.out, "Output directory")->capture_default_str();
    app->add_option("--format", f.format, "Export format: csv or json")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
}

void add_config_option(CLI::App* app, std::string& path) {
    app->add_option("--config", path, "JSON file of option values; command-line flags take precedence");
}

Scenario resolve_scenario(const ScenarioFlags& f, std::ostream& err) {
    if (is_builtin(f.name)) {
        try {
            return builtin_scenario(f.name, {f.horizon, f.segments, f.arms, f.instance_seed});
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    const fs::path path(f.name);
    const auto ext = path.extension().string();
    try {
        if (ext == ".json") return load_scenario_json(path);
        if (ext == ".csv") {
            auto loaded = load_trace_csv(path, f.scale, f.segment_length);
            for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";
            return std::move(loaded.scenario);
        }
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    throw UsageError("unknown scenario '" + f.name + "': not a builtin and not a .json/.csv file");
}

PolicySpec policy_spec(const PolicyFlags& f, const std::string& name) {
    PolicySpec s = f.spec;
    s.name = name;
    s.glr_mode = f.glr_mode == "theoretical" ? GlrMode::theoretical : GlrMode::practical;
    return s;
}

std::string fixed(double v, int digits = 3) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(digits) << v;
    return o.str();
}

void print_summary(std::ostream& out, const std::vector<PolicyResults>& rows) {
    out << std::left << std::setw(16) << "policy" << std::right << std::setw(14) << "final_regret"
        << std::setw(12) << "stderr" << std::setw(12) << "seconds" << std::setw(10) << "restarts" << "\n";
    for (const auto& r : rows) {
        const auto& a = r.batch->summary;
        double restarts = 0.0;
        for (const auto& run : r.batch->runs) restarts += static_cast<double>(run.count(EventKind::restart));
        restarts /= static_cast<double>(r.batch->runs.size());
        out << std::left << std::setw(16) << r.policy << std::right << std::setw(14) << fixed(a.final_mean)
            << std::setw(12) << fixed(a.final_stderr) << std::setw(12) << fixed(a.mean_seconds, 4)
            << std::setw(10) << fixed(restarts, 2) << "\n";
    }
}

int cmd_run(const Flags& f, std::ostream& out, std::ostream& err) {
    auto scenario = std::make_shared<const Scenario>(resolve_scenario(f.scenario, err));
    std::vector<Batch> batches;
    batches.reserve(f.policy.names.size());
    for (const auto& name : f.policy.names) {
        RunSpec spec{scenario, policy_spec(f.policy, name), f.run.reps, f.run.seed, f.run.threads, false};
        batches.push_back(run_many(spec));
    }
    std::vector<PolicyResults> rows;
    for (std::size_t i = 0; i < batches.size(); ++i) rows.push_back({f.policy.names[i], &batches[i]});
    const auto files = export_results(rows, export_format_from_string(f.run.format), f.run.out);
    out << "scenario: K=" << scenario->arms() << " T=" << scenario->horizon()
        << " M=" << scenario->segment_count() << " S=" << scenario->super_segment_count()
        << ", replications=" << f.run.reps << "\n";
    print_summary(out, rows);
    for (const auto& p : files) out << "wrote " << p.string() << "\n";
    return exit_ok;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err) {
    const bool k_sweep = f.param == "K";
    ScenarioFlags base = f.scenario;
    if (base.name.empty()) base.name = k_sweep ? "random" : "fig3a";
    if (!is_builtin(base.name)) throw UsageError("sweep needs a builtin scenario family");
    if (k_sweep && (base.name == "fig3a" || base.name == "fig5d" || base.name == "skip8"))
        throw UsageError("scenario '" + base.name + "' has a fixed arm count");
    if (f.param == "M" && (base.name == "skip8" || base.name == "stationary" || base.name == "single-change"))
        throw UsageError("scenario '" + base.name + "' has a fixed segment count");

    struct Row {
        double value;
        std::string policy;
        Aggregate summary;
    };
    std::vector<Row> rows;
    const std::size_t instances = k_sweep && base.name == "random" ? f.instances : 1;
    for (const double v : f.values) {
        if (v < 1 || v != std::floor(v)) throw UsageError("sweep values must be positive integers");
        ScenarioFlags sf = base;
        if (f.param == "T") sf.horizon = static_cast<Step>(v);
        if (f.param == "M") sf.segments = static_cast<std::size_t>(v);
        if (k_sweep) sf.arms = static_cast<std::size_t>(v);
        for (const auto& name : f.policy.names) {
            std::vector<RunResult> pooled;
            for (std::size_t i = 0; i < instances; ++i) {
                sf.instance_seed = base.instance_seed + i;
                auto scenario = std::make_shared<const Scenario>(resolve_scenario(sf, err));
                const std::uint64_t master = instances > 1 ? derive_seed(f.run.seed, i) : f.run.seed;
                RunSpec spec{scenario, policy_spec(f.policy, name), f.run.reps, master, f.run.threads, false};
                auto batch = run_many(spec);
                for (auto& r : batch.runs) pooled.push_back(std::move(r));
            }
            rows.push_back({v, name, aggregate(name, pooled)});
            const auto& a = rows.back().summary;
            out << f.param << "=" << v << " " << std::left << std::setw(16) << name << std::right
                << " final_regret=" << fixed(a.final_mean) << " stderr=" << fixed(a.final_stderr)
                << " seconds=" << fixed(a.mean_seconds, 4) << "\n";
        }
    }

    std::error_code ec;
    fs::create_directories(f.run.out, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + f.run.out + ": " + ec.message());
    const bool json = f.run.format == "json";
    const fs::path path = fs::path(f.run.out) / (json ? "sweep.json" : "sweep.csv");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
    if (json) {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& r : rows)
            doc.push_back({{"param", f.param},
                           {"value", r.value},
                           {"policy", r.policy},
                           {"final_mean_regret", r.summary.final_mean},
                           {"stderr", r.summary.final_stderr},
                           {"mean_seconds", r.summary.mean_seconds},
                           {"runs", r.summary.replications}});
        file << doc.dump(2) << "\n";
    } else {
        file << "param,value,policy,final_mean_regret,stderr,mean_seconds,runs\n";
        for (const auto& r : rows)
            file << f.param << ',' << format_number(r.value) << ',' << r.policy << ','
                 << format_number(r.summary.final_mean) << ',' << format_number(r.summary.final_stderr)
                 << ',' << format_number(r.summary.mean_seconds) << ',' << r.summary.replications << "\n";
    }
    if (!file) throw std::runtime_error("write failed for " + path.string());
    out << "wrote " << path.string() << "\n";
    return exit_ok;
}

int cmd_validate(const Flags& f, std::ostream& out, std::ostream& err) {
    const Scenario s = resolve_scenario(f.scenario, err);
    if (f.delta && *f.delta <= 0.0) throw UsageError("--delta must be positive");
    double window = 200.0;
    double delta = 0.0;
    if (f.window) {
        window = *f.window;
        delta = f.delta.value_or(mucb_delta_for_window(window, s.arms(), s.horizon()));
    } else if (f.delta) {
        delta = *f.delta;
        window = static_cast<double>(mucb_window(delta, s.arms(), s.horizon()));
    } else {
        delta = mucb_delta_for_window(window, s.arms(), s.horizon());
    }
    const auto report = validate_assumptions(s, delta, f.alpha, window);
    const auto gaps = gap_profile(s);
    out << "scenario: K=" << s.arms() << " T=" << s.horizon() << " M=" << s.segment_count()
        << " S=" << s.super_segment_count() << "\n";
    out << "window w                    " << window << "\n";
    if (gaps.min_positive_arm_change)
        out << "min per-arm change          " << *gaps.min_positive_arm_change << "\n";
    out << format_report(report);
    return exit_ok;
}

int cmd_trace(const Flags& f, const std::string& log_path, std::ostream& out, std::ostream& err) {
    if (f.run.reps != 1) throw UsageError("trace runs a single replication; --reps must be 1");
    if (f.policy.names.size() != 1) throw UsageError("trace takes exactly one policy");
    auto scenario = std::make_shared<const Scenario>(resolve_scenario(f.scenario, err));
    RunSpec spec{scenario, policy_spec(f.policy, f.policy.names.front()), 1, f.run.seed, 1, true};
    const RunResult r = run_once(spec, 0);

    std::ofstream file;
    if (!log_path.empty() && log_path != "-") {
        file.open(log_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + log_path + " for writing");
    }
    std::ostream& log = file.is_open() ? static_cast<std::ostream&>(file) : out;
    log << "t,action,reward,cum_regret,events\n";
    std::size_t e = 0;
    for (std::size_t i = 0; i < r.actions.size(); ++i) {
        const Step t = static_cast<Step>(i + 1);
        log << t << ',' << r.actions[i] + 1 << ',' << format_number(r.rewards[i]) << ','
            << format_number(r.cum_regret[i]) << ',';
        for (bool first = true; e < r.events.size() && r.events[e].t == t; ++e, first = false)
            log << (first ? "" : ";") << to_string(r.events[e].kind) << ':' << r.events[e].arm + 1;
        log << '\n';
    }
    if (!log) throw std::runtime_error("write failed for " + (log_path.empty() ? "stdout" : log_path));

    if (!f.events_out.empty()) {
        std::ofstream ev(f.events_out, std::ios::binary);
        if (!ev) throw std::runtime_error("cannot open " + f.events_out + " for writing");
        ev << "t,kind,arm\n";
        for (const auto& x : r.events) ev << x.t << ',' << to_string(x.kind) << ',' << x.arm + 1 << '\n';
        if (!ev) throw std::runtime_error("write failed for " + f.events_out);
    }
    if (file.is_open()) {
        out << "final regret " << fixed(r.final_regret()) << ", alarms " << r.count(EventKind::alarm)
            << ", skips " << r.count(EventKind::skip) << ", restarts " << r.count(EventKind::restart) << "\n";
    }
    return exit_ok;
}

// `--config file.json` is expanded in place into `--key value` tokens placed
// right after the subcommand, so explicit flags later on the line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& commands) {
    std::vector<std::string> config_tokens;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config requires a file");
            path = args[++i];
        } else if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
            continue;
        }
        std::ifstream in(path);
        if (!in) throw UsageError("cannot read config file " + path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const std::exception& e) {
            throw UsageError("config file " + path + ": " + e.what());
        }
        if (!doc.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
        for (const auto& [key, value] : doc.items()) {
            std::string name = key;
            while (name.starts_with("-")) name.erase(0, 1);
            std::string text;
            if (value.is_string()) {
                text = value.get<std::string>();
            } else if (value.is_array()) {
                for (const auto& v : value)
                    text += (text.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            } else if (value.is_number() || value.is_boolean()) {
                text = value.dump();
            } else {
                throw UsageError("config key '" + key + "' has an unsupported value");
            }
            config_tokens.push_back("--" + name);
            config_tokens.push_back(text);
        }
    }
    if (config_tokens.empty()) return rest;
    auto pos = std::find_if(rest.begin(), rest.end(), [&](const std::string& a) {
        return std::find(commands.begin(), commands.end(), a) != commands.end();
    });
    if (pos == rest.end()) throw UsageError("--config needs a subcommand");
    rest.insert(pos + 1, config_tokens.begin(), config_tokens.end());
    return rest;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Piecewise-stationary bandit experiments: change-detection UCB policies, "
                 "diminishing exploration and regret harness.",
                 "shiftbandit"};
    app.require_subcommand(1, 1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.get_formatter()->column_width(34);

    Flags f;
    std::string trace_log;

    auto* run = app.add_subcommand("run", "Run replications of one or more policies and export regret");
    add_scenario_options(run, f.scenario, true);
    add_policy_options(run, f.policy, false);
    add_run_options(run, f.run, true);
    add_export_options(run, f.run);
    add_config_option(run, f.config);

    auto* sweep = app.add_subcommand("sweep", "Final regret over a range of M, T or K");
    sweep->add_option("--param", f.param, "Swept parameter: M, T or K")
        ->required()
        ->check(CLI::IsMember({"M", "T", "K"}));
    sweep->add_option("--values", f.values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--instances", f.instances, "Random instances per value when sweeping K")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_scenario_options(sweep, f.scenario, false);
    add_policy_options(sweep, f.policy, false);
    add_run_options(sweep, f.run, true);
    add_export_options(sweep, f.run);
    add_config_option(sweep, f.config);

    auto* validate = app.add_subcommand("validate", "Report the detection-delay and segment-length conditions");
    add_scenario_options(validate, f.scenario, true);
    validate->add_option("--delta", f.delta, "Change-size lower bound (default: from --w)");
    validate->add_option("--w", f.window, "M-UCB window (default 200, or from --delta)")
        ->check(CLI::PositiveNumber);
    validate->add_option("--alpha", f.alpha, "Diminishing exploration constant")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_config_option(validate, f.config);

    auto* trace = app.add_subcommand("trace", "Per-step log of a single run");
    add_scenario_options(trace, f.scenario, true);
    add_policy_options(trace, f.policy, true);
    trace->add_option("--reps", f.run.reps, "Must be 1")->default_str("1");
    trace->add_option("--seed", f.run.seed, "Master seed")->capture_default_str();
    trace->add_option("--out", trace_log, "Step log file (default: standard output)");
    trace->add_option("--events-out", f.events_out, "Event log file");
    add_config_option(trace, f.config);

    app.add_subcommand("version", "Print the version");

    const std::vector<std::string> commands{"run", "sweep", "validate", "trace", "version"};
    try {
        auto expanded = expand_config(args, commands);
        std::reverse(expanded.begin(), expanded.end());
        app.parse(expanded);
        if (trace->parsed() && trace->count("--reps") == 0) f.run.reps = 1;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (run->parsed()) return cmd_run(f, out, err);
        if (sweep->parsed()) return cmd_sweep(f, out, err);
        if (validate->parsed()) return cmd_validate(f, out, err);
        if (trace->parsed()) return cmd_trace(f, trace_log, out, err);
        out << "shiftbandit " << SHIFTBANDIT_VERSION << "\n";
        return exit_ok;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}

}  // namespace shiftbandit
