#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "shiftbandit/builtin.hpp"
#include "shiftbandit/cli.hpp"
#include "shiftbandit/detectors.hpp"
#include "shiftbandit/explore.hpp"
#include "shiftbandit/harness.hpp"
#include "shiftbandit/policies.hpp"
#include "shiftbandit/scenario.hpp"

namespace py = pybind11;
using namespace shiftbandit;

namespace {

Scenario make_scenario(std::size_t arms, const std::vector<std::pair<Step, std::vector<double>>>& segs,
                       const std::string& kind) {
    std::vector<Segment> out;
    for (const auto& [length, means] : segs) out.push_back({length, means});
    return Scenario::from_segments(arms, std::move(out), reward_kind_from_string(kind));
}

PolicySpec make_spec(const std::string& name, const py::kwargs& kw) {
    PolicySpec s;
    s.name = name;
    for (const auto& [key, value] : kw) {
        const auto k = key.cast<std::string>();
        if (k == "alpha") s.alpha = value.cast<double>();
        else if (k == "w") s.window = value.cast<std::int64_t>();
        else if (k == "b") s.threshold = value.cast<double>();
        else if (k == "delta") s.delta = value.cast<double>();
        else if (k == "eta") s.eta = value.cast<double>();
        else if (k == "n_ignore") s.n_ignore = value.cast<std::int64_t>();
        else if (k == "gamma") s.gamma = value.cast<double>();
        else if (k == "glr_mode") s.glr_mode = value.cast<std::string>() == "theoretical" ? GlrMode::theoretical : GlrMode::practical;
        else if (k == "glr_confidence") s.glr_confidence = value.cast<double>();
        else if (k == "glr_every") s.glr_every = value.cast<std::int64_t>();
        else if (k == "cusum_drift") s.cusum_drift = value.cast<double>();
        else if (k == "cusum_warmup") s.cusum_warmup = value.cast<std::int64_t>();
        else if (k == "cusum_threshold") s.cusum_threshold = value.cast<double>();
        else if (k == "discount") s.discount = value.cast<double>();
        else if (k == "sw_window") s.sliding_window = value.cast<std::int64_t>();
        else throw py::key_error("unknown policy parameter: " + k);
    }
    return s;
}

py::dict event_dict(const Event& e) {
    py::dict d;
    d["t"] = e.t;
    d["kind"] = to_string(e.kind);
    d["arm"] = e.arm + 1;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Piecewise-stationary bandit policies, change detectors and regret harness";

    py::class_<Scenario, std::shared_ptr<Scenario>>(m, "Scenario")
        .def(py::init(&make_scenario), py::arg("arms"), py::arg("segments"), py::arg("kind") = "bernoulli",
             "Segments are (length, means) pairs.")
        .def_static("builtin",
                    [](const std::string& name, std::optional<Step> horizon, std::optional<std::size_t> segments,
                       std::optional<std::size_t> arms, std::uint64_t instance_seed) {
                        return builtin_scenario(name, {horizon, segments, arms, instance_seed});
                    },
                    py::arg("name"), py::arg("T") = py::none(), py::arg("M") = py::none(),
                    py::arg("K") = py::none(), py::arg("instance_seed") = 0)
        .def_static("from_json", &scenario_from_json)
        .def("to_json", &scenario_to_json)
        .def_property_readonly("arms", &Scenario::arms)
        .def_property_readonly("horizon", &Scenario::horizon)
        .def_property_readonly("M", &Scenario::segment_count)
        .def_property_readonly("S", &Scenario::super_segment_count)
        .def("change_points", &Scenario::change_points)
        .def("mean", [](const Scenario& s, Step t, Arm k) { return s.mean(t, k - 1); }, py::arg("t"),
             py::arg("arm"));

    m.attr("builtin_names") = builtin_names();
    m.attr("policy_names") = policy_names();

    m.def("initial_u", &initial_u, py::arg("K"), py::arg("alpha"));
    m.def("next_u", &next_u, py::arg("u"), py::arg("K"), py::arg("alpha"));
    m.def("exploration_starts",
          [](std::size_t arms, double alpha, Step horizon) {
              ExplorationSchedule s(arms, alpha);
              std::vector<Step> starts;
              for (Step t = 1; t <= horizon; ++t) {
                  const auto a = s.forced_arm(t, 0);
                  if (a && *a == 0) starts.push_back(t);
              }
              return starts;
          },
          py::arg("K"), py::arg("alpha"), py::arg("T"), "Start times of forced sessions without restarts.");

    m.def("mucb_stat", [](const std::vector<double>& w) { return mucb_stat(w); });
    m.def("mucb_window", &mucb_window, py::arg("delta"), py::arg("K"), py::arg("T"));
    m.def("mucb_threshold", &mucb_threshold, py::arg("w"), py::arg("K"), py::arg("T"));
    m.def("bernoulli_kl", &bernoulli_kl);
    m.def("glr_stat", [](const std::vector<double>& x) {
        const auto r = glr_stat(x);
        return py::make_tuple(r.statistic, r.split);
    });
    m.def("glr_beta", &glr_beta, py::arg("n"), py::arg("eps"));

    m.def("validate",
          [](const Scenario& s, double delta, double alpha, double w) {
              const auto r = validate_assumptions(s, delta, alpha, w);
              py::dict d;
              d["delta"] = r.delta;
              d["true_min_change_gap"] = r.true_min_change_gap;
              d["mucb_delays"] = r.mucb_delays;
              d["glr_delays"] = r.glr_delays;
              d["gap_lower_bound_ok"] = r.gap_lower_bound_ok;
              d["segment_growth_ok"] = r.segment_growth_ok;
              d["segment_length_ok"] = r.segment_length_ok;
              d["violations"] = r.violations;
              d["report"] = format_report(r);
              return d;
          },
          py::arg("scenario"), py::arg("delta"), py::arg("alpha") = 1.0, py::arg("w") = 200.0);

    m.def("dynamic_regret",
          [](const Scenario& s, const std::vector<Arm>& actions) {
              std::vector<Arm> zero_based;
              for (Arm a : actions) zero_based.push_back(a - 1);
              return dynamic_regret_trace(s, zero_based);
          },
          py::arg("scenario"), py::arg("actions"), "Cumulative dynamic regret; actions are 1-based.");

    m.def("run",
          [](const Scenario& s, const std::string& policy, std::size_t reps, std::uint64_t seed,
             std::size_t threads, const py::kwargs& kw) {
              RunSpec spec{std::make_shared<const Scenario>(s), make_spec(policy, kw), reps, seed, threads, false};
              Batch b;
              {
                  py::gil_scoped_release release;
                  b = run_many(spec);
              }
              py::dict d;
              d["policy"] = policy;
              d["mean_regret"] = b.summary.mean_regret;
              d["stderr"] = b.summary.stderr_regret;
              d["final_mean"] = b.summary.final_mean;
              d["final_stderr"] = b.summary.final_stderr;
              d["mean_seconds"] = b.summary.mean_seconds;
              py::list finals, events;
              for (const auto& r : b.runs) {
                  finals.append(r.final_regret());
                  py::list ev;
                  for (const auto& e : r.events) ev.append(event_dict(e));
                  events.append(ev);
              }
              d["final_regrets"] = finals;
              d["events"] = events;
              return d;
          },
          py::arg("scenario"), py::arg("policy"), py::arg("reps") = 100, py::arg("seed") = 0,
          py::arg("threads") = 1);

    m.def("cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out, err;
              const int code = run_cli(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr).");
}
