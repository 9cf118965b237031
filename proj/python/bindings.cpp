#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgeplan/energy_enhancer.hpp"
#include "edgeplan/failure_enhancer.hpp"
#include "edgeplan/harmonizer.hpp"
#include "edgeplan/simulator.hpp"
#include "edgeplan/solver.hpp"
#include "edgeplan/spec_io.hpp"

namespace py = pybind11;
using namespace edgeplan;

namespace {

std::vector<std::string> Texts(const std::vector<SoftConstraint>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(FormatConstraint(c));
  return out;
}

PlacementProblem BuildProblem(const std::string& app, const std::string& infra, const std::string& previous,
                              const std::string& objective, double round_hours) {
  PlacementProblem p;
  p.app = ParseApplication(app);
  p.infra = ParseInfrastructure(infra);
  p.round_hours = round_hours;
  if (!previous.empty()) p.previous = ParseDeployment(previous);
  if (objective == "redeploy") {
    if (!p.previous) throw InputError("objective 'redeploy' needs a previous deployment");
    p.objective_mode = ObjectiveMode::kMinimizeChanges;
  } else if (objective != "first") {
    throw InputError("objective must be 'first' or 'redeploy'");
  }
  return p;
}

py::dict OutcomeDict(const SolveOutcome& o, const PlacementProblem& p) {
  py::dict d;
  d["status"] = std::string(ToString(o.status));
  d["objective"] = o.ObjectiveFor(p.objective_mode);
  d["importance"] = o.value.importance;
  d["kept"] = o.value.kept;
  d["deployment"] = o.deployment ? py::cast(EmitDeployment(*o.deployment)) : py::none();
  d["changes"] = (o.deployment && p.previous) ? py::cast(CountChanges(*p.previous, *o.deployment)) : py::none();
  return d;
}

py::dict MetricsDict(const RoundMetrics& m) {
  py::dict d;
  d["downtime_pct"] = m.downtime_pct;
  d["app_quality_pct"] = m.app_quality_pct;
  d["energy_kwh"] = m.energy_kwh;
  d["co2_g"] = m.co2_g;
  d["changes"] = m.changes;
  return d;
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot read " + p.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

PYBIND11_MODULE(_edgeplan, m) {
  m.doc() = "Deployment planning, simulation and constraint enhancement.";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  m.def(
      "solve",
      [](const std::string& app, const std::string& infra, const std::string& constraints,
         const std::string& previous, const std::string& objective, double time_limit, int max_drop,
         double round_hours) {
        PlacementProblem p = BuildProblem(app, infra, previous, objective, round_hours);
        const auto soft = ParseConstraints(constraints);
        RelaxationResult rr;
        {
          py::gil_scoped_release release;
          rr = SolveWithRelaxation(p, soft, Seconds(time_limit), max_drop);
        }
        py::dict d = OutcomeDict(rr.outcome, p);
        d["relaxed"] = Texts(rr.dropped);
        d["attempts"] = rr.attempts;
        return d;
      },
      py::arg("app"), py::arg("infra"), py::arg("constraints") = "", py::arg("previous") = "",
      py::arg("objective") = "first", py::arg("time_limit") = 300.0, py::arg("max_drop") = -1,
      py::arg("round_hours") = 2.0,
      "Optimal deployment for YAML specs, relaxing soft constraints when infeasible.");

  m.def(
      "oracle",
      [](const std::string& app, const std::string& infra, const std::string& constraints,
         const std::string& previous, const std::string& objective, double max_candidates) {
        PlacementProblem p = BuildProblem(app, infra, previous, objective, 2.0);
        p.enforced = ParseConstraints(constraints);
        SolveOutcome o;
        {
          py::gil_scoped_release release;
          o = BruteForceOracle(p, max_candidates);
        }
        py::dict d = OutcomeDict(o, p);
        d["candidates"] = o.explored;
        return d;
      },
      py::arg("app"), py::arg("infra"), py::arg("constraints") = "", py::arg("previous") = "",
      py::arg("objective") = "first", py::arg("max_candidates") = 1e7,
      "Exhaustive reference solve with every constraint enforced.");

  m.def(
      "verify",
      [](const std::string& deployment, const std::string& app, const std::string& infra,
         const std::string& constraints) {
        PlacementProblem p = BuildProblem(app, infra, "", "first", 2.0);
        p.enforced = ParseConstraints(constraints);
        return VerifyDeployment(ParseDeployment(deployment), p);
      },
      py::arg("deployment"), py::arg("app"), py::arg("infra"), py::arg("constraints") = "",
      "Violations of a deployment, one string per violated condition.");

  m.def(
      "parse_constraints",
      [](const std::string& text) {
        py::list out;
        for (const auto& c : ParseConstraints(text)) {
          py::dict d;
          d["kind"] = std::string(ToString(c.kind));
          d["component"] = c.component;
          d["flavour"] = c.flavour;
          if (c.IsPairwise()) {
            d["other_component"] = c.other_component;
            d["other_flavour"] = c.other_flavour;
          } else {
            d["node"] = c.node;
          }
          d["provenance"] = std::string(ToString(c.provenance));
          d["weight"] = c.weight;
          d["text"] = FormatConstraint(c);
          out.append(d);
        }
        return out;
      },
      py::arg("text"));

  m.def("normalize_application", [](const std::string& yaml) { return EmitApplication(ParseApplication(yaml)); },
        py::arg("yaml"));
  m.def("normalize_infrastructure",
        [](const std::string& yaml) { return EmitInfrastructure(ParseInfrastructure(yaml)); }, py::arg("yaml"));

  m.def(
      "parse_log",
      [](const std::string& log, const std::string& app) {
        std::optional<ApplicationSpec> spec;
        if (!app.empty()) spec = ParseApplication(app);
        return EmitFacts(ParseSimulationLog(log, spec ? &*spec : nullptr));
      },
      py::arg("log"), py::arg("app") = "", "Fact listing extracted from a simulation log.");

  m.def(
      "failure_constraints",
      [](const std::string& log, const std::string& app) {
        std::optional<ApplicationSpec> spec;
        if (!app.empty()) spec = ParseApplication(app);
        const auto set = SuggestFailureConstraints(ParseSimulationLog(log, spec ? &*spec : nullptr));
        return Texts({set.begin(), set.end()});
      },
      py::arg("log"), py::arg("app") = "");

  m.def(
      "energy_constraints",
      [](const std::string& log, const std::string& app_yaml, const std::string& infra_yaml,
         const std::string& kb_json, double service_g, double connection_g, std::size_t top_k,
         int carbon_window) {
        const ApplicationSpec app = ParseApplication(app_yaml);
        const InfrastructureSpec infra = ParseInfrastructure(infra_yaml);
        const SimulationRecord record = ParseSimulationRecord(log, &app);
        KnowledgeBase kb = KnowledgeBase::FromJson(kb_json);
        EnergyThresholds th{service_g, connection_g, top_k, record.power.ticks * record.power.TickHours(),
                            carbon_window};
        Deployment current;
        for (const auto& d : record.facts.deployed) current.assignments[d.component] = {d.flavour, d.node};
        const auto er = RunEnergyEnhancer(kb, record, app, WithoutDisconnectedNodes(infra, record.facts), current,
                                          th);
        py::dict d;
        d["constraints"] = Texts(er.constraints);
        d["kb"] = kb.ToJson();
        return d;
      },
      py::arg("log"), py::arg("app"), py::arg("infra"), py::arg("kb") = "", py::arg("service_g") = 30.0,
      py::arg("connection_g") = 30.0, py::arg("top_k") = 10, py::arg("carbon_window") = 120,
      "Energy constraints for the next round plus the updated knowledge base JSON.");

  m.def(
      "harmonize",
      [](const std::string& failure, const std::string& energy, const std::string& priority) {
        const auto p = ParsePriority(priority);
        if (!p) throw InputError("priority must be failure, energy or none");
        const auto h = Harmonize(ParseConstraints(failure, Provenance::kFailure),
                                 ParseConstraints(energy, Provenance::kEnergy), *p);
        py::list dropped;
        for (const auto& x : h.dropped) dropped.append(py::make_tuple(FormatConstraint(x.constraint), x.reason));
        py::dict d;
        d["kept"] = Texts(h.kept);
        d["dropped"] = dropped;
        return d;
      },
      py::arg("failure"), py::arg("energy"), py::arg("priority") = "failure");

  m.def(
      "simulate",
      [](const std::string& deployment, const std::string& app_yaml, const std::string& infra_yaml, int ticks,
         double tick_minutes, std::uint64_t seed, const std::string& previous) {
        const ApplicationSpec app = ParseApplication(app_yaml);
        const InfrastructureSpec infra = ParseInfrastructure(infra_yaml);
        std::optional<Deployment> prev;
        if (!previous.empty()) prev = ParseDeployment(previous);
        const auto trace =
            RunRound(ParseDeployment(deployment), app, infra, {}, RoundOptions{ticks, tick_minutes, seed},
                     prev ? &*prev : nullptr);
        py::dict d = MetricsDict(trace.metrics);
        d["log"] = EmitSimulationLog(trace, app);
        return d;
      },
      py::arg("deployment"), py::arg("app"), py::arg("infra"), py::arg("ticks") = 120,
      py::arg("tick_minutes") = 1.0, py::arg("seed") = 0, py::arg("previous") = "",
      "Simulates one quiescent round; scenarios come from campaign configs.");

  m.def(
      "run_campaign",
      [](const std::string& config_path, const std::string& out_dir) {
        const std::filesystem::path cp(config_path);
        const CampaignConfig cfg = ParseCampaignConfig(ReadFile(cp), cp.parent_path());
        const ApplicationSpec app = ParseApplication(ReadFile(cfg.application_path));
        const InfrastructureSpec infra = ParseInfrastructure(ReadFile(cfg.infrastructure_path));
        CampaignResult result;
        {
          py::gil_scoped_release release;
          result = RunCampaign(cfg, app, infra);
          if (!out_dir.empty()) WriteCampaignArtifacts(result, out_dir);
        }
        py::dict modes;
        for (const auto& mr : result.modes) {
          py::list rounds;
          for (const auto& r : mr.rounds) {
            py::dict rd = MetricsDict(r.trace.metrics);
            rd["deployment"] = EmitDeployment(r.trace.deployment);
            rounds.append(rd);
          }
          modes[py::str(std::string(ToString(mr.mode)))] = rounds;
        }
        py::dict d;
        d["metrics_csv"] = result.MetricsCsv();
        d["summary"] = result.Summary();
        d["modes"] = modes;
        return d;
      },
      py::arg("config"), py::arg("out_dir") = "", "Runs every configured mode of a campaign YAML file.");
}
