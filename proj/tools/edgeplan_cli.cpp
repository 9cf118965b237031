// Command-line entry point: solve, enhance, harmonize, simulate, campaign, oracle.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "edgeplan/energy_enhancer.hpp"
#include "edgeplan/failure_enhancer.hpp"
#include "edgeplan/harmonizer.hpp"
#include "edgeplan/simulator.hpp"
#include "edgeplan/solver.hpp"
#include "edgeplan/spec_io.hpp"

namespace fs = std::filesystem;
using namespace edgeplan;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kUnsat = 2, kTimeout = 3 };

std::string ReadFile(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot read " + p.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void WriteFile(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  f << text;
}

struct ProblemArgs {
  std::string app, infra, constraints, previous;
  std::string objective = "first";
  double time_limit = 300.0;
  double round_hours = 2.0;
  int max_drop = -1;

  void Register(CLI::App* cmd) {
    cmd->add_option("--app", app, "application YAML")->required()->check(CLI::ExistingFile);
    cmd->add_option("--infra", infra, "infrastructure YAML")->required()->check(CLI::ExistingFile);
    cmd->add_option("--constraints", constraints, "soft constraints file")->check(CLI::ExistingFile);
    cmd->add_option("--previous", previous, "previous deployment file")->check(CLI::ExistingFile);
    cmd->add_option("--objective", objective, "first or redeploy")->check(CLI::IsMember({"first", "redeploy"}));
    cmd->add_option("--time-limit", time_limit, "seconds per solve attempt")->check(CLI::PositiveNumber);
    cmd->add_option("--round-hours", round_hours, "projection horizon for the budgets")->check(CLI::PositiveNumber);
    cmd->add_option("--max-drop-k", max_drop, "largest relaxation subset (default: all)");
  }

  PlacementProblem Build(std::vector<SoftConstraint>& soft) const {
    PlacementProblem p;
    p.app = ParseApplication(ReadFile(app));
    p.infra = ParseInfrastructure(ReadFile(infra));
    p.round_hours = round_hours;
    if (!previous.empty()) p.previous = ParseDeployment(ReadFile(previous));
    if (objective == "redeploy") {
      if (!p.previous) throw InputError("--objective redeploy needs --previous");
      p.objective_mode = ObjectiveMode::kMinimizeChanges;
    }
    if (!constraints.empty()) soft = ParseConstraints(ReadFile(constraints));
    return p;
  }
};

int StatusExit(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return kOk;
    case SolveStatus::kUnsatisfiable:
      return kUnsat;
    case SolveStatus::kTimedOut:
      return kTimeout;
  }
  return kInputError;
}

void Report(const PlacementProblem& p, const SolveOutcome& o) {
  std::cout << "status: " << ToString(o.status) << "\n";
  if (!o.deployment) return;
  std::cout << "objective: " << o.ObjectiveFor(p.objective_mode) << "\n";
  std::cout << "importance: " << o.value.importance << "\n";
  if (p.previous) std::cout << "changes: " << CountChanges(*p.previous, *o.deployment) << "\n";
}

int CmdSolve(const ProblemArgs& args, const std::string& out) {
  std::vector<SoftConstraint> soft;
  PlacementProblem p = args.Build(soft);
  RelaxationResult rr = SolveWithRelaxation(p, soft, Seconds(args.time_limit), args.max_drop);
  PlacementProblem enforced = p;
  for (const auto& sc : soft) {
    if (std::find(rr.dropped.begin(), rr.dropped.end(), sc) == rr.dropped.end()) enforced.enforced.push_back(sc);
  }
  Report(p, rr.outcome);
  const fs::path dir(out);
  WriteFile(dir / "model.txt", DumpModel(enforced));
  if (!rr.dropped.empty()) {
    std::cout << "relaxed: " << rr.dropped.size() << " constraint(s)\n";
    WriteFile(dir / "relaxed.constraints", EmitConstraints(rr.dropped));
  }
  if (rr.outcome.deployment) {
    WriteFile(dir / "deployment.txt", EmitDeployment(*rr.outcome.deployment));
    std::cout << EmitDeployment(*rr.outcome.deployment);
  } else if (rr.outcome.status == SolveStatus::kUnsatisfiable) {
    std::cout << "no satisfactory deployment\n";
  }
  return StatusExit(rr.outcome.status);
}

int CmdOracle(const ProblemArgs& args) {
  std::vector<SoftConstraint> soft;
  PlacementProblem p = args.Build(soft);
  p.enforced = soft;
  SolveOutcome oracle = BruteForceOracle(p);
  SolveOutcome solved = Solve(p, Seconds(args.time_limit));
  std::cout << "oracle candidates: " << oracle.explored << "\n";
  Report(p, oracle);
  if (oracle.deployment) std::cout << EmitDeployment(*oracle.deployment);
  const bool agree = oracle.status == solved.status && oracle.value == solved.value &&
                     oracle.deployment == solved.deployment;
  std::cout << "solver agrees: " << (agree ? "yes" : "no") << "\n";
  if (!agree) return kInputError;
  return StatusExit(oracle.status);
}

struct EnhanceArgs {
  std::string log, app, infra, kb, out = ".";
  double service_g = 30.0, connection_g = 30.0, round_hours = -1.0;
  std::size_t top_k = 10;
  int carbon_window = 120;
};

int CmdEnhance(const EnhanceArgs& a) {
  const ApplicationSpec app = ParseApplication(ReadFile(a.app));
  const InfrastructureSpec infra = ParseInfrastructure(ReadFile(a.infra));
  const SimulationRecord record = ParseSimulationRecord(ReadFile(a.log), &app);
  const fs::path dir(a.out);

  auto failure_set = SuggestFailureConstraints(record.facts);
  std::vector<SoftConstraint> failure(failure_set.begin(), failure_set.end());

  fs::path kb_path = a.kb.empty() ? dir / "kb.json" : fs::path(a.kb);
  KnowledgeBase kb = fs::exists(kb_path) ? KnowledgeBase::FromJson(ReadFile(kb_path)) : KnowledgeBase{};
  EnergyThresholds th;
  th.service_g = a.service_g;
  th.connection_g = a.connection_g;
  th.top_k = a.top_k;
  th.carbon_window = a.carbon_window;
  th.round_hours = a.round_hours > 0 ? a.round_hours : record.power.ticks * record.power.TickHours();
  Deployment current;
  for (const auto& d : record.facts.deployed) current.assignments[d.component] = {d.flavour, d.node};
  const InfrastructureSpec updated_infra = WithoutDisconnectedNodes(infra, record.facts);
  EnergyRoundResult er = RunEnergyEnhancer(kb, record, app, updated_infra, current, th);

  WriteFile(dir / "failure.constraints", EmitConstraints(failure));
  WriteFile(dir / "energy.constraints", EmitConstraints(er.constraints));
  WriteFile(kb_path, kb.ToJson());
  WriteFile(dir / "application.updated.yaml", EmitApplication(WithObservedEnergy(app, kb)));
  WriteFile(dir / "infrastructure.updated.yaml", EmitInfrastructure(updated_infra));
  std::cout << "failure constraints: " << failure.size() << "\n" << EmitConstraints(failure);
  std::cout << "energy constraints: " << er.constraints.size() << "\n" << EmitConstraints(er.constraints);
  return kOk;
}

int CmdHarmonize(const std::string& failure_path, const std::string& energy_path, const std::string& priority,
                 const std::string& out) {
  auto failure = ParseConstraints(ReadFile(failure_path), Provenance::kFailure);
  auto energy = ParseConstraints(ReadFile(energy_path), Provenance::kEnergy);
  auto p = ParsePriority(priority);
  if (!p) throw InputError("unknown priority '" + priority + "'; valid: failure, energy, none");
  HarmonizedConstraints h = Harmonize(failure, energy, *p);
  const fs::path dir(out);
  WriteFile(dir / "kept.constraints", EmitConstraints(h.kept));
  WriteFile(dir / "dropped.txt", EmitDroppedReport(h.dropped));
  std::cout << EmitConstraints(h.kept);
  if (!h.dropped.empty()) std::cout << EmitDroppedReport(h.dropped);
  return kOk;
}

struct SimulateArgs {
  std::string app, infra, deployment, previous, config, out = ".";
  int round = 0;
  int ticks = 120;
  double tick_minutes = 1.0;
  std::uint64_t seed = 0;
};

int CmdSimulate(const SimulateArgs& a) {
  const ApplicationSpec app = ParseApplication(ReadFile(a.app));
  const InfrastructureSpec infra = ParseInfrastructure(ReadFile(a.infra));
  const Deployment d = ParseDeployment(ReadFile(a.deployment));
  std::vector<Scenario> scenarios;
  RoundOptions opts{a.ticks, a.tick_minutes, a.seed};
  if (!a.config.empty()) {
    const fs::path cp(a.config);
    CampaignConfig cfg = ParseCampaignConfig(ReadFile(cp), cp.parent_path());
    if (a.round < 0 || a.round >= cfg.rounds) throw InputError("--round outside the configured rounds");
    for (const auto* lists : {&cfg.policy.infrastructure, &cfg.policy.application}) {
      for (const auto& name : (*lists)[a.round]) {
        const auto& bundle = cfg.scenarios.at(name);
        scenarios.insert(scenarios.end(), bundle.begin(), bundle.end());
      }
    }
    opts = RoundOptions{cfg.ticks, cfg.tick_minutes, cfg.seed};
  }
  std::optional<Deployment> previous;
  if (!a.previous.empty()) previous = ParseDeployment(ReadFile(a.previous));
  const auto violations = VerifyDeployment(d, PlacementProblem{app, infra, {}, {}, ObjectiveMode::kMaximizeImportance,
                                                               opts.ticks * opts.tick_minutes / 60.0});
  for (const auto& v : violations) std::cerr << "warning: " << v << "\n";
  RoundTrace trace = RunRound(d, app, infra, scenarios, opts, previous ? &*previous : nullptr);
  const fs::path dir(a.out);
  WriteFile(dir / "simulation.log", EmitSimulationLog(trace, app));
  WriteFile(dir / "facts.pl", EmitFacts(trace.record.facts));
  const auto& m = trace.metrics;
  std::cout << "downtime_pct: " << m.downtime_pct << "\napp_quality_pct: " << m.app_quality_pct
            << "\nenergy_kwh: " << m.energy_kwh << "\nco2_g: " << m.co2_g << "\nchanges: " << m.changes << "\n";
  return kOk;
}

int CmdCampaign(const std::string& config_path, const std::string& out, bool charts) {
  const fs::path cp(config_path);
  CampaignConfig cfg = ParseCampaignConfig(ReadFile(cp), cp.parent_path());
  const ApplicationSpec app = ParseApplication(ReadFile(cfg.application_path));
  const InfrastructureSpec infra = ParseInfrastructure(ReadFile(cfg.infrastructure_path));
  CampaignResult result = RunCampaign(cfg, app, infra);
  WriteCampaignArtifacts(result, out);
  if (charts) {
    for (const auto& [metric, svg] : RenderCharts(ReadFile(fs::path(out) / "metrics.csv"))) {
      WriteFile(fs::path(out) / "charts" / (metric + ".svg"), svg);
    }
  }
  std::cout << result.Summary();
  for (const auto& m : result.modes) {
    if (m.halted) return kUnsat;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Microservice placement planner and closed-loop simulator"};
  cli.require_subcommand(1);

  ProblemArgs solve_args;
  std::string solve_out = ".";
  auto* solve = cli.add_subcommand("solve", "compute an optimal deployment");
  solve_args.Register(solve);
  solve->add_option("--out", solve_out, "output directory");

  ProblemArgs oracle_args;
  auto* oracle = cli.add_subcommand("oracle", "exhaustive reference solve, compared against the solver");
  oracle_args.Register(oracle);

  EnhanceArgs enhance_args;
  auto* enhance = cli.add_subcommand("enhance", "derive failure and energy constraints from a simulation log");
  enhance->add_option("--log", enhance_args.log, "simulation log")->required()->check(CLI::ExistingFile);
  enhance->add_option("--app", enhance_args.app, "application YAML")->required()->check(CLI::ExistingFile);
  enhance->add_option("--infra", enhance_args.infra, "infrastructure YAML")->required()->check(CLI::ExistingFile);
  enhance->add_option("--kb", enhance_args.kb, "knowledge base JSON, created when missing");
  enhance->add_option("--out", enhance_args.out, "output directory");
  enhance->add_option("--service-g", enhance_args.service_g, "service emission threshold (gCO2)");
  enhance->add_option("--connection-g", enhance_args.connection_g, "connection emission threshold (gCO2)");
  enhance->add_option("--top-k", enhance_args.top_k, "maximum number of energy constraints");
  enhance->add_option("--round-hours", enhance_args.round_hours, "projection horizon (default: log duration)");
  enhance->add_option("--carbon-window", enhance_args.carbon_window, "carbon intensity window in ticks");

  std::string failure_path, energy_path, priority = "failure", harmonize_out = ".";
  auto* harmonize = cli.add_subcommand("harmonize", "resolve conflicts between failure and energy constraints");
  harmonize->add_option("--failure", failure_path, "failure constraints")->required()->check(CLI::ExistingFile);
  harmonize->add_option("--energy", energy_path, "energy constraints")->required()->check(CLI::ExistingFile);
  harmonize->add_option("--priority", priority, "failure, energy or none");
  harmonize->add_option("--out", harmonize_out, "output directory");

  SimulateArgs sim_args;
  auto* simulate = cli.add_subcommand("simulate", "simulate one round of a deployment");
  simulate->add_option("--app", sim_args.app, "application YAML")->required()->check(CLI::ExistingFile);
  simulate->add_option("--infra", sim_args.infra, "infrastructure YAML")->required()->check(CLI::ExistingFile);
  simulate->add_option("--deployment", sim_args.deployment, "deployment file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--previous", sim_args.previous, "previous deployment for the change count")
      ->check(CLI::ExistingFile);
  simulate->add_option("--config", sim_args.config, "campaign YAML providing scenarios")->check(CLI::ExistingFile);
  simulate->add_option("--round", sim_args.round, "round whose scenarios apply");
  simulate->add_option("--ticks", sim_args.ticks, "ticks per round (without --config)");
  simulate->add_option("--tick-minutes", sim_args.tick_minutes, "minutes per tick (without --config)");
  simulate->add_option("--seed", sim_args.seed, "seed (without --config)");
  simulate->add_option("--out", sim_args.out, "output directory");

  std::string config_path, campaign_out = "campaign_out";
  bool charts = false;
  auto* campaign = cli.add_subcommand("campaign", "run the closed loop for every configured mode");
  campaign->add_option("--config", config_path, "campaign YAML")->required()->check(CLI::ExistingFile);
  campaign->add_option("--out", campaign_out, "output directory");
  campaign->add_flag("--charts", charts, "write SVG charts derived from metrics.csv");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) return CmdSolve(solve_args, solve_out);
    if (*oracle) return CmdOracle(oracle_args);
    if (*enhance) return CmdEnhance(enhance_args);
    if (*harmonize) return CmdHarmonize(failure_path, energy_path, priority, harmonize_out);
    if (*simulate) return CmdSimulate(sim_args);
    if (*campaign) return CmdCampaign(config_path, campaign_out, charts);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (!e.field().empty()) std::cerr << " (field " << e.field() << ")";
    std::cerr << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
