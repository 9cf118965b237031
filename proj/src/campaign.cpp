#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edgeplan/failure_enhancer.hpp"
#include "edgeplan/simulator.hpp"
#include "edgeplan/solver.hpp"
#include "text_util.hpp"

namespace edgeplan {

namespace {

constexpr CampaignMode kAllModes[] = {CampaignMode::kBestFit, CampaignMode::kSolverOnly,
                                      CampaignMode::kSolverEnergy, CampaignMode::kSolverFailure,
                                      CampaignMode::kFullLoop};

}  // namespace

std::string_view ToString(CampaignMode mode) {
  switch (mode) {
    case CampaignMode::kBestFit:
      return "bestfit";
    case CampaignMode::kSolverOnly:
      return "solver-only";
    case CampaignMode::kSolverEnergy:
      return "solver+energy";
    case CampaignMode::kSolverFailure:
      return "solver+failure";
    case CampaignMode::kFullLoop:
      return "full-freeda";
  }
  return "?";
}

std::optional<CampaignMode> ParseCampaignMode(std::string_view text) {
  for (CampaignMode m : kAllModes) {
    if (ToString(m) == text) return m;
  }
  return std::nullopt;
}

std::string ValidModeNames() {
  std::string out;
  for (CampaignMode m : kAllModes) out += (out.empty() ? "" : ", ") + std::string(ToString(m));
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

int LineOf(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <typename T>
T Get(const YAML::Node& parent, const char* key, const std::string& path, std::optional<T> fallback = {}) {
  const YAML::Node n = parent[key];
  if (!n) {
    if (fallback) return *fallback;
    throw ParseError("missing required field '" + path + "." + key + "'", LineOf(parent), path + "." + key);
  }
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("field '" + path + "." + key + "' has the wrong type", LineOf(n), path + "." + key);
  }
}

Scenario ParseScenario(const YAML::Node& n, const std::string& path) {
  Scenario s;
  const YAML::Node t = n["target"];
  if (!t || !t.IsMap()) throw ParseError("scenario needs a 'target' mapping", LineOf(n), path + ".target");
  const std::string tp = path + ".target";
  if (t["link"]) {
    const YAML::Node l = t["link"];
    if (!l.IsSequence() || l.size() != 2) throw ParseError("link target must list two nodes", LineOf(l), tp);
    s.target.kind = TargetKind::kLinkCongestion;
    s.target.node = l[0].as<std::string>();
    s.target.other = l[1].as<std::string>();
  } else if (t["component"]) {
    s.target.kind = TargetKind::kFlavourEnergy;
    s.target.component = Get<std::string>(t, "component", tp);
    s.target.flavour = Get<std::string>(t, "flavour", tp);
  } else if (t["node"]) {
    s.target.node = Get<std::string>(t, "node", tp);
    if (t["resource"]) {
      s.target.kind = TargetKind::kNodeResource;
      s.target.resource = Get<std::string>(t, "resource", tp);
    } else {
      const auto q = Get<std::string>(t, "quantity", tp);
      if (q == "carbon_intensity") {
        s.target.kind = TargetKind::kNodeCarbon;
      } else if (q == "connectivity") {
        s.target.kind = TargetKind::kNodeConnectivity;
      } else {
        throw ParseError("unknown node quantity '" + q + "'", LineOf(t), tp + ".quantity");
      }
    }
  } else {
    throw ParseError("target needs 'node', 'link' or 'component'", LineOf(t), tp);
  }
  if (const YAML::Node c = n["constant"]) {
    s.shape = ConstantShape{Get<double>(c, "delta", path + ".constant"), Get<int>(c, "from", path + ".constant"),
                            Get<int>(c, "to", path + ".constant")};
  } else if (const YAML::Node w = n["sinusoidal"]) {
    const std::string wp = path + ".sinusoidal";
    s.shape = SinusoidalShape{Get<double>(w, "amplitude", wp), Get<int>(w, "period", wp), Get<int>(w, "from", wp),
                              Get<int>(w, "to", wp)};
  } else {
    throw ParseError("scenario needs a 'constant' or 'sinusoidal' shape", LineOf(n), path);
  }
  return s;
}

}  // namespace

CampaignConfig ParseCampaignConfig(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed YAML: " + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  const YAML::Node root = doc["campaign"] ? doc["campaign"] : doc;
  if (!root.IsMap()) throw ParseError("campaign config must be a mapping");
  const std::string path = "campaign";
  CampaignConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() || base_dir.empty() ? fp : base_dir / fp;
  };
  cfg.application_path = resolve(Get<std::string>(root, "application", path));
  cfg.infrastructure_path = resolve(Get<std::string>(root, "infrastructure", path));
  const YAML::Node modes = root["modes"];
  if (!modes || !modes.IsSequence() || modes.size() == 0) {
    throw ParseError("field 'campaign.modes' must list at least one mode", LineOf(root), "campaign.modes");
  }
  for (const auto& m : modes) {
    const auto name = m.as<std::string>();
    auto mode = ParseCampaignMode(name);
    if (!mode) {
      throw ParseError("unknown mode '" + name + "'; valid modes: " + ValidModeNames(), LineOf(m), "campaign.modes");
    }
    cfg.modes.push_back(*mode);
  }
  cfg.rounds = Get<int>(root, "rounds", path, 6);
  cfg.ticks = Get<int>(root, "ticks", path, 120);
  cfg.tick_minutes = Get<double>(root, "tick_minutes", path, 1.0);
  cfg.seed = Get<std::uint64_t>(root, "seed", path, std::uint64_t{0});
  const auto priority = Get<std::string>(root, "priority", path, std::string("failure"));
  auto p = ParsePriority(priority);
  if (!p) throw ParseError("unknown priority '" + priority + "'; valid: failure, energy, none", 0, "campaign.priority");
  cfg.priority = *p;
  cfg.time_limit_s = Get<double>(root, "time_limit_s", path, 300.0);
  cfg.max_drop = Get<int>(root, "max_drop_k", path, -1);
  if (cfg.rounds < 1) throw ParseError("campaign.rounds must be >= 1", 0, "campaign.rounds");
  if (cfg.ticks < 1) throw ParseError("campaign.ticks must be >= 1", 0, "campaign.ticks");
  if (!(cfg.tick_minutes > 0)) throw ParseError("campaign.tick_minutes must be positive", 0, "campaign.tick_minutes");
  if (const YAML::Node e = root["energy"]) {
    const std::string ep = path + ".energy";
    cfg.energy.service_g = Get<double>(e, "service_g", ep, cfg.energy.service_g);
    cfg.energy.connection_g = Get<double>(e, "connection_g", ep, cfg.energy.connection_g);
    cfg.energy.top_k = Get<std::size_t>(e, "top_k", ep, cfg.energy.top_k);
    cfg.energy.carbon_window = Get<int>(e, "carbon_window", ep, cfg.energy.carbon_window);
  }
  cfg.energy.round_hours = cfg.ticks * cfg.tick_minutes / 60.0;

  if (const YAML::Node lib = root["scenarios"]) {
    if (!lib.IsMap()) throw ParseError("field 'campaign.scenarios' must be a mapping", LineOf(lib), "campaign.scenarios");
    for (const auto& kv : lib) {
      const auto name = kv.first.as<std::string>();
      const std::string sp = path + ".scenarios." + name;
      auto& bundle = cfg.scenarios[name];
      if (kv.second.IsSequence()) {
        int i = 0;
        for (const auto& s : kv.second) bundle.push_back(ParseScenario(s, sp + "[" + std::to_string(i++) + "]"));
      } else {
        bundle.push_back(ParseScenario(kv.second, sp));
      }
    }
  }
  auto policy = [&](const char* key) {
    std::vector<std::vector<std::string>> rounds(cfg.rounds);
    const YAML::Node pol = root["policy"];
    if (!pol || !pol[key]) return rounds;
    rounds = ParsePolicyExpression(pol[key].as<std::string>());
    if (int(rounds.size()) != cfg.rounds) {
      throw ParseError(std::string("policy '") + key + "' covers " + std::to_string(rounds.size()) +
                           " rounds, expected " + std::to_string(cfg.rounds),
                       LineOf(pol[key]), std::string("campaign.policy.") + key);
    }
    for (const auto& r : rounds) {
      for (const auto& n : r) {
        if (cfg.scenarios.count(n) == 0) {
          throw ParseError("policy references unknown scenario '" + n + "'", LineOf(pol[key]),
                           std::string("campaign.policy.") + key);
        }
      }
    }
    return rounds;
  };
  cfg.policy.application = policy("application");
  cfg.policy.infrastructure = policy("infrastructure");
  return cfg;
}

// ---------------------------------------------------------------------------
// Closed loop

namespace {

bool UsesFailure(CampaignMode m) { return m == CampaignMode::kSolverFailure || m == CampaignMode::kFullLoop; }
bool UsesEnergy(CampaignMode m) { return m == CampaignMode::kSolverEnergy || m == CampaignMode::kFullLoop; }

std::vector<Scenario> ScenariosFor(const CampaignConfig& cfg, int round) {
  std::vector<Scenario> out;
  for (const auto* lists : {&cfg.policy.infrastructure, &cfg.policy.application}) {
    if (round >= int(lists->size())) continue;
    for (const auto& name : (*lists)[round]) {
      const auto& bundle = cfg.scenarios.at(name);
      out.insert(out.end(), bundle.begin(), bundle.end());
    }
  }
  return out;
}

ModeReport RunMode(CampaignMode mode, const CampaignConfig& cfg, const ApplicationSpec& app,
                   const InfrastructureSpec& infra) {
  ModeReport report;
  report.mode = mode;
  ApplicationSpec planner_app = app;
  InfrastructureSpec planner_infra = infra;
  KnowledgeBase kb;
  std::optional<Deployment> previous;
  std::vector<SoftConstraint> next_constraints;
  const Seconds limit(cfg.time_limit_s);
  const double round_hours = cfg.ticks * cfg.tick_minutes / 60.0;

  for (int r = 0; r < cfg.rounds; ++r) {
    RoundArtifacts art;
    Deployment d;
    if (mode == CampaignMode::kBestFit) {
      d = BestFit(app, infra, cfg.seed);
    } else {
      PlacementProblem problem{planner_app, planner_infra, {}, previous,
                               previous ? ObjectiveMode::kMinimizeChanges : ObjectiveMode::kMaximizeImportance,
                               round_hours};
      RelaxationResult rr = SolveWithRelaxation(problem, next_constraints, limit, cfg.max_drop);
      if (rr.outcome.status == SolveStatus::kUnsatisfiable || !rr.outcome.deployment) {
        report.halted = "round " + std::to_string(r) + ": no satisfactory deployment (" +
                        std::string(ToString(rr.outcome.status)) + ")";
        break;
      }
      d = *rr.outcome.deployment;
      art.relaxed = rr.dropped;
      for (const auto& sc : next_constraints) {
        if (std::find(rr.dropped.begin(), rr.dropped.end(), sc) == rr.dropped.end()) art.enforced.push_back(sc);
      }
    }

    RoundOptions opts{cfg.ticks, cfg.tick_minutes, cfg.seed};
    art.trace = RunRound(d, app, infra, ScenariosFor(cfg, r), opts, previous ? &*previous : nullptr);
    art.log = EmitSimulationLog(art.trace, app);
    const SimulationRecord record = ParseSimulationRecord(art.log, &app);

    if (UsesFailure(mode)) {
      const auto suggested = SuggestFailureConstraints(record.facts);
      art.failure.assign(suggested.begin(), suggested.end());
      planner_infra = WithoutDisconnectedNodes(planner_infra, record.facts);
    }
    if (UsesEnergy(mode)) {
      EnergyRoundResult er = RunEnergyEnhancer(kb, record, planner_app, planner_infra, d, cfg.energy);
      art.energy = er.constraints;
      planner_app = WithObservedEnergy(app, kb);
    }
    if (mode == CampaignMode::kFullLoop) {
      HarmonizedConstraints h = Harmonize(art.failure, art.energy, cfg.priority);
      next_constraints = h.kept;
      art.harmonizer_dropped = h.dropped;
    } else if (mode == CampaignMode::kSolverFailure) {
      next_constraints = art.failure;
    } else if (mode == CampaignMode::kSolverEnergy) {
      next_constraints = art.energy;
    }
    previous = d;
    report.rounds.push_back(std::move(art));
  }
  return report;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

CampaignResult RunCampaign(const CampaignConfig& config, const ApplicationSpec& app,
                           const InfrastructureSpec& infra) {
  for (int r = 0; r < config.rounds; ++r) {
    for (const auto& s : ScenariosFor(config, r)) ValidateScenario(s, app, infra, config.ticks);
  }
  CampaignResult result;
  for (CampaignMode m : config.modes) result.modes.push_back(RunMode(m, config, app, infra));
  return result;
}

std::string CampaignResult::MetricsCsv() const {
  std::string out = "round,mode,downtime_pct,app_quality_pct,energy_kwh,co2_g,changes\n";
  for (const auto& m : modes) {
    for (std::size_t r = 0; r < m.rounds.size(); ++r) {
      const auto& x = m.rounds[r].trace.metrics;
      out += std::to_string(r) + "," + std::string(ToString(m.mode)) + "," + Fixed(x.downtime_pct, 6) + "," +
             Fixed(x.app_quality_pct, 6) + "," + Fixed(x.energy_kwh, 9) + "," + Fixed(x.co2_g, 6) + "," +
             std::to_string(x.changes) + "\n";
    }
  }
  return out;
}

std::string CampaignResult::Summary() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %6s %12s %12s %12s %12s %8s\n", "mode", "rounds", "downtime%",
                "quality%", "energy_kWh", "co2_g", "changes");
  os << buf;
  for (const auto& m : modes) {
    double down = 0, quality = 0, energy = 0, co2 = 0;
    int changes = 0;
    for (const auto& r : m.rounds) {
      down += r.trace.metrics.downtime_pct;
      quality += r.trace.metrics.app_quality_pct;
      energy += r.trace.metrics.energy_kwh;
      co2 += r.trace.metrics.co2_g;
      changes += r.trace.metrics.changes;
    }
    const double n = m.rounds.empty() ? 1.0 : double(m.rounds.size());
    std::snprintf(buf, sizeof(buf), "%-16s %6zu %12.3f %12.3f %12.4f %12.3f %8d\n", std::string(ToString(m.mode)).c_str(),
                  m.rounds.size(), down / n, quality / n, energy, co2, changes);
    os << buf;
    if (m.halted) os << "  halted: " << *m.halted << "\n";
  }
  os << "(downtime and quality are per-round means; energy, co2 and changes are totals)\n";
  return os.str();
}

void WriteCampaignArtifacts(const CampaignResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("cannot write " + p.string());
    f << text;
  };
  fs::create_directories(out_dir);
  write(out_dir / "metrics.csv", result.MetricsCsv());
  write(out_dir / "summary.txt", result.Summary());
  for (const auto& m : result.modes) {
    std::string dir_name(ToString(m.mode));
    std::replace(dir_name.begin(), dir_name.end(), '+', '_');
    const fs::path mode_dir = out_dir / dir_name;
    for (std::size_t r = 0; r < m.rounds.size(); ++r) {
      const auto& a = m.rounds[r];
      const fs::path rd = mode_dir / ("round" + std::to_string(r));
      fs::create_directories(rd);
      write(rd / "deployment.txt", EmitDeployment(a.trace.deployment));
      write(rd / "simulation.log", a.log);
      write(rd / "facts.pl", EmitFacts(a.trace.record.facts));
      write(rd / "enforced.constraints", EmitConstraints(a.enforced));
      write(rd / "relaxed.constraints", EmitConstraints(a.relaxed));
      write(rd / "failure.constraints", EmitConstraints(a.failure));
      write(rd / "energy.constraints", EmitConstraints(a.energy));
      write(rd / "harmonizer_dropped.txt", EmitDroppedReport(a.harmonizer_dropped));
    }
    if (m.halted) write(mode_dir / "halted.txt", *m.halted + "\n");
  }
}

// ---------------------------------------------------------------------------
// Charts

std::map<std::string, std::string> RenderCharts(std::string_view metrics_csv) {
  using detail::ParseNumber;
  using detail::SplitLines;
  using detail::Trim;
  auto lines = SplitLines(metrics_csv);
  if (lines.empty()) throw InputError("metrics.csv is empty");
  auto split = [](std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.emplace_back(Trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  const auto header = split(lines.front());
  if (header.size() < 3 || header[0] != "round" || header[1] != "mode") {
    throw InputError("metrics.csv header must start with round,mode");
  }
  // metric -> mode -> (round, value)
  std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>> series;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto cells = split(lines[i]);
    if (cells.size() != header.size()) throw InputError("metrics.csv row " + std::to_string(i + 1) + " is malformed");
    auto round = ParseNumber(cells[0]);
    if (!round) throw InputError("metrics.csv row " + std::to_string(i + 1) + " has a bad round");
    for (std::size_t c = 2; c < header.size(); ++c) {
      auto v = ParseNumber(cells[c]);
      if (v) series[header[c]][cells[1]].emplace_back(*round, *v);
    }
  }

  static const char* kColours[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"};
  std::map<std::string, std::string> charts;
  for (const auto& [metric, by_mode] : series) {
    double xmax = 1, ymin = 0, ymax = 0;
    for (const auto& [_, pts] : by_mode) {
      for (const auto& [x, y] : pts) {
        xmax = std::max(xmax, x);
        ymax = std::max(ymax, y);
        ymin = std::min(ymin, y);
      }
    }
    if (ymax <= ymin) ymax = ymin + 1;
    const double w = 640, h = 360, left = 60, right = 160, top = 30, bottom = 40;
    auto px = [&](double x) { return left + x / xmax * (w - left - right); };
    auto py = [&](double y) { return top + (1 - (y - ymin) / (ymax - ymin)) * (h - top - bottom); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << metric
       << " per round</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << py(ymin) << "\" x2=\"" << w - right << "\" y2=\"" << py(ymin)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << py(ymin)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"5\" y=\"" << py(ymax) + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << Fixed(ymax, 2)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << py(ymin) << "\" font-family=\"sans-serif\" font-size=\"10\">" << Fixed(ymin, 2)
       << "</text>\n";
    for (int x = 0; x <= int(xmax); ++x) {
      os << "<text x=\"" << px(x) - 3 << "\" y=\"" << h - bottom + 15 << "\" font-family=\"sans-serif\" font-size=\"10\">"
         << x << "</text>\n";
    }
    int k = 0;
    for (const auto& [mode, pts] : by_mode) {
      const char* colour = kColours[k % 7];
      os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : pts) os << Fixed(px(x), 1) << "," << Fixed(py(y), 1) << " ";
      os << "\"/>\n";
      os << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 15 * (k + 1) << "\" fill=\"" << colour
         << "\" font-family=\"sans-serif\" font-size=\"11\">" << mode << "</text>\n";
      ++k;
    }
    os << "</svg>\n";
    charts[metric] = os.str();
  }
  return charts;
}

}  // namespace edgeplan
