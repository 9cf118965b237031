#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgeplan/energy_enhancer.hpp"
#include "edgeplan/harmonizer.hpp"
#include "edgeplan/model.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan {

// ---------------------------------------------------------------------------
// Scenarios

enum class TargetKind {
  kNodeResource,      // node capacity of one consumable resource
  kNodeCarbon,        // node carbon intensity
  kNodeConnectivity,  // base 1, at or below 0 the node is disconnected
  kLinkCongestion,    // base 0, above 0 the link is congested
  kFlavourEnergy,     // power draw of one (component, flavour)
};

struct ScenarioTarget {
  TargetKind kind = TargetKind::kNodeResource;
  std::string node;       // node kinds; first endpoint for links
  std::string other;      // second link endpoint
  std::string resource;   // kNodeResource
  std::string component;  // kFlavourEnergy
  std::string flavour;    // kFlavourEnergy
  bool operator==(const ScenarioTarget&) const = default;
};

struct ConstantShape {
  double delta = 0.0;
  int from = 0;
  int to = 0;
  bool operator==(const ConstantShape&) const = default;
};

/// amplitude * sin(2*pi*(t - from) / period) on [from, to]. The span must be
/// a whole number of half periods so the curve starts and ends at zero.
struct SinusoidalShape {
  double amplitude = 0.0;
  int period = 1;
  int from = 0;
  int to = 0;
  bool operator==(const SinusoidalShape&) const = default;
};

struct Scenario {
  ScenarioTarget target;
  std::variant<ConstantShape, SinusoidalShape> shape;

  /// Additive modification at `tick`; 0 outside the active range.
  double DeltaAt(int tick) const;
  int From() const;
  int To() const;
  bool operator==(const Scenario&) const = default;
};

/// Named bundles of scenarios applied together.
using ScenarioLibrary = std::map<std::string, std::vector<Scenario>>;

/// Throws InputError when a scenario names an unknown entity or its range
/// does not fit in `ticks`.
void ValidateScenario(const Scenario& s, const ApplicationSpec& app, const InfrastructureSpec& infra, int ticks);

/// Expands `[a]*2 + [b, c]*1 + []*3` into one list of names per round.
std::vector<std::vector<std::string>> ParsePolicyExpression(std::string_view text);

struct UpdatePolicy {
  std::vector<std::vector<std::string>> application;
  std::vector<std::vector<std::string>> infrastructure;
};

// ---------------------------------------------------------------------------
// Rounds

struct RoundMetrics {
  double downtime_pct = 0.0;
  double app_quality_pct = 0.0;
  double energy_kwh = 0.0;
  double co2_g = 0.0;
  int changes = 0;
  bool operator==(const RoundMetrics&) const = default;
};

struct RoundOptions {
  int ticks = 120;
  double tick_minutes = 1.0;
  std::uint64_t seed = 0;
};

struct RoundTrace {
  Deployment deployment;
  int ticks = 0;
  double tick_minutes = 1.0;
  /// Facts and power samples as produced by the simulator.
  SimulationRecord record;
  /// Per-tick overload samples (node, resource, tick, load%).
  std::vector<std::tuple<std::string, std::string, int, double>> overload_samples;
  std::vector<int> down_ticks;
  RoundMetrics metrics;
};

/// Simulates one round of `ticks` over a fixed deployment.
RoundTrace RunRound(const Deployment& deployment, const ApplicationSpec& app, const InfrastructureSpec& infra,
                    const std::vector<Scenario>& scenarios, const RoundOptions& options,
                    const Deployment* previous = nullptr);

/// Log text in the simulator's grammar; ParseSimulationRecord reads it back.
std::string EmitSimulationLog(const RoundTrace& trace, const ApplicationSpec& app);

// ---------------------------------------------------------------------------
// Baselines

/// Largest flavour of each component on the first node with spare capacity.
Deployment FirstFit(const ApplicationSpec& app, const InfrastructureSpec& infra);

/// Largest flavour of each component on the node with the highest resulting
/// utilization; ties are broken by a generator seeded with `seed`.
Deployment BestFit(const ApplicationSpec& app, const InfrastructureSpec& infra, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Campaigns

enum class CampaignMode { kBestFit, kSolverOnly, kSolverEnergy, kSolverFailure, kFullLoop };

std::string_view ToString(CampaignMode mode);
std::optional<CampaignMode> ParseCampaignMode(std::string_view text);
/// Comma-separated list of valid mode names.
std::string ValidModeNames();

struct CampaignConfig {
  std::filesystem::path application_path;
  std::filesystem::path infrastructure_path;
  std::vector<CampaignMode> modes;
  int rounds = 6;
  int ticks = 120;
  double tick_minutes = 1.0;
  std::uint64_t seed = 0;
  Priority priority = Priority::kFailure;
  double time_limit_s = 300.0;
  int max_drop = -1;
  EnergyThresholds energy;
  ScenarioLibrary scenarios;
  UpdatePolicy policy;
};

/// Parses a campaign YAML file. Relative spec paths resolve against
/// `base_dir`.
CampaignConfig ParseCampaignConfig(std::string_view yaml_text, const std::filesystem::path& base_dir = {});

struct RoundArtifacts {
  RoundTrace trace;
  std::string log;
  /// Constraints enforced when solving this round.
  std::vector<SoftConstraint> enforced;
  std::vector<SoftConstraint> relaxed;
  /// Produced from this round's log for the next round.
  std::vector<SoftConstraint> failure;
  std::vector<SoftConstraint> energy;
  std::vector<DroppedConstraint> harmonizer_dropped;
};

struct ModeReport {
  CampaignMode mode = CampaignMode::kSolverOnly;
  std::vector<RoundArtifacts> rounds;
  /// Set when the solver found no satisfactory deployment.
  std::optional<std::string> halted;
};

struct CampaignResult {
  std::vector<ModeReport> modes;

  std::string MetricsCsv() const;
  /// Plain-text comparison of the modes, one row per mode.
  std::string Summary() const;
};

CampaignResult RunCampaign(const CampaignConfig& config, const ApplicationSpec& app,
                           const InfrastructureSpec& infra);

/// Writes metrics.csv plus one directory per mode and round holding the
/// deployment, log and constraint files.
void WriteCampaignArtifacts(const CampaignResult& result, const std::filesystem::path& out_dir);

/// One SVG line chart per metric column of a metrics.csv text.
std::map<std::string, std::string> RenderCharts(std::string_view metrics_csv);

}  // namespace edgeplan
