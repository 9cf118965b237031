#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgeplan/model.hpp"

namespace edgeplan {

/// Parse failure carrying the offending line (1-based, 0 when unknown) and
/// a field path such as `app.components[2].flavours`.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, int line = 0, std::string field = {});
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

// ---------------------------------------------------------------------------
// YAML specifications

ApplicationSpec ParseApplication(std::string_view yaml_text);
InfrastructureSpec ParseInfrastructure(std::string_view yaml_text);
std::string EmitApplication(const ApplicationSpec& app);
std::string EmitInfrastructure(const InfrastructureSpec& infra);

// ---------------------------------------------------------------------------
// Deployments and soft constraints

/// One `component flavour node` line per assignment, sorted by component.
std::string EmitDeployment(const Deployment& deployment);
Deployment ParseDeployment(std::string_view text);

/// Shortest decimal text that reads back to `weight`, always with a
/// fractional part ("1.0", "0.883").
std::string FormatWeight(double weight);

/// Functor form of one constraint with its terminating period, e.g.
/// `avoid(d(frontend,large),public1).` or `avoid(d(db,large),private1,1.0).`
/// The weight is written for energy constraints and whenever it is not 1.0.
std::string FormatConstraint(const SoftConstraint& constraint);

/// Emits constraints in order. A `# failure` / `# energy` header precedes each
/// run of constraints sharing a provenance.
std::string EmitConstraints(const std::vector<SoftConstraint>& constraints);

/// Parses functor lines. Both `affinity(c,fc,s,fs)` and
/// `affinity(d(c,fc),d(s,fs))` are accepted. `# failure` / `# energy` lines
/// switch the provenance of what follows; other `#` and `%` comments are
/// skipped.
std::vector<SoftConstraint> ParseConstraints(std::string_view text,
                                             Provenance default_provenance = Provenance::kFailure);

// ---------------------------------------------------------------------------
// Fact base extracted from simulation logs

struct DeployedFact {
  std::string component, flavour, node;
  auto operator<=>(const DeployedFact&) const = default;
};

struct TimeoutFact {
  std::string component, other;
  int tick = 0;
  auto operator<=>(const TimeoutFact&) const = default;
};

struct ComponentEventFact {
  std::string component;
  int tick = 0;
  auto operator<=>(const ComponentEventFact&) const = default;
};

/// Directed: `congested(n, m, t)` is distinct from `congested(m, n, t)`.
struct CongestionFact {
  std::string node, other;
  int tick = 0;
  auto operator<=>(const CongestionFact&) const = default;
};

struct DisconnectionFact {
  std::string node;
  int tick = 0;
  auto operator<=>(const DisconnectionFact&) const = default;
};

struct OverloadFact {
  std::string node, resource;
  int tick_start = 0, tick_end = 0;
  std::optional<double> peak_load_pct;
  auto operator<=>(const OverloadFact&) const = default;
};

struct RaceFact {
  std::string node, resource, component, flavour, other, other_flavour;
  int tick = 0;
  auto operator<=>(const RaceFact&) const = default;
};

struct FactBase {
  std::set<DeployedFact> deployed;
  std::set<TimeoutFact> timeouts;
  std::set<ComponentEventFact> internals;
  std::set<ComponentEventFact> unreachables;
  std::set<CongestionFact> congestions;
  std::set<DisconnectionFact> disconnections;
  std::set<OverloadFact> overloads;
  std::set<RaceFact> races;

  bool operator==(const FactBase&) const = default;
};

/// Prolog-style listing of the fact base (one fact per line).
std::string EmitFacts(const FactBase& facts);

/// Sampled power and carbon series keyed by subject, tick -> value.
struct PowerLog {
  int ticks = 0;
  double tick_minutes = 1.0;
  std::map<std::string, std::map<int, double>> component_w;
  std::map<std::pair<std::string, std::string>, std::map<int, double>> connection_w;
  std::map<std::string, std::map<int, double>> node_w;
  std::map<std::string, std::map<int, double>> carbon_intensity;

  double TickHours() const { return tick_minutes / 60.0; }
  bool operator==(const PowerLog&) const = default;
};

struct SimulationRecord {
  FactBase facts;
  PowerLog power;
};

/// Parses the simulator's log grammar. When `app` is given, placement tokens
/// `<component>_<flavour>` are split against known names; otherwise at the
/// last underscore. Per-tick overload events on the same (node, resource) at
/// consecutive ticks are coalesced into one interval.
SimulationRecord ParseSimulationRecord(std::string_view text, const ApplicationSpec* app = nullptr);
FactBase ParseSimulationLog(std::string_view text, const ApplicationSpec* app = nullptr);

/// Coalesces per-tick overload samples (node, resource, tick, load) into
/// maximal runs of consecutive ticks.
std::set<OverloadFact> CoalesceOverloads(
    const std::vector<std::tuple<std::string, std::string, int, double>>& samples);

}  // namespace edgeplan
