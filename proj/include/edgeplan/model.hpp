#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edgeplan {

/// Raised for malformed input documents and unusable specifications.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ResourceMap = std::map<std::string, double>;

/// A consumer-side requirement on another component. Latency and availability
/// bounds are optional; absent bounds only require a direct link.
struct Dependency {
  std::string component;
  int min_importance = 0;
  std::optional<double> max_latency_ms;
  std::optional<double> min_availability;
  /// Power drawn by traffic on this edge when the endpoints sit on
  /// different nodes.
  double traffic_w = 0.0;

  bool operator==(const Dependency&) const = default;
};

struct Flavour {
  std::string name;
  int importance = 1;
  ResourceMap consumable_demands;
  /// attribute name -> acceptable values on the hosting node.
  std::map<std::string, std::set<std::string>> attribute_requirements;
  std::vector<Dependency> dependencies;
  double energy_w = 0.0;

  const Dependency* DependencyOn(std::string_view component) const;
  bool operator==(const Flavour&) const = default;
};

struct Component {
  std::string name;
  bool mandatory = true;
  std::vector<Flavour> flavours;

  const Flavour* FindFlavour(std::string_view flavour) const;
  int MaxImportance() const;
  bool operator==(const Component&) const = default;
};

struct ApplicationSpec {
  std::string name;
  std::vector<Component> components;
  double monetary_budget = 1e18;
  double carbon_budget = 1e18;  // gCO2 per round
  double energy_budget = 1e18;  // kWh per round

  const Component* FindComponent(std::string_view component) const;
  Component* FindComponent(std::string_view component);
  bool operator==(const ApplicationSpec&) const = default;
};

struct Node {
  std::string name;
  ResourceMap consumable_capacities;
  std::map<std::string, std::string> attributes;
  ResourceMap unit_costs;
  double carbon_intensity = 0.0;  // gCO2/kWh
  bool available = true;

  bool operator==(const Node&) const = default;
};

struct Link {
  std::string a;
  std::string b;
  double latency_ms = 0.0;
  double availability = 1.0;

  bool operator==(const Link&) const = default;
};

struct InfrastructureSpec {
  std::vector<Node> nodes;
  std::vector<Link> links;

  const Node* FindNode(std::string_view node) const;
  Node* FindNode(std::string_view node);
  /// Link between two nodes; a node is implicitly linked to itself with
  /// zero latency and full availability.
  std::optional<Link> LinkBetween(std::string_view a, std::string_view b) const;
  bool operator==(const InfrastructureSpec&) const = default;
};

struct Placement {
  std::string flavour;
  std::string node;

  auto operator<=>(const Placement&) const = default;
};

/// Realization of the binary placement matrix: at most one (flavour, node)
/// per component, absent components are undeployed.
struct Deployment {
  std::map<std::string, Placement> assignments;

  bool Contains(std::string_view component) const;
  const Placement* Find(std::string_view component) const;
  std::size_t size() const { return assignments.size(); }
  bool empty() const { return assignments.empty(); }
  bool operator==(const Deployment&) const = default;
};

/// Number of components whose (flavour, node) differs between two
/// deployments, counting additions and removals.
int CountChanges(const Deployment& previous, const Deployment& next);

/// Number of components of `previous` kept with identical (flavour, node).
int CountKept(const Deployment& previous, const Deployment& next);

enum class ConstraintKind { kAffinity, kAntiAffinity, kAvoid };
enum class Provenance { kFailure, kEnergy };

std::string_view ToString(ConstraintKind kind);
std::string_view ToString(Provenance provenance);

struct SoftConstraint {
  ConstraintKind kind = ConstraintKind::kAvoid;
  std::string component;
  std::string flavour;
  std::string other_component;  // pairwise kinds only
  std::string other_flavour;    // pairwise kinds only
  std::string node;             // Avoid only
  Provenance provenance = Provenance::kFailure;
  double weight = 1.0;

  static SoftConstraint Avoid(std::string c, std::string fc, std::string node,
                              Provenance p = Provenance::kFailure, double weight = 1.0);
  static SoftConstraint Affinity(std::string c, std::string fc, std::string s, std::string fs,
                                 Provenance p = Provenance::kFailure, double weight = 1.0);
  static SoftConstraint AntiAffinity(std::string c, std::string fc, std::string s,
                                     std::string fs, Provenance p = Provenance::kFailure,
                                     double weight = 1.0);

  bool IsPairwise() const { return kind != ConstraintKind::kAvoid; }
  /// Orders the endpoints of pairwise kinds so that (c, fc) <= (s, fs).
  SoftConstraint Normalized() const;
  /// Identity ignoring provenance and weight, e.g. `avoid(d(api,large),private1)`.
  std::string Identity() const;

  bool operator==(const SoftConstraint& other) const;
};

/// Orders by identity, then provenance, then weight.
bool operator<(const SoftConstraint& a, const SoftConstraint& b);

std::vector<std::string> ValidateSpecs(const ApplicationSpec& app,
                                       const InfrastructureSpec& infra);

int MaxTotalImportance(const ApplicationSpec& app);

/// True when `node` satisfies every attribute requirement of `flavour`.
bool AttributesSatisfied(const Flavour& flavour, const Node& node);

}  // namespace edgeplan
