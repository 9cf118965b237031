#include "edgeplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace edgeplan {

const Dependency* Flavour::DependencyOn(std::string_view component) const {
  for (const auto& dep : dependencies) {
    if (dep.component == component) return &dep;
  }
  return nullptr;
}

const Flavour* Component::FindFlavour(std::string_view flavour) const {
  for (const auto& f : flavours) {
    if (f.name == flavour) return &f;
  }
  return nullptr;
}

int Component::MaxImportance() const {
  int best = 0;
  for (const auto& f : flavours) best = std::max(best, f.importance);
  return best;
}

const Component* ApplicationSpec::FindComponent(std::string_view component) const {
  for (const auto& c : components) {
    if (c.name == component) return &c;
  }
  return nullptr;
}

Component* ApplicationSpec::FindComponent(std::string_view component) {
  for (auto& c : components) {
    if (c.name == component) return &c;
  }
  return nullptr;
}

const Node* InfrastructureSpec::FindNode(std::string_view node) const {
  for (const auto& n : nodes) {
    if (n.name == node) return &n;
  }
  return nullptr;
}

Node* InfrastructureSpec::FindNode(std::string_view node) {
  for (auto& n : nodes) {
    if (n.name == node) return &n;
  }
  return nullptr;
}

std::optional<Link> InfrastructureSpec::LinkBetween(std::string_view a,
                                                    std::string_view b) const {
  if (a == b) return Link{std::string(a), std::string(b), 0.0, 1.0};
  for (const auto& l : links) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l;
  }
  return std::nullopt;
}

bool Deployment::Contains(std::string_view component) const {
  return Find(component) != nullptr;
}

const Placement* Deployment::Find(std::string_view component) const {
  auto it = assignments.find(std::string(component));
  return it == assignments.end() ? nullptr : &it->second;
}

int CountChanges(const Deployment& previous, const Deployment& next) {
  std::set<std::string> names;
  for (const auto& [c, _] : previous.assignments) names.insert(c);
  for (const auto& [c, _] : next.assignments) names.insert(c);
  int changes = 0;
  for (const auto& c : names) {
    const Placement* a = previous.Find(c);
    const Placement* b = next.Find(c);
    if (a == nullptr || b == nullptr || *a != *b) ++changes;
  }
  return changes;
}

int CountKept(const Deployment& previous, const Deployment& next) {
  int kept = 0;
  for (const auto& [c, p] : previous.assignments) {
    const Placement* q = next.Find(c);
    if (q != nullptr && *q == p) ++kept;
  }
  return kept;
}

std::string_view ToString(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kAffinity:
      return "affinity";
    case ConstraintKind::kAntiAffinity:
      return "antiaffinity";
    case ConstraintKind::kAvoid:
      return "avoid";
  }
  return "?";
}

std::string_view ToString(Provenance provenance) {
  return provenance == Provenance::kFailure ? "failure" : "energy";
}

SoftConstraint SoftConstraint::Avoid(std::string c, std::string fc, std::string node,
                                     Provenance p, double weight) {
  SoftConstraint s;
  s.kind = ConstraintKind::kAvoid;
  s.component = std::move(c);
  s.flavour = std::move(fc);
  s.node = std::move(node);
  s.provenance = p;
  s.weight = weight;
  return s;
}

SoftConstraint SoftConstraint::Affinity(std::string c, std::string fc, std::string s,
                                        std::string fs, Provenance p, double weight) {
  SoftConstraint k;
  k.kind = ConstraintKind::kAffinity;
  k.component = std::move(c);
  k.flavour = std::move(fc);
  k.other_component = std::move(s);
  k.other_flavour = std::move(fs);
  k.provenance = p;
  k.weight = weight;
  return k.Normalized();
}

SoftConstraint SoftConstraint::AntiAffinity(std::string c, std::string fc, std::string s,
                                            std::string fs, Provenance p, double weight) {
  SoftConstraint k = Affinity(std::move(c), std::move(fc), std::move(s), std::move(fs), p,
                              weight);
  k.kind = ConstraintKind::kAntiAffinity;
  return k;
}

SoftConstraint SoftConstraint::Normalized() const {
  SoftConstraint out = *this;
  if (IsPairwise() &&
      std::tie(other_component, other_flavour) < std::tie(component, flavour)) {
    std::swap(out.component, out.other_component);
    std::swap(out.flavour, out.other_flavour);
  }
  return out;
}

std::string SoftConstraint::Identity() const {
  const SoftConstraint n = Normalized();
  std::string out(ToString(kind));
  if (kind == ConstraintKind::kAvoid) {
    out += "(d(" + n.component + "," + n.flavour + ")," + n.node + ")";
  } else {
    out += "(" + n.component + "," + n.flavour + "," + n.other_component + "," +
           n.other_flavour + ")";
  }
  return out;
}

bool SoftConstraint::operator==(const SoftConstraint& other) const {
  return Identity() == other.Identity() && provenance == other.provenance &&
         weight == other.weight;
}

bool operator<(const SoftConstraint& a, const SoftConstraint& b) {
  const std::string ia = a.Identity();
  const std::string ib = b.Identity();
  if (ia != ib) return ia < ib;
  if (a.provenance != b.provenance) return a.provenance < b.provenance;
  return a.weight < b.weight;
}

namespace {

bool FiniteNonNegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

std::vector<std::string> ValidateSpecs(const ApplicationSpec& app,
                                       const InfrastructureSpec& infra) {
  std::vector<std::string> out;
  auto budget = [&](std::string_view label, double v) {
    if (!FiniteNonNegative(v)) {
      out.push_back("application " + std::string(label) + " must be a finite non-negative number");
    }
  };
  budget("monetary_budget", app.monetary_budget);
  budget("carbon_budget", app.carbon_budget);
  budget("energy_budget", app.energy_budget);

  std::set<std::string> component_names;
  for (const auto& c : app.components) {
    if (!component_names.insert(c.name).second) {
      out.push_back("duplicate component name '" + c.name + "'");
    }
  }
  for (const auto& c : app.components) {
    if (c.flavours.empty()) out.push_back("component '" + c.name + "' has no flavours");
    std::set<std::string> flavour_names;
    std::set<int> importances;
    for (const auto& f : c.flavours) {
      const std::string where = "flavour '" + c.name + "." + f.name + "'";
      if (!flavour_names.insert(f.name).second) {
        out.push_back("duplicate flavour name '" + f.name + "' in component '" + c.name + "'");
      }
      if (f.importance <= 0) out.push_back(where + " importance must be positive");
      if (!importances.insert(f.importance).second) {
        out.push_back(where + " importance " + std::to_string(f.importance) +
                      " is not distinct within its component");
      }
      for (const auto& [r, q] : f.consumable_demands) {
        if (!FiniteNonNegative(q)) out.push_back(where + " demand '" + r + "' is negative");
      }
      if (!FiniteNonNegative(f.energy_w)) out.push_back(where + " energy_w is negative");
      for (const auto& dep : f.dependencies) {
        if (component_names.count(dep.component) == 0) {
          out.push_back(where + " depends on unknown component '" + dep.component + "'");
        } else if (dep.component == c.name) {
          out.push_back(where + " depends on its own component");
        }
        if (dep.min_availability && (*dep.min_availability < 0 || *dep.min_availability > 1)) {
          out.push_back(where + " dependency availability bound outside [0,1]");
        }
        if (dep.max_latency_ms && *dep.max_latency_ms < 0) {
          out.push_back(where + " dependency latency bound is negative");
        }
        if (!FiniteNonNegative(dep.traffic_w)) {
          out.push_back(where + " dependency traffic_w is negative");
        }
      }
    }
  }

  std::set<std::string> node_names;
  for (const auto& n : infra.nodes) {
    if (!node_names.insert(n.name).second) {
      out.push_back("duplicate node name '" + n.name + "'");
    }
    for (const auto& [r, q] : n.consumable_capacities) {
      if (!FiniteNonNegative(q)) {
        out.push_back("node '" + n.name + "' capacity '" + r + "' is negative");
      }
    }
    for (const auto& [r, cost] : n.unit_costs) {
      if (n.consumable_capacities.count(r) == 0) {
        out.push_back("node '" + n.name + "' has a unit cost for unknown resource '" + r + "'");
      }
      if (!FiniteNonNegative(cost)) {
        out.push_back("node '" + n.name + "' unit cost '" + r + "' is negative");
      }
    }
    if (!FiniteNonNegative(n.carbon_intensity)) {
      out.push_back("node '" + n.name + "' carbon_intensity is negative");
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& l : infra.links) {
    const std::string label = "link " + l.a + "-" + l.b;
    if (node_names.count(l.a) == 0) out.push_back(label + " references unknown node '" + l.a + "'");
    if (node_names.count(l.b) == 0) out.push_back(label + " references unknown node '" + l.b + "'");
    if (l.a == l.b) out.push_back(label + " is a self-link");
    auto key = std::minmax(l.a, l.b);
    if (!pairs.insert({key.first, key.second}).second) out.push_back(label + " is duplicated");
    if (!FiniteNonNegative(l.latency_ms)) out.push_back(label + " latency is negative");
    if (!(l.availability >= 0.0 && l.availability <= 1.0)) {
      out.push_back(label + " availability outside [0,1]");
    }
  }
  return out;
}

int MaxTotalImportance(const ApplicationSpec& app) {
  int total = 0;
  for (const auto& c : app.components) total += c.MaxImportance();
  return total;
}

bool AttributesSatisfied(const Flavour& flavour, const Node& node) {
  for (const auto& [attr, accepted] : flavour.attribute_requirements) {
    auto it = node.attributes.find(attr);
    if (it == node.attributes.end() || accepted.count(it->second) == 0) return false;
  }
  return true;
}

}  // namespace edgeplan
