#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "edgeplan/solver.hpp"
#include "limits.hpp"

namespace edgeplan {

std::string_view ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kUnsatisfiable:
      return "unsatisfiable";
    case SolveStatus::kTimedOut:
      return "timed-out";
  }
  return "?";
}

namespace {

struct Resolved {
  const Component* component;
  const Flavour* flavour;
  const Node* node;
};

std::string Label(const std::string& c, const Placement& p) {
  return c + "(" + p.flavour + ")@" + p.node;
}

}  // namespace

std::vector<std::string> VerifyAssignmentList(
    const std::vector<std::pair<std::string, Placement>>& assignments,
    const PlacementProblem& problem) {
  const auto& app = problem.app;
  const auto& infra = problem.infra;
  std::vector<std::string> out;

  // C1: at most one (flavour, node) per component, all names resolvable.
  std::map<std::string, Resolved> placed;
  std::map<std::string, Placement> placement_of;
  for (const auto& [c, p] : assignments) {
    const Component* comp = app.FindComponent(c);
    if (comp == nullptr) {
      out.push_back("C1: unknown component '" + c + "'");
      continue;
    }
    const Flavour* fl = comp->FindFlavour(p.flavour);
    const Node* node = infra.FindNode(p.node);
    if (fl == nullptr) out.push_back("C1: component '" + c + "' has no flavour '" + p.flavour + "'");
    if (node == nullptr) out.push_back("C1: unknown node '" + p.node + "' for component '" + c + "'");
    if (fl == nullptr || node == nullptr) continue;
    if (placed.count(c) != 0) {
      out.push_back("C1: component '" + c + "' is assigned more than once");
      continue;
    }
    placed[c] = Resolved{comp, fl, node};
    placement_of[c] = p;
  }

  // C2: mandatory components are deployed.
  for (const auto& c : app.components) {
    if (c.mandatory && placed.count(c.name) == 0) {
      out.push_back("C2: mandatory component '" + c.name + "' is not deployed");
    }
  }

  for (const auto& [c, r] : placed) {
    // C3: dependencies deployed with sufficient importance.
    for (const auto& dep : r.flavour->dependencies) {
      auto it = placed.find(dep.component);
      if (it == placed.end()) {
        out.push_back("C3: " + Label(c, placement_of[c]) + " requires undeployed '" + dep.component + "'");
      } else if (it->second.flavour->importance < dep.min_importance) {
        out.push_back("C3: " + Label(c, placement_of[c]) + " requires '" + dep.component +
                      "' with importance >= " + std::to_string(dep.min_importance) + ", got " +
                      it->second.flavour->name);
      }
    }
    // C4: non-essential components are used by some other deployed component.
    if (!r.component->mandatory) {
      bool used = std::any_of(placed.begin(), placed.end(), [&](const auto& other) {
        return other.first != c && other.second.flavour->DependencyOn(c) != nullptr;
      });
      if (!used) out.push_back("C4: non-mandatory '" + c + "' is deployed in isolation");
    }
    // C6: attribute requirements and node availability.
    if (!r.node->available) out.push_back("C6: node '" + r.node->name + "' is unavailable");
    if (!AttributesSatisfied(*r.flavour, *r.node)) {
      out.push_back("C6: node '" + r.node->name + "' does not satisfy the attributes of " +
                    Label(c, placement_of[c]));
    }
    // C7: direct links with the declared latency/availability bounds.
    for (const auto& dep : r.flavour->dependencies) {
      auto it = placed.find(dep.component);
      if (it == placed.end()) continue;
      const auto link = infra.LinkBetween(r.node->name, it->second.node->name);
      const std::string pair = c + "->" + dep.component;
      if (!link) {
        out.push_back("C7: no link between " + r.node->name + " and " + it->second.node->name +
                      " for " + pair);
        continue;
      }
      if (dep.max_latency_ms && !detail::WithinLimit(link->latency_ms, *dep.max_latency_ms)) {
        out.push_back("C7: latency of " + pair + " exceeds its bound");
      }
      if (dep.min_availability && !detail::WithinLimit(*dep.min_availability, link->availability)) {
        out.push_back("C7: availability of " + pair + " is below its bound");
      }
    }
  }

  // C5: capacities per node and resource.
  std::map<std::string, ResourceMap> usage;
  for (const auto& [c, r] : placed) {
    for (const auto& [res, q] : r.flavour->consumable_demands) usage[r.node->name][res] += q;
  }
  for (const auto& [node_name, used] : usage) {
    const Node* node = infra.FindNode(node_name);
    for (const auto& [res, q] : used) {
      auto it = node->consumable_capacities.find(res);
      const double cap = it == node->consumable_capacities.end() ? 0.0 : it->second;
      if (!detail::WithinLimit(q, cap)) {
        out.push_back("C5: node '" + node_name + "' " + res + " demand " + std::to_string(q) +
                      " exceeds capacity " + std::to_string(cap));
      }
    }
  }

  // C8 and C9: budgets.
  double cost = 0.0, energy_kwh = 0.0, carbon_g = 0.0;
  for (const auto& [c, r] : placed) {
    for (const auto& [res, q] : r.flavour->consumable_demands) {
      auto it = r.node->unit_costs.find(res);
      if (it != r.node->unit_costs.end()) cost += q * it->second;
    }
    const double e = r.flavour->energy_w * problem.round_hours / 1000.0;
    energy_kwh += e;
    carbon_g += e * r.node->carbon_intensity;
  }
  if (!detail::WithinLimit(cost, app.monetary_budget)) out.push_back("C8: monetary budget exceeded");
  if (!detail::WithinLimit(energy_kwh, app.energy_budget)) out.push_back("C9: energy budget exceeded");
  if (!detail::WithinLimit(carbon_g, app.carbon_budget)) out.push_back("C9: carbon budget exceeded");

  // C10: enforced soft constraints.
  for (const auto& sc : problem.enforced) {
    auto a = placement_of.find(sc.component);
    if (a == placement_of.end() || a->second.flavour != sc.flavour) continue;
    if (sc.kind == ConstraintKind::kAvoid) {
      if (a->second.node == sc.node) out.push_back("C10: violates " + sc.Identity());
      continue;
    }
    auto b = placement_of.find(sc.other_component);
    if (b == placement_of.end() || b->second.flavour != sc.other_flavour) continue;
    const bool same = a->second.node == b->second.node;
    if (sc.kind == ConstraintKind::kAffinity && !same) out.push_back("C10: violates " + sc.Identity());
    if (sc.kind == ConstraintKind::kAntiAffinity && same) out.push_back("C10: violates " + sc.Identity());
  }
  return out;
}

std::vector<std::string> VerifyDeployment(const Deployment& deployment, const PlacementProblem& problem) {
  std::vector<std::pair<std::string, Placement>> list(deployment.assignments.begin(),
                                                      deployment.assignments.end());
  return VerifyAssignmentList(list, problem);
}

ObjectiveValue Evaluate(const Deployment& deployment, const PlacementProblem& problem) {
  ObjectiveValue v;
  for (const auto& [c, p] : deployment.assignments) {
    const Component* comp = problem.app.FindComponent(c);
    const Flavour* fl = comp == nullptr ? nullptr : comp->FindFlavour(p.flavour);
    if (fl != nullptr) v.importance += fl->importance;
  }
  if (problem.objective_mode == ObjectiveMode::kMinimizeChanges && problem.previous) {
    v.kept = CountKept(*problem.previous, deployment);
  }
  return v;
}

bool TieBreakPrecedes(const Deployment& a, const Deployment& b, const ApplicationSpec& app) {
  std::vector<std::string> names;
  for (const auto& c : app.components) names.push_back(c.name);
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    const Placement* pa = a.Find(n);
    const Placement* pb = b.Find(n);
    const Placement ka = pa ? *pa : Placement{};
    const Placement kb = pb ? *pb : Placement{};
    if (ka != kb) return ka < kb;
  }
  return false;
}

}  // namespace edgeplan
