#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "edgeplan/model.hpp"
#include "edgeplan/solver.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan::testing {

inline std::filesystem::path SourcePath(const std::string& relative) {
  return std::filesystem::path(EDGEPLAN_SOURCE_DIR) / relative;
}

inline std::string ReadText(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

inline ApplicationSpec FixtureApp() { return ParseApplication(ReadText(SourcePath("data/fixture/application.yaml"))); }

inline InfrastructureSpec FixtureInfra() {
  return ParseInfrastructure(ReadText(SourcePath("data/fixture/infrastructure.yaml")));
}

inline PlacementProblem FixtureProblem() {
  PlacementProblem p;
  p.app = FixtureApp();
  p.infra = FixtureInfra();
  return p;
}

/// Round-0 placement of the fixture.
inline Deployment FixtureRound0() {
  return ParseDeployment(
      "api large private1\n"
      "database large private5\n"
      "etcd large private1\n"
      "frontend large public1\n"
      "identity_provider large private3\n"
      "load_balancer large public1\n"
      "redis large private3\n");
}

/// Small random instance: up to `max_components` components with up to
/// `max_flavours` flavours over up to `max_nodes` nodes, with random
/// capacities, attributes, dependencies, links and budgets.
inline PlacementProblem RandomProblem(std::mt19937_64& rng, int max_components = 3, int max_flavours = 3,
                                      int max_nodes = 4) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  PlacementProblem p;
  const int nc = pick(1, max_components);
  const int nn = pick(1, max_nodes);
  for (int j = 0; j < nn; ++j) {
    Node n;
    n.name = "n" + std::to_string(j);
    n.consumable_capacities = {{"cpu", double(pick(0, 8))}, {"ram", double(pick(0, 8))}};
    n.attributes = {{"zone", pick(0, 1) ? "a" : "b"}};
    n.unit_costs = {{"cpu", double(pick(0, 3))}};
    n.carbon_intensity = double(pick(0, 500));
    n.available = pick(0, 9) != 0;
    p.infra.nodes.push_back(n);
  }
  for (int a = 0; a < nn; ++a) {
    for (int b = a + 1; b < nn; ++b) {
      if (pick(0, 3) == 0) continue;
      p.infra.links.push_back({p.infra.nodes[a].name, p.infra.nodes[b].name, double(pick(1, 20)), real(0.9, 1.0)});
    }
  }
  for (int i = 0; i < nc; ++i) {
    Component c;
    c.name = std::string(1, char('a' + i));
    c.mandatory = pick(0, 2) != 0;
    const int nf = pick(1, max_flavours);
    std::vector<int> imps = {1, 2, 3, 4, 5};
    std::shuffle(imps.begin(), imps.end(), rng);
    for (int k = 0; k < nf; ++k) {
      Flavour f;
      f.name = "f" + std::to_string(k);
      f.importance = imps[k];
      f.consumable_demands = {{"cpu", double(pick(0, 5))}, {"ram", double(pick(0, 5))}};
      if (pick(0, 3) == 0) f.attribute_requirements["zone"] = {pick(0, 1) ? "a" : "b"};
      f.energy_w = double(pick(0, 40));
      for (int t = 0; t < nc; ++t) {
        if (t == i || pick(0, 2) != 0) continue;
        Dependency d;
        d.component = std::string(1, char('a' + t));
        d.min_importance = pick(0, 3);
        if (pick(0, 2) == 0) d.max_latency_ms = double(pick(1, 20));
        if (pick(0, 3) == 0) d.min_availability = real(0.9, 1.0);
        f.dependencies.push_back(d);
      }
      c.flavours.push_back(f);
    }
    p.app.components.push_back(c);
  }
  if (pick(0, 2) == 0) p.app.monetary_budget = double(pick(0, 30));
  if (pick(0, 3) == 0) p.app.carbon_budget = double(pick(0, 20));
  if (pick(0, 3) == 0) p.app.energy_budget = real(0.0, 0.2);
  // Soft constraints enforced as hard.
  const int ns = pick(0, 2);
  for (int s = 0; s < ns; ++s) {
    const auto& c = p.app.components[pick(0, nc - 1)];
    const auto& f = c.flavours[pick(0, int(c.flavours.size()) - 1)];
    const int kind = pick(0, 2);
    if (kind == 0 || nc < 2) {
      p.enforced.push_back(SoftConstraint::Avoid(c.name, f.name, p.infra.nodes[pick(0, nn - 1)].name));
    } else {
      const Component* o = &p.app.components[pick(0, nc - 1)];
      if (o->name == c.name) continue;
      const auto& of = o->flavours[pick(0, int(o->flavours.size()) - 1)];
      p.enforced.push_back(kind == 1 ? SoftConstraint::Affinity(c.name, f.name, o->name, of.name)
                                     : SoftConstraint::AntiAffinity(c.name, f.name, o->name, of.name));
    }
  }
  return p;
}

/// A random deployment of `p` (possibly invalid) used as `previous`.
inline Deployment RandomDeployment(std::mt19937_64& rng, const PlacementProblem& p) {
  Deployment d;
  for (const auto& c : p.app.components) {
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) continue;
    const auto& f = c.flavours[std::uniform_int_distribution<std::size_t>(0, c.flavours.size() - 1)(rng)];
    const auto& n = p.infra.nodes[std::uniform_int_distribution<std::size_t>(0, p.infra.nodes.size() - 1)(rng)];
    d.assignments[c.name] = {f.name, n.name};
  }
  return d;
}

}  // namespace edgeplan::testing
