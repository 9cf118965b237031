#include <algorithm>

#include "edgeplan/solver.hpp"

namespace edgeplan {

SolveOutcome BruteForceOracle(const PlacementProblem& problem, double max_candidates) {
  const auto& app = problem.app;
  const auto& infra = problem.infra;

  // Per-component domain: every attribute-feasible (flavour, node), plus
  // "undeployed" for non-mandatory components.
  std::vector<std::vector<std::optional<Placement>>> domains;
  double candidates = 1.0;
  for (const auto& c : app.components) {
    std::vector<std::optional<Placement>> dom;
    if (!c.mandatory) dom.push_back(std::nullopt);
    for (const auto& f : c.flavours) {
      for (const auto& n : infra.nodes) {
        if (AttributesSatisfied(f, n)) dom.push_back(Placement{f.name, n.name});
      }
    }
    candidates *= double(std::max<std::size_t>(dom.size(), 1));
    if (candidates > max_candidates) {
      throw OracleSizeExceeded("oracle: more than " + std::to_string(max_candidates) + " candidates");
    }
    domains.push_back(std::move(dom));
  }

  SolveOutcome out;
  std::vector<std::size_t> digit(domains.size(), 0);
  for (const auto& d : domains) {
    if (d.empty()) return out;
  }
  while (true) {
    ++out.explored;
    Deployment d;
    for (std::size_t i = 0; i < domains.size(); ++i) {
      if (const auto& p = domains[i][digit[i]]) d.assignments[app.components[i].name] = *p;
    }
    if (VerifyDeployment(d, problem).empty()) {
      const ObjectiveValue v = Evaluate(d, problem);
      if (!out.deployment || v > out.value ||
          (v == out.value && TieBreakPrecedes(d, *out.deployment, app))) {
        out.deployment = std::move(d);
        out.value = v;
      }
    }
    std::size_t k = 0;
    while (k < digit.size() && ++digit[k] == domains[k].size()) digit[k++] = 0;
    if (k == digit.size()) break;
  }
  if (out.deployment) out.status = SolveStatus::kOptimal;
  return out;
}

}  // namespace edgeplan
