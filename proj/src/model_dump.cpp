#include <sstream>

#include "edgeplan/solver.hpp"
#include "edgeplan/spec_io.hpp"
#include "text_util.hpp"

namespace edgeplan {

std::string DumpModel(const PlacementProblem& problem) {
  using detail::FormatNumber;
  const auto& app = problem.app;
  const auto& infra = problem.infra;
  std::ostringstream os;
  os << "% placement model for " << (app.name.empty() ? "application" : app.name) << "\n";
  os << "% objective: "
     << (problem.objective_mode == ObjectiveMode::kMinimizeChanges ? "maximize kept, then importance"
                                                                    : "maximize importance")
     << "\n";
  os << "% round_hours " << FormatNumber(problem.round_hours) << "\n\n";

  for (const auto& c : app.components) {
    os << "component(" << c.name << "," << (c.mandatory ? "mandatory" : "optional") << ").\n";
    for (const auto& f : c.flavours) {
      os << "  flavour(" << c.name << "," << f.name << ",importance=" << f.importance
         << ",energy_w=" << FormatNumber(f.energy_w) << ").\n";
      for (const auto& [r, q] : f.consumable_demands) {
        os << "    demand(" << r << "," << FormatNumber(q) << ").\n";
      }
      for (const auto& [attr, values] : f.attribute_requirements) {
        os << "    requires(" << attr << ",[";
        bool first = true;
        for (const auto& v : values) {
          os << (first ? "" : ",") << v;
          first = false;
        }
        os << "]).\n";
      }
      for (const auto& d : f.dependencies) {
        os << "    uses(" << d.component << ",min_importance=" << d.min_importance;
        if (d.max_latency_ms) os << ",max_latency_ms=" << FormatNumber(*d.max_latency_ms);
        if (d.min_availability) os << ",min_availability=" << FormatNumber(*d.min_availability);
        os << ").\n";
      }
    }
  }
  os << "\n";
  for (const auto& n : infra.nodes) {
    os << "node(" << n.name << "," << (n.available ? "available" : "unavailable")
       << ",carbon_intensity=" << FormatNumber(n.carbon_intensity) << ").\n";
    for (const auto& [r, q] : n.consumable_capacities) os << "  capacity(" << r << "," << FormatNumber(q) << ").\n";
    for (const auto& [a, v] : n.attributes) os << "  attribute(" << a << "," << v << ").\n";
    for (const auto& [r, q] : n.unit_costs) os << "  unit_cost(" << r << "," << FormatNumber(q) << ").\n";
  }
  for (const auto& l : infra.links) {
    os << "link(" << l.a << "," << l.b << ",latency_ms=" << FormatNumber(l.latency_ms)
       << ",availability=" << FormatNumber(l.availability) << ").\n";
  }
  os << "\nbudget(monetary," << FormatNumber(app.monetary_budget) << ").\n";
  os << "budget(energy_kwh," << FormatNumber(app.energy_budget) << ").\n";
  os << "budget(carbon_g," << FormatNumber(app.carbon_budget) << ").\n";
  if (problem.previous) {
    os << "\n";
    for (const auto& [c, p] : problem.previous->assignments) {
      os << "previous(" << c << "," << p.flavour << "," << p.node << ").\n";
    }
  }
  if (!problem.enforced.empty()) {
    os << "\n% enforced soft constraints\n";
    for (const auto& sc : problem.enforced) os << FormatConstraint(sc) << "\n";
  }
  return os.str();
}

}  // namespace edgeplan
