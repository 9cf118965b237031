#include "edgeplan/harmonizer.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "edgeplan/energy_enhancer.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan {

std::string_view ToString(Priority priority) {
  switch (priority) {
    case Priority::kFailure:
      return "failure";
    case Priority::kEnergy:
      return "energy";
    case Priority::kNone:
      return "none";
  }
  return "none";
}

std::optional<Priority> ParsePriority(std::string_view text) {
  if (text == "failure") return Priority::kFailure;
  if (text == "energy") return Priority::kEnergy;
  if (text == "none") return Priority::kNone;
  return std::nullopt;
}

namespace {

using PairKey = std::tuple<std::string, std::string, std::string, std::string>;

PairKey KeyOf(const SoftConstraint& sc) {
  const SoftConstraint n = sc.Normalized();
  return {n.component, n.flavour, n.other_component, n.other_flavour};
}

void Order(std::vector<SoftConstraint>& cs) {
  std::vector<SoftConstraint> failure, energy;
  for (auto& c : cs) (c.provenance == Provenance::kFailure ? failure : energy).push_back(std::move(c));
  std::sort(failure.begin(), failure.end(),
            [](const SoftConstraint& a, const SoftConstraint& b) { return FormatConstraint(a) < FormatConstraint(b); });
  RankByWeight(energy);
  cs = std::move(failure);
  cs.insert(cs.end(), energy.begin(), energy.end());
}

}  // namespace

HarmonizedConstraints Harmonize(const std::vector<SoftConstraint>& failure,
                                const std::vector<SoftConstraint>& energy, Priority priority) {
  // One entry per identity. A constraint suggested by both enhancers keeps
  // the prioritized side's copy.
  std::map<std::string, SoftConstraint> unique;
  auto add = [&](const std::vector<SoftConstraint>& list, Provenance p) {
    for (SoftConstraint sc : list) {
      sc.provenance = p;
      sc = sc.IsPairwise() ? sc.Normalized() : sc;
      auto [it, inserted] = unique.emplace(sc.Identity(), sc);
      if (inserted) continue;
      if (it->second.provenance == p) {
        it->second.weight = std::max(it->second.weight, sc.weight);
      } else if (priority == Priority::kEnergy && p == Provenance::kEnergy) {
        it->second = sc;
      }
    }
  };
  add(failure, Provenance::kFailure);
  add(energy, Provenance::kEnergy);

  std::map<PairKey, std::vector<std::string>> affinity, anti;
  for (const auto& [id, sc] : unique) {
    if (sc.kind == ConstraintKind::kAffinity) affinity[KeyOf(sc)].push_back(id);
    if (sc.kind == ConstraintKind::kAntiAffinity) anti[KeyOf(sc)].push_back(id);
  }

  std::map<std::string, std::string> drop_reason;
  for (const auto& [key, aff_ids] : affinity) {
    auto it = anti.find(key);
    if (it == anti.end()) continue;
    for (const auto& a_id : aff_ids) {
      for (const auto& n_id : it->second) {
        const SoftConstraint& a = unique.at(a_id);
        const SoftConstraint& n = unique.at(n_id);
        if (a.provenance == n.provenance) {
          const std::string why = "contradicts " + std::string(ToString(n.provenance)) + " constraint ";
          drop_reason.emplace(a_id, why + FormatConstraint(n));
          drop_reason.emplace(n_id, why + FormatConstraint(a));
          continue;
        }
        const SoftConstraint& from_energy = a.provenance == Provenance::kFailure ? n : a;
        const SoftConstraint& from_failure = a.provenance == Provenance::kFailure ? a : n;
        switch (priority) {
          case Priority::kFailure:
            drop_reason.emplace(from_energy.Identity(),
                                "conflicts with prioritized failure constraint " + FormatConstraint(from_failure));
            break;
          case Priority::kEnergy:
            drop_reason.emplace(from_failure.Identity(),
                                "conflicts with prioritized energy constraint " + FormatConstraint(from_energy));
            break;
          case Priority::kNone:
            drop_reason.emplace(a_id, "conflicts with " + FormatConstraint(n) + " and no priority is set");
            drop_reason.emplace(n_id, "conflicts with " + FormatConstraint(a) + " and no priority is set");
            break;
        }
      }
    }
  }

  HarmonizedConstraints out;
  std::vector<SoftConstraint> dropped;
  for (const auto& [id, sc] : unique) {
    if (drop_reason.count(id) != 0) {
      dropped.push_back(sc);
    } else {
      out.kept.push_back(sc);
    }
  }
  Order(out.kept);
  Order(dropped);
  for (auto& sc : dropped) out.dropped.push_back({sc, drop_reason.at(sc.Identity())});
  return out;
}

std::string EmitDroppedReport(const std::vector<DroppedConstraint>& dropped) {
  std::string out;
  for (const auto& d : dropped) out += "% dropped: " + d.reason + "\n" + FormatConstraint(d.constraint) + "\n";
  return out;
}

}  // namespace edgeplan
