#include "edgeplan/energy_enhancer.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace edgeplan {

using nlohmann::json;

void EnergyProfile::Merge(double watts) { Merge(Single(watts)); }

void EnergyProfile::Merge(const EnergyProfile& other) {
  if (other.sample_count <= 0) return;
  if (sample_count <= 0) {
    *this = other;
    return;
  }
  min_w = std::min(min_w, other.min_w);
  max_w = std::max(max_w, other.max_w);
  const int n = sample_count + other.sample_count;
  avg_w = (avg_w * sample_count + other.avg_w * other.sample_count) / n;
  sample_count = n;
}

double AggregateCarbonIntensity(const std::vector<std::pair<int, double>>& samples, int window) {
  if (samples.empty()) throw InputError("carbon intensity aggregation needs at least one sample");
  if (window < 1) throw InputError("carbon intensity window must be >= 1");
  const std::size_t n = std::min<std::size_t>(samples.size(), std::size_t(window));
  double sum = 0.0;
  for (std::size_t i = samples.size() - n; i < samples.size(); ++i) sum += samples[i].second;
  return sum / double(n);
}

namespace {

SubjectEstimate Summarize(const std::map<int, double>& series, double tick_hours, double intensity) {
  SubjectEstimate e;
  if (series.empty()) return e;
  double sum = 0.0;
  e.profile = EnergyProfile::Single(series.begin()->second);
  for (const auto& [tick, w] : series) {
    e.profile.min_w = std::min(e.profile.min_w, w);
    e.profile.max_w = std::max(e.profile.max_w, w);
    sum += w;
  }
  e.active_ticks = int(series.size());
  e.profile.avg_w = sum / e.active_ticks;
  e.hours = e.active_ticks * tick_hours;
  e.intensity = intensity;
  e.emissions_g = e.profile.avg_w / 1000.0 * e.hours * intensity;
  return e;
}

}  // namespace

EmissionEstimates EstimateEmissions(const SimulationRecord& record, const InfrastructureSpec& infra, int window) {
  EmissionEstimates out;
  const double tick_hours = record.power.TickHours();
  for (const auto& n : infra.nodes) {
    auto it = record.power.carbon_intensity.find(n.name);
    if (it != record.power.carbon_intensity.end() && !it->second.empty()) {
      std::vector<std::pair<int, double>> samples(it->second.begin(), it->second.end());
      out.node_intensity[n.name] = AggregateCarbonIntensity(samples, window);
      out.intensity_samples[n.name] = std::move(samples);
    } else {
      out.node_intensity[n.name] = n.carbon_intensity;
    }
  }
  auto intensity_of = [&](const std::string& node) {
    auto it = out.node_intensity.find(node);
    return it == out.node_intensity.end() ? 0.0 : it->second;
  };

  std::map<std::string, const DeployedFact*> where;
  for (const auto& d : record.facts.deployed) where[d.component] = &d;

  for (const auto& [component, series] : record.power.component_w) {
    auto it = where.find(component);
    if (it == where.end() || series.empty()) continue;
    const DeployedFact& d = *it->second;
    out.services[{d.component, d.flavour, d.node}] = Summarize(series, tick_hours, intensity_of(d.node));
  }
  for (const auto& [pair, series] : record.power.connection_w) {
    auto a = where.find(pair.first);
    auto b = where.find(pair.second);
    if (a == where.end() || b == where.end() || series.empty()) continue;
    const double ci = (intensity_of(a->second->node) + intensity_of(b->second->node)) / 2.0;
    out.connections[{pair.first, a->second->flavour, pair.second, b->second->flavour}] =
        Summarize(series, tick_hours, ci);
  }
  for (const auto& [node, series] : record.power.node_w) {
    if (series.empty()) continue;
    out.nodes[node] = Summarize(series, tick_hours, intensity_of(node));
  }
  return out;
}

double ProjectedIntensity(const KnowledgeBase& kb, const Node& node, int window) {
  auto it = kb.node_carbon_history.find(node.name);
  if (it == kb.node_carbon_history.end() || it->second.empty()) return node.carbon_intensity;
  std::vector<std::pair<int, double>> samples;
  int t = 0;
  for (double v : it->second) samples.emplace_back(t++, v);
  return AggregateCarbonIntensity(samples, window);
}

std::optional<double> ObservedAveragePower(const KnowledgeBase& kb, const std::string& component,
                                           const std::string& flavour) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [key, profile] : kb.service_profiles) {
    if (std::get<0>(key) == component && std::get<1>(key) == flavour) {
      sum += profile.avg_w;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

void RankByWeight(std::vector<SoftConstraint>& constraints) {
  std::vector<std::pair<std::string, SoftConstraint>> keyed;
  for (auto& c : constraints) keyed.emplace_back(FormatConstraint(c), std::move(c));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.second.weight != b.second.weight) return a.second.weight > b.second.weight;
    return a.first < b.first;
  });
  constraints.clear();
  for (auto& [_, c] : keyed) constraints.push_back(std::move(c));
}

namespace {

double RoundWeight(double w) {
  const double r = std::round(w * 1000.0) / 1000.0;
  return std::clamp(r, 0.001, 1.0);
}

struct Candidate {
  SoftConstraint constraint;
  double impact = 0.0;
};

/// Nodes able to host (c, fc) as far as attributes and availability go.
std::vector<const Node*> FeasibleNodes(const Flavour& f, const InfrastructureSpec& infra) {
  std::vector<const Node*> out;
  for (const auto& n : infra.nodes) {
    if (n.available && AttributesSatisfied(f, n)) out.push_back(&n);
  }
  return out;
}

/// Drops the lowest-impact avoid of every (c, fc) whose avoids cover all of
/// its feasible nodes.
void ApplyFeasibilityGuard(std::vector<Candidate>& candidates, const ApplicationSpec& app,
                           const InfrastructureSpec& infra) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> avoids;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& sc = candidates[i].constraint;
    if (sc.kind == ConstraintKind::kAvoid) avoids[{sc.component, sc.flavour}].push_back(i);
  }
  std::vector<bool> drop(candidates.size(), false);
  for (const auto& [cf, idx] : avoids) {
    const Component* c = app.FindComponent(cf.first);
    const Flavour* f = c == nullptr ? nullptr : c->FindFlavour(cf.second);
    if (f == nullptr) continue;
    const auto feasible = FeasibleNodes(*f, infra);
    if (feasible.empty()) continue;
    bool covers_all = true;
    for (const Node* n : feasible) {
      bool avoided = std::any_of(idx.begin(), idx.end(),
                                 [&](std::size_t i) { return candidates[i].constraint.node == n->name; });
      if (!avoided) covers_all = false;
    }
    if (!covers_all) continue;
    std::optional<std::size_t> greenest;
    for (std::size_t i : idx) {
      const auto& a = candidates[i];
      const bool on_feasible = std::any_of(feasible.begin(), feasible.end(),
                                           [&](const Node* n) { return n->name == a.constraint.node; });
      if (!on_feasible) continue;
      if (!greenest) {
        greenest = i;
        continue;
      }
      const auto& g = candidates[*greenest];
      if (a.impact < g.impact || (a.impact == g.impact && a.constraint.node < g.constraint.node)) greenest = i;
    }
    drop[*greenest] = true;
  }
  std::vector<Candidate> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(candidates[i]));
  }
  candidates = std::move(kept);
}

std::vector<SoftConstraint> Finish(std::vector<Candidate>& candidates, std::size_t top_k, bool renormalize) {
  double max_impact = 0.0;
  for (const auto& c : candidates) max_impact = std::max(max_impact, c.impact);
  std::vector<SoftConstraint> out;
  for (auto& c : candidates) {
    if (renormalize) c.constraint.weight = max_impact > 0 ? RoundWeight(c.impact / max_impact) : 1.0;
    out.push_back(c.constraint);
  }
  RankByWeight(out);
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

std::vector<Candidate> ComputeCandidates(const KnowledgeBase& kb, const ApplicationSpec& app,
                                         const InfrastructureSpec& infra, const Deployment& current,
                                         const EnergyThresholds& th) {
  std::vector<Candidate> out;
  for (const auto& c : app.components) {
    for (const auto& f : c.flavours) {
      const auto avg = ObservedAveragePower(kb, c.name, f.name);
      if (!avg) continue;
      for (const Node* n : FeasibleNodes(f, infra)) {
        const double impact = *avg / 1000.0 * th.round_hours * ProjectedIntensity(kb, *n, th.carbon_window);
        if (impact > th.service_g) {
          out.push_back({SoftConstraint::Avoid(c.name, f.name, n->name, Provenance::kEnergy), impact});
        }
      }
    }
  }
  for (const auto& [key, profile] : kb.connection_profiles) {
    const auto& [c, fc, s, fs] = key;
    const Placement* pc = current.Find(c);
    const Placement* ps = current.Find(s);
    if (pc == nullptr || ps == nullptr || pc->flavour != fc || ps->flavour != fs) continue;
    const Node* nc = infra.FindNode(pc->node);
    const Node* ns = infra.FindNode(ps->node);
    if (nc == nullptr || ns == nullptr) continue;
    const double ci =
        (ProjectedIntensity(kb, *nc, th.carbon_window) + ProjectedIntensity(kb, *ns, th.carbon_window)) / 2.0;
    const double impact = profile.avg_w / 1000.0 * th.round_hours * ci;
    if (impact > th.connection_g) {
      out.push_back({SoftConstraint::Affinity(c, fc, s, fs, Provenance::kEnergy), impact});
    }
  }
  // A connection observed in both directions yields one affinity.
  std::map<std::string, Candidate> unique;
  for (auto& cand : out) {
    auto [it, inserted] = unique.emplace(cand.constraint.Identity(), cand);
    if (!inserted) it->second.impact = std::max(it->second.impact, cand.impact);
  }
  out.clear();
  for (auto& [_, cand] : unique) out.push_back(std::move(cand));
  return out;
}

}  // namespace

std::vector<SoftConstraint> GenerateEnergyConstraints(const KnowledgeBase& kb, const ApplicationSpec& app,
                                                      const InfrastructureSpec& infra, const Deployment& current,
                                                      const EnergyThresholds& thresholds) {
  auto candidates = ComputeCandidates(kb, app, infra, current, thresholds);
  ApplyFeasibilityGuard(candidates, app, infra);
  return Finish(candidates, thresholds.top_k, true);
}

void MergeObservations(KnowledgeBase& kb, const EmissionEstimates& estimates) {
  for (const auto& [key, e] : estimates.services) kb.service_profiles[key].Merge(e.profile.avg_w);
  for (const auto& [key, e] : estimates.connections) kb.connection_profiles[key].Merge(e.profile.avg_w);
  for (const auto& [node, e] : estimates.nodes) kb.node_profiles[node].Merge(e.profile.avg_w);
  for (const auto& [node, samples] : estimates.intensity_samples) {
    auto& history = kb.node_carbon_history[node];
    for (const auto& [_, v] : samples) history.push_back(v);
    while (history.size() > KnowledgeBase::kCarbonHistoryLimit) history.pop_front();
  }
  ++kb.rounds;
}

void RememberConstraints(KnowledgeBase& kb, const std::vector<SoftConstraint>& fresh,
                         const std::map<std::string, double>& impacts) {
  std::set<std::string> regenerated;
  for (const auto& sc : fresh) {
    const std::string id = sc.Identity();
    regenerated.insert(id);
    auto it = impacts.find(id);
    StoredConstraint& stored = kb.stored_constraints[id];
    stored.constraint = sc;
    stored.memory_weight = 1.0;
    if (it != impacts.end()) stored.estimated_impact_g = it->second;
  }
  for (auto it = kb.stored_constraints.begin(); it != kb.stored_constraints.end();) {
    if (regenerated.count(it->first) == 0) it->second.memory_weight *= KnowledgeBase::kDecay;
    if (it->second.memory_weight <= KnowledgeBase::kEvictAtOrBelow) {
      it = kb.stored_constraints.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<SoftConstraint> RetrieveConstraints(const KnowledgeBase& kb, const std::vector<SoftConstraint>& fresh,
                                                const ApplicationSpec& app, const InfrastructureSpec& infra,
                                                const EnergyThresholds& thresholds) {
  std::map<std::string, Candidate> merged;
  auto impact_of = [&](const std::string& id) {
    auto it = kb.stored_constraints.find(id);
    return it == kb.stored_constraints.end() ? 0.0 : it->second.estimated_impact_g;
  };
  for (const auto& sc : fresh) merged[sc.Identity()] = Candidate{sc, impact_of(sc.Identity())};
  for (const auto& [id, stored] : kb.stored_constraints) {
    if (stored.memory_weight < KnowledgeBase::kRetrieveAtOrAbove) continue;
    auto [it, inserted] = merged.emplace(id, Candidate{stored.constraint, stored.estimated_impact_g});
    if (!inserted) it->second.constraint.weight = std::max(it->second.constraint.weight, stored.constraint.weight);
  }
  std::vector<Candidate> candidates;
  for (auto& [_, c] : merged) candidates.push_back(std::move(c));
  // Stored avoids naming nodes absent from the infrastructure are dropped.
  candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                  [&](const Candidate& c) {
                                    if (c.constraint.kind != ConstraintKind::kAvoid) return false;
                                    const Node* n = infra.FindNode(c.constraint.node);
                                    return n == nullptr;
                                  }),
                   candidates.end());
  ApplyFeasibilityGuard(candidates, app, infra);
  return Finish(candidates, thresholds.top_k, false);
}

EnergyRoundResult RunEnergyEnhancer(KnowledgeBase& kb, const SimulationRecord& record, const ApplicationSpec& app,
                                    const InfrastructureSpec& infra, const Deployment& current,
                                    const EnergyThresholds& thresholds) {
  EnergyRoundResult r;
  r.estimates = EstimateEmissions(record, infra, thresholds.carbon_window);
  MergeObservations(kb, r.estimates);
  auto candidates = ComputeCandidates(kb, app, infra, current, thresholds);
  ApplyFeasibilityGuard(candidates, app, infra);
  std::map<std::string, double> impacts;
  for (const auto& c : candidates) impacts[c.constraint.Identity()] = c.impact;
  r.fresh = Finish(candidates, thresholds.top_k, true);
  RememberConstraints(kb, r.fresh, impacts);
  r.constraints = RetrieveConstraints(kb, r.fresh, app, infra, thresholds);
  return r;
}

ApplicationSpec WithObservedEnergy(const ApplicationSpec& app, const KnowledgeBase& kb) {
  ApplicationSpec out = app;
  for (auto& c : out.components) {
    for (auto& f : c.flavours) {
      if (auto avg = ObservedAveragePower(kb, c.name, f.name)) f.energy_w = *avg;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

json ProfileJson(const EnergyProfile& p) {
  return json{{"min_w", p.min_w}, {"max_w", p.max_w}, {"avg_w", p.avg_w}, {"samples", p.sample_count}};
}

EnergyProfile ProfileFrom(const json& j) {
  EnergyProfile p;
  p.min_w = j.at("min_w").get<double>();
  p.max_w = j.at("max_w").get<double>();
  p.avg_w = j.at("avg_w").get<double>();
  p.sample_count = j.at("samples").get<int>();
  if (p.sample_count < 1 || p.min_w > p.avg_w + 1e-9 || p.avg_w > p.max_w + 1e-9 || p.min_w < 0) {
    throw InputError("knowledge base: inconsistent energy profile");
  }
  return p;
}

}  // namespace

std::string KnowledgeBase::ToJson() const {
  json j;
  j["version"] = 1;
  j["rounds"] = rounds;
  j["services"] = json::array();
  for (const auto& [k, p] : service_profiles) {
    json e = ProfileJson(p);
    e["component"] = std::get<0>(k);
    e["flavour"] = std::get<1>(k);
    e["node"] = std::get<2>(k);
    j["services"].push_back(e);
  }
  j["connections"] = json::array();
  for (const auto& [k, p] : connection_profiles) {
    json e = ProfileJson(p);
    e["component"] = std::get<0>(k);
    e["flavour"] = std::get<1>(k);
    e["other"] = std::get<2>(k);
    e["other_flavour"] = std::get<3>(k);
    j["connections"].push_back(e);
  }
  j["nodes"] = json::object();
  for (const auto& [n, p] : node_profiles) j["nodes"][n] = ProfileJson(p);
  j["carbon_history"] = json::object();
  for (const auto& [n, h] : node_carbon_history) j["carbon_history"][n] = std::vector<double>(h.begin(), h.end());
  j["constraints"] = json::array();
  for (const auto& [id, s] : stored_constraints) {
    j["constraints"].push_back({{"text", FormatConstraint(s.constraint)},
                                {"impact_g", s.estimated_impact_g},
                                {"memory_weight", s.memory_weight}});
  }
  return j.dump(2) + "\n";
}

KnowledgeBase KnowledgeBase::FromJson(std::string_view text) {
  KnowledgeBase kb;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return kb;
  try {
    const json j = json::parse(text);
    kb.rounds = j.value("rounds", 0);
    for (const auto& e : j.value("services", json::array())) {
      kb.service_profiles[{e.at("component").get<std::string>(), e.at("flavour").get<std::string>(),
                           e.at("node").get<std::string>()}] = ProfileFrom(e);
    }
    for (const auto& e : j.value("connections", json::array())) {
      kb.connection_profiles[{e.at("component").get<std::string>(), e.at("flavour").get<std::string>(),
                              e.at("other").get<std::string>(), e.at("other_flavour").get<std::string>()}] =
          ProfileFrom(e);
    }
    const json nodes = j.value("nodes", json::object());
    for (const auto& [n, p] : nodes.items()) kb.node_profiles[n] = ProfileFrom(p);
    const json history = j.value("carbon_history", json::object());
    for (const auto& [n, h] : history.items()) {
      auto values = h.get<std::vector<double>>();
      kb.node_carbon_history[n] = std::deque<double>(values.begin(), values.end());
    }
    for (const auto& e : j.value("constraints", json::array())) {
      auto parsed = ParseConstraints(e.at("text").get<std::string>(), Provenance::kEnergy);
      if (parsed.size() != 1) throw InputError("knowledge base: constraint entry must hold one constraint");
      StoredConstraint s{parsed.front(), e.value("impact_g", 0.0), e.at("memory_weight").get<double>()};
      if (!(s.memory_weight > 0.0 && s.memory_weight <= 1.0)) {
        throw InputError("knowledge base: memory_weight outside (0,1]");
      }
      kb.stored_constraints[s.constraint.Identity()] = s;
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("knowledge base: ") + e.what());
  }
  return kb;
}

}  // namespace edgeplan
