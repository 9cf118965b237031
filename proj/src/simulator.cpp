#include "edgeplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "limits.hpp"
#include "text_util.hpp"

namespace edgeplan {

double Scenario::DeltaAt(int tick) const {
  if (const auto* c = std::get_if<ConstantShape>(&shape)) {
    return tick >= c->from && tick <= c->to ? c->delta : 0.0;
  }
  const auto& s = std::get<SinusoidalShape>(shape);
  if (tick < s.from || tick > s.to) return 0.0;
  return s.amplitude * std::sin(2.0 * std::numbers::pi * double(tick - s.from) / double(s.period));
}

int Scenario::From() const {
  return std::visit([](const auto& s) { return s.from; }, shape);
}

int Scenario::To() const {
  return std::visit([](const auto& s) { return s.to; }, shape);
}

void ValidateScenario(const Scenario& s, const ApplicationSpec& app, const InfrastructureSpec& infra, int ticks) {
  const auto& t = s.target;
  auto need_node = [&](const std::string& n) {
    if (infra.FindNode(n) == nullptr) throw InputError("scenario targets unknown node '" + n + "'");
  };
  switch (t.kind) {
    case TargetKind::kNodeResource:
      need_node(t.node);
      if (t.resource.empty()) throw InputError("scenario on node '" + t.node + "' names no resource");
      break;
    case TargetKind::kNodeCarbon:
    case TargetKind::kNodeConnectivity:
      need_node(t.node);
      break;
    case TargetKind::kLinkCongestion:
      need_node(t.node);
      need_node(t.other);
      if (t.node == t.other || !infra.LinkBetween(t.node, t.other)) {
        throw InputError("scenario targets unknown link " + t.node + "-" + t.other);
      }
      break;
    case TargetKind::kFlavourEnergy: {
      const Component* c = app.FindComponent(t.component);
      if (c == nullptr) throw InputError("scenario targets unknown component '" + t.component + "'");
      if (c->FindFlavour(t.flavour) == nullptr) {
        throw InputError("scenario targets unknown flavour '" + t.flavour + "' of '" + t.component + "'");
      }
      break;
    }
  }
  if (s.From() < 0 || s.From() > s.To() || s.To() > ticks) {
    throw InputError("scenario range [" + std::to_string(s.From()) + ", " + std::to_string(s.To()) +
                     "] does not fit in " + std::to_string(ticks) + " ticks");
  }
  if (const auto* sin = std::get_if<SinusoidalShape>(&s.shape)) {
    if (sin->period <= 0) throw InputError("sinusoidal scenario needs a positive period");
    if ((2 * (sin->to - sin->from)) % sin->period != 0) {
      throw InputError("sinusoidal scenario span must be a whole number of half periods");
    }
  }
}

std::vector<std::vector<std::string>> ParsePolicyExpression(std::string_view text) {
  using detail::Trim;
  std::vector<std::vector<std::string>> out;
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("update policy '" + std::string(text) + "': " + what);
  };
  auto skip_ws = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  skip_ws();
  if (pos == text.size()) return out;
  while (true) {
    skip_ws();
    if (pos >= text.size() || text[pos] != '[') fail("expected '['");
    const auto close = text.find(']', pos);
    if (close == std::string_view::npos) fail("missing ']'");
    std::vector<std::string> names;
    std::string_view inner = text.substr(pos + 1, close - pos - 1);
    std::size_t start = 0;
    while (start <= inner.size()) {
      const auto comma = inner.find(',', start);
      auto item = Trim(inner.substr(start, comma == std::string_view::npos ? inner.npos : comma - start));
      if (!item.empty()) {
        names.emplace_back(item);
      } else if (comma != std::string_view::npos || start > 0) {
        fail("empty scenario name");
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    pos = close + 1;
    skip_ws();
    int repeat = 1;
    if (pos < text.size() && text[pos] == '*') {
      ++pos;
      skip_ws();
      std::size_t end = pos;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      auto n = detail::ParseInt(text.substr(pos, end - pos));
      if (!n || *n < 0) fail("expected a repeat count after '*'");
      repeat = *n;
      pos = end;
    }
    for (int i = 0; i < repeat; ++i) out.push_back(names);
    skip_ws();
    if (pos == text.size()) break;
    if (text[pos] != '+') fail("expected '+'");
    ++pos;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Hosted {
  const Component* component;
  const Flavour* flavour;
  const Node* node;
};

std::string LinkKey(const std::string& a, const std::string& b) { return a < b ? a + "|" + b : b + "|" + a; }

}  // namespace

RoundTrace RunRound(const Deployment& deployment, const ApplicationSpec& app, const InfrastructureSpec& infra,
                    const std::vector<Scenario>& scenarios, const RoundOptions& options,
                    const Deployment* previous) {
  if (options.ticks < 1) throw InputError("a round needs at least one tick");
  for (const auto& s : scenarios) ValidateScenario(s, app, infra, options.ticks);

  RoundTrace trace;
  trace.deployment = deployment;
  trace.ticks = options.ticks;
  trace.tick_minutes = options.tick_minutes;
  auto& facts = trace.record.facts;
  auto& power = trace.record.power;
  power.ticks = options.ticks;
  power.tick_minutes = options.tick_minutes;
  const double tick_hours = options.tick_minutes / 60.0;

  std::map<std::string, Hosted> hosted;
  std::map<std::string, std::vector<std::string>> on_node;
  for (const auto& [c, p] : deployment.assignments) {
    const Component* comp = app.FindComponent(c);
    const Flavour* fl = comp == nullptr ? nullptr : comp->FindFlavour(p.flavour);
    const Node* node = infra.FindNode(p.node);
    if (fl == nullptr || node == nullptr) throw InputError("deployment references unknown " + c + " placement");
    hosted[c] = Hosted{comp, fl, node};
    on_node[p.node].push_back(c);
    facts.deployed.insert({c, p.flavour, p.node});
  }
  bool mandatory_missing = false;
  for (const auto& c : app.components) {
    if (c.mandatory && hosted.count(c.name) == 0) mandatory_missing = true;
  }

  struct Edge {
    std::string consumer, provider;
    double traffic_w;
  };
  std::vector<Edge> edges;
  for (const auto& [c, h] : hosted) {
    for (const auto& dep : h.flavour->dependencies) {
      auto it = hosted.find(dep.component);
      if (it != hosted.end() && it->second.node != h.node) edges.push_back({c, dep.component, dep.traffic_w});
    }
  }

  const int max_importance = MaxTotalImportance(app);
  int importance = 0;
  for (const auto& [_, h] : hosted) importance += h.flavour->importance;
  trace.metrics.app_quality_pct = max_importance > 0 ? 100.0 * importance / max_importance : 0.0;
  trace.metrics.changes = previous == nullptr ? 0 : CountChanges(*previous, deployment);

  double energy_kwh = 0.0;
  double co2_g = 0.0;
  for (int t = 0; t < options.ticks; ++t) {
    // Effective quantities at this tick.
    std::map<std::pair<std::string, std::string>, double> cap_delta;
    std::map<std::string, double> ci_delta, connectivity;
    std::map<std::string, double> congestion;
    std::map<std::pair<std::string, std::string>, double> energy_delta;
    for (const auto& s : scenarios) {
      const double d = s.DeltaAt(t);
      if (d == 0.0) continue;
      const auto& tg = s.target;
      switch (tg.kind) {
        case TargetKind::kNodeResource:
          cap_delta[{tg.node, tg.resource}] += d;
          break;
        case TargetKind::kNodeCarbon:
          ci_delta[tg.node] += d;
          break;
        case TargetKind::kNodeConnectivity:
          connectivity[tg.node] += d;
          break;
        case TargetKind::kLinkCongestion:
          congestion[LinkKey(tg.node, tg.other)] += d;
          break;
        case TargetKind::kFlavourEnergy:
          energy_delta[{tg.component, tg.flavour}] += d;
          break;
      }
    }

    std::set<std::string> disconnected;
    for (const auto& n : infra.nodes) {
      auto it = connectivity.find(n.name);
      if (it != connectivity.end() && 1.0 + it->second <= 0.0) {
        disconnected.insert(n.name);
        facts.disconnections.insert({n.name, t});
      }
    }
    for (const auto& l : infra.links) {
      auto it = congestion.find(LinkKey(l.a, l.b));
      if (it != congestion.end() && it->second > 0.0) {
        facts.congestions.insert({l.a, l.b, t});
        facts.congestions.insert({l.b, l.a, t});
      }
    }

    std::set<std::string> unreachable;
    for (const auto& [node_name, comps] : on_node) {
      const Node* node = infra.FindNode(node_name);
      std::map<std::string, double> demand;
      for (const auto& c : comps) {
        for (const auto& [r, q] : hosted[c].flavour->consumable_demands) demand[r] += q;
      }
      bool overloaded = false;
      for (const auto& [r, q] : demand) {
        if (q <= 0.0) continue;
        auto cit = node->consumable_capacities.find(r);
        double cap = cit == node->consumable_capacities.end() ? 0.0 : cit->second;
        auto dit = cap_delta.find({node_name, r});
        if (dit != cap_delta.end()) cap += dit->second;
        cap = std::max(cap, 0.0);
        if (detail::WithinLimit(q, cap)) continue;
        overloaded = true;
        const double load = cap > 0.0 ? std::round(q / cap * 1000.0) / 10.0 : 0.0;
        trace.overload_samples.emplace_back(node_name, r, t, load);
        for (const auto& a : comps) {
          for (const auto& b : comps) {
            if (a == b) continue;
            const auto& da = hosted[a].flavour->consumable_demands;
            const auto& db = hosted[b].flavour->consumable_demands;
            auto qa = da.find(r), qb = db.find(r);
            if (qa == da.end() || qb == db.end() || qa->second <= 0.0 || qb->second <= 0.0) continue;
            if (detail::WithinLimit(qa->second, cap) && detail::WithinLimit(qb->second, cap) &&
                !detail::WithinLimit(qa->second + qb->second, cap)) {
              facts.races.insert({node_name, r, a, hosted[a].flavour->name, b, hosted[b].flavour->name, t});
            }
          }
        }
      }
      if (overloaded || disconnected.count(node_name) != 0) {
        for (const auto& c : comps) {
          unreachable.insert(c);
          facts.unreachables.insert({c, t});
        }
      }
    }

    for (const auto& [c, h] : hosted) {
      for (const auto& dep : h.flavour->dependencies) {
        auto it = hosted.find(dep.component);
        if (it == hosted.end() || it->second.node == h.node) continue;
        const std::string& n = h.node->name;
        const std::string& m = it->second.node->name;
        const bool congested = facts.congestions.count({n, m, t}) != 0;
        if (congested || disconnected.count(n) != 0 || disconnected.count(m) != 0 ||
            unreachable.count(dep.component) != 0) {
          facts.timeouts.insert({c, dep.component, t});
        }
      }
    }

    const bool down = mandatory_missing || !unreachable.empty();
    if (down) trace.down_ticks.push_back(t);

    std::map<std::string, double> node_w;
    for (const auto& [c, h] : hosted) {
      double w = h.flavour->energy_w;
      auto it = energy_delta.find({c, h.flavour->name});
      if (it != energy_delta.end()) w += it->second;
      w = std::max(w, 0.0);
      power.component_w[c][t] = w;
      node_w[h.node->name] += w;
    }
    for (const auto& e : edges) {
      power.connection_w[{e.consumer, e.provider}][t] = e.traffic_w;
      node_w[hosted[e.consumer].node->name] += e.traffic_w / 2.0;
      node_w[hosted[e.provider].node->name] += e.traffic_w / 2.0;
    }
    for (const auto& n : infra.nodes) {
      double ci = n.carbon_intensity;
      auto it = ci_delta.find(n.name);
      if (it != ci_delta.end()) ci += it->second;
      ci = std::max(ci, 0.0);
      power.carbon_intensity[n.name][t] = ci;
      auto wit = node_w.find(n.name);
      if (wit == node_w.end()) continue;
      power.node_w[n.name][t] = wit->second;
      const double kwh = wit->second / 1000.0 * tick_hours;
      energy_kwh += kwh;
      co2_g += kwh * ci;
    }
  }
  facts.overloads = CoalesceOverloads(trace.overload_samples);
  trace.metrics.downtime_pct = 100.0 * double(trace.down_ticks.size()) / options.ticks;
  trace.metrics.energy_kwh = energy_kwh;
  trace.metrics.co2_g = co2_g;
  return trace;
}

namespace {

std::string Clock(int tick, double tick_minutes) {
  const long seconds = std::lround(tick * tick_minutes * 60.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02ld:%02ld:%02ld", (seconds / 3600) % 100, (seconds / 60) % 60, seconds % 60);
  return buf;
}

}  // namespace

std::string EmitSimulationLog(const RoundTrace& trace, const ApplicationSpec& app) {
  using detail::FormatNumber;
  std::ostringstream os;
  const auto& f = trace.record.facts;
  const auto& p = trace.record.power;

  std::map<int, std::vector<std::string>> by_tick;
  for (const auto& e : f.unreachables) by_tick[e.tick].push_back("Monitor - UNREACHABLE " + e.component);
  for (const auto& e : f.internals) by_tick[e.tick].push_back("Monitor - INTERNAL " + e.component);
  for (const auto& e : f.timeouts) by_tick[e.tick].push_back("Monitor - TIMEOUT " + e.component + " " + e.other);
  for (const auto& e : f.congestions) by_tick[e.tick].push_back("Monitor - CONGESTED " + e.node + " " + e.other);
  for (const auto& e : f.disconnections) by_tick[e.tick].push_back("Monitor - DISCONNECTED " + e.node);
  std::map<int, std::vector<std::string>> overloads;
  for (const auto& [node, res, tick, load] : trace.overload_samples) {
    overloads[tick].push_back("Monitor - OVERLOAD " + node + " " + res + " " + std::to_string(tick) + " " +
                              FormatNumber(load));
  }
  for (const auto& e : f.races) {
    by_tick[e.tick].push_back("Monitor - RACE " + e.node + " " + e.resource + " " + e.component + " " + e.flavour +
                              " " + e.other + " " + e.other_flavour);
  }

  const std::string src = "|SIM|";
  os << Clock(0, trace.tick_minutes) << src << "Simulation - Config ticks=" << trace.ticks
     << " tick_minutes=" << FormatNumber(trace.tick_minutes) << "\n";
  for (int t = 0; t < trace.ticks; ++t) {
    const std::string ts = Clock(t, trace.tick_minutes) + src;
    if (t == 0) os << ts << "Simulation - Event Start-0 fired.\n";
    os << ts << "Simulation - Event Tick-" << t << " fired.\n";
    if (t == 0) {
      os << ts << "Simulation - Event Enact-0 fired.\n";
      os << ts << "PlacementManager - Placement of " << app.name << " on infrastructure\n";
      os << ts << "PlacementManager - {";
      bool first = true;
      for (const auto& [c, pl] : trace.deployment.assignments) {
        os << (first ? "" : " |\n    ") << c << "_" << pl.flavour << " -> " << pl.node;
        first = false;
      }
      os << "}\n";
    }
    for (const auto& line : overloads[t]) os << ts << line << "\n";
    for (const auto& line : by_tick[t]) os << ts << line << " " << t << "\n";
    for (const auto& [c, series] : p.component_w) {
      auto it = series.find(t);
      if (it != series.end()) os << ts << "Monitor - ENERGY " << c << " " << FormatNumber(it->second) << " " << t << "\n";
    }
    for (const auto& [pair, series] : p.connection_w) {
      auto it = series.find(t);
      if (it != series.end()) {
        os << ts << "Monitor - CONNPOWER " << pair.first << " " << pair.second << " " << FormatNumber(it->second)
           << " " << t << "\n";
      }
    }
    for (const auto& [n, series] : p.node_w) {
      auto it = series.find(t);
      if (it != series.end()) os << ts << "Monitor - NODEPOWER " << n << " " << FormatNumber(it->second) << " " << t << "\n";
    }
    for (const auto& [n, series] : p.carbon_intensity) {
      auto it = series.find(t);
      if (it != series.end()) os << ts << "Monitor - CARBON " << n << " " << FormatNumber(it->second) << " " << t << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

const Flavour* Largest(const Component& c) {
  const Flavour* best = nullptr;
  for (const auto& f : c.flavours) {
    if (best == nullptr || f.importance > best->importance) best = &f;
  }
  return best;
}

bool Fits(const Flavour& f, const Node& n, const std::map<std::string, ResourceMap>& used) {
  auto uit = used.find(n.name);
  for (const auto& [r, q] : f.consumable_demands) {
    auto cit = n.consumable_capacities.find(r);
    const double cap = cit == n.consumable_capacities.end() ? 0.0 : cit->second;
    double u = 0.0;
    if (uit != used.end()) {
      auto it = uit->second.find(r);
      if (it != uit->second.end()) u = it->second;
    }
    if (!detail::WithinLimit(u + q, cap)) return false;
  }
  return true;
}

double Utilization(const Node& n, const ResourceMap& used) {
  double sum = 0.0;
  int count = 0;
  for (const auto& [r, cap] : n.consumable_capacities) {
    if (cap <= 0.0) continue;
    auto it = used.find(r);
    sum += (it == used.end() ? 0.0 : it->second) / cap;
    ++count;
  }
  return count == 0 ? 0.0 : sum / count;
}

}  // namespace

Deployment FirstFit(const ApplicationSpec& app, const InfrastructureSpec& infra) {
  Deployment d;
  std::map<std::string, ResourceMap> used;
  for (const auto& c : app.components) {
    const Flavour* f = Largest(c);
    for (const auto& n : infra.nodes) {
      if (!n.available || !Fits(*f, n, used)) continue;
      d.assignments[c.name] = {f->name, n.name};
      for (const auto& [r, q] : f->consumable_demands) used[n.name][r] += q;
      break;
    }
  }
  return d;
}

Deployment BestFit(const ApplicationSpec& app, const InfrastructureSpec& infra, std::uint64_t seed) {
  Deployment d;
  std::map<std::string, ResourceMap> used;
  std::mt19937_64 rng(seed);
  for (const auto& c : app.components) {
    const Flavour* f = Largest(c);
    std::vector<const Node*> order;
    for (const auto& n : infra.nodes) order.push_back(&n);
    std::shuffle(order.begin(), order.end(), rng);
    const Node* best = nullptr;
    double best_util = -1.0;
    for (const Node* n : order) {
      if (!n->available || !Fits(*f, *n, used)) continue;
      ResourceMap after = used[n->name];
      for (const auto& [r, q] : f->consumable_demands) after[r] += q;
      const double u = Utilization(*n, after);
      if (u > best_util) {
        best_util = u;
        best = n;
      }
    }
    if (best == nullptr) continue;
    d.assignments[c.name] = {f->name, best->name};
    for (const auto& [r, q] : f->consumable_demands) used[best->name][r] += q;
  }
  return d;
}

}  // namespace edgeplan
