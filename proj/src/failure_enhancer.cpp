#include "edgeplan/failure_enhancer.hpp"

#include <map>

namespace edgeplan {

DerivedPredicates::DerivedPredicates(const FactBase& facts) : facts_(facts) {}

bool DerivedPredicates::Congested(const std::string& n, const std::string& m, int t) const {
  return facts_.congestions.count(CongestionFact{n, m, t}) != 0;
}

bool DerivedPredicates::Disconnected(const std::string& n, int t) const {
  return facts_.disconnections.count(DisconnectionFact{n, t}) != 0;
}

bool DerivedPredicates::Overloaded(const std::string& n, const std::string& r, int t) const {
  for (const auto& o : facts_.overloads) {
    if (o.node == n && o.resource == r && o.tick_start <= t && t <= o.tick_end) return true;
  }
  return false;
}

bool DerivedPredicates::Overloaded(const std::string& n, int t) const {
  for (const auto& o : facts_.overloads) {
    if (o.node == n && o.tick_start <= t && t <= o.tick_end) return true;
  }
  return false;
}

bool DerivedPredicates::Race(const std::string& n, const std::string& r, const std::string& c,
                             const std::string& fc, const std::string& s, const std::string& fs,
                             int t) const {
  return facts_.races.count(RaceFact{n, r, c, fc, s, fs, t}) != 0;
}

bool DerivedPredicates::AnyRace(const std::string& n, const std::string& c, int t) const {
  for (const auto& r : facts_.races) {
    if (r.node == n && r.component == c && r.tick == t) return true;
  }
  return false;
}

std::set<SoftConstraint> SuggestFailureConstraints(const FactBase& facts) {
  DerivedPredicates is(facts);
  std::map<std::string, const DeployedFact*> where;
  for (const auto& d : facts.deployed) where[d.component] = &d;
  std::set<SoftConstraint> out;

  for (const auto& to : facts.timeouts) {
    auto ci = where.find(to.component);
    auto si = where.find(to.other);
    if (ci == where.end() || si == where.end() || to.component == to.other) continue;
    const DeployedFact& c = *ci->second;
    const DeployedFact& s = *si->second;
    if (c.node == s.node) continue;
    const int t = to.tick;
    const bool near_side = is.Congested(c.node, s.node, t) || is.Disconnected(c.node, t);
    const bool far_side = is.Congested(s.node, c.node, t) || is.Disconnected(s.node, t);
    if (!near_side && !far_side) {
      out.insert(SoftConstraint::Affinity(c.component, c.flavour, s.component, s.flavour));
    }
    if (near_side) out.insert(SoftConstraint::Avoid(c.component, c.flavour, c.node));
    if (far_side) out.insert(SoftConstraint::Avoid(s.component, s.flavour, s.node));
  }

  auto failed = [&](const ComponentEventFact& e) {
    auto it = where.find(e.component);
    if (it == where.end()) return;
    const DeployedFact& c = *it->second;
    const int t = e.tick;
    for (const auto& r : facts.races) {
      if (r.node != c.node || r.component != c.component || r.flavour != c.flavour || r.tick != t) continue;
      if (!is.Overloaded(c.node, r.resource, t)) continue;
      out.insert(SoftConstraint::AntiAffinity(c.component, c.flavour, r.other, r.other_flavour));
    }
    if ((is.Overloaded(c.node, t) && !is.AnyRace(c.node, c.component, t)) || is.Disconnected(c.node, t)) {
      out.insert(SoftConstraint::Avoid(c.component, c.flavour, c.node));
    }
  };
  for (const auto& e : facts.unreachables) failed(e);
  for (const auto& e : facts.internals) failed(e);
  return out;
}

}  // namespace edgeplan

namespace edgeplan {

InfrastructureSpec WithoutDisconnectedNodes(const InfrastructureSpec& infra, const FactBase& facts) {
  InfrastructureSpec out = infra;
  for (const auto& d : facts.disconnections) {
    if (Node* n = out.FindNode(d.node)) n->available = false;
  }
  return out;
}

}  // namespace edgeplan
