#pragma once

#include <set>

#include "edgeplan/model.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan {

/// Point queries over the interval and per-tick events of a fact base.
class DerivedPredicates {
 public:
  explicit DerivedPredicates(const FactBase& facts);

  bool Congested(const std::string& n, const std::string& m, int t) const;
  bool Disconnected(const std::string& n, int t) const;
  bool Overloaded(const std::string& n, const std::string& r, int t) const;
  /// Overloaded on any resource.
  bool Overloaded(const std::string& n, int t) const;
  bool Race(const std::string& n, const std::string& r, const std::string& c, const std::string& fc,
            const std::string& s, const std::string& fs, int t) const;
  /// Some race involving `c` as first party on `n` at `t`.
  bool AnyRace(const std::string& n, const std::string& c, int t) const;

 private:
  const FactBase& facts_;
};

/// Evaluates the failure rules over one round's facts. Every returned
/// constraint has failure provenance and weight 1.0.
std::set<SoftConstraint> SuggestFailureConstraints(const FactBase& facts);

}  // namespace edgeplan

namespace edgeplan {

/// Copy of `infra` with every node that was disconnected during the round
/// marked unavailable.
InfrastructureSpec WithoutDisconnectedNodes(const InfrastructureSpec& infra, const FactBase& facts);

}  // namespace edgeplan
