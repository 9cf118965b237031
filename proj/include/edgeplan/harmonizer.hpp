#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgeplan/model.hpp"

namespace edgeplan {

enum class Priority { kFailure, kEnergy, kNone };

std::string_view ToString(Priority priority);
std::optional<Priority> ParsePriority(std::string_view text);

struct DroppedConstraint {
  SoftConstraint constraint;
  std::string reason;
};

struct HarmonizedConstraints {
  /// Failure constraints in text order, then energy ones by descending weight.
  std::vector<SoftConstraint> kept;
  std::vector<DroppedConstraint> dropped;
};

/// Resolves Affinity/AntiAffinity contradictions over the same
/// ((c, fc), (s, fs)) pair. Avoid constraints always pass through.
HarmonizedConstraints Harmonize(const std::vector<SoftConstraint>& failure,
                                const std::vector<SoftConstraint>& energy, Priority priority);

/// Report listing each dropped constraint with its reason.
std::string EmitDroppedReport(const std::vector<DroppedConstraint>& dropped);

}  // namespace edgeplan
