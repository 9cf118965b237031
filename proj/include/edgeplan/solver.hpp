#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "edgeplan/model.hpp"

namespace edgeplan {

enum class ObjectiveMode {
  /// Maximize the summed importance of deployed flavours.
  kMaximizeImportance,
  /// Maximize the number of components kept with the same (flavour, node) as
  /// `previous`, then importance.
  kMinimizeChanges,
};

struct PlacementProblem {
  ApplicationSpec app;
  InfrastructureSpec infra;
  /// Soft constraints currently enforced as hard.
  std::vector<SoftConstraint> enforced;
  std::optional<Deployment> previous;
  ObjectiveMode objective_mode = ObjectiveMode::kMaximizeImportance;
  /// Horizon used to project energy and emissions against the budgets.
  double round_hours = 2.0;
};

/// Lexicographic objective: kept count first (always 0 when maximizing
/// importance), then importance.
struct ObjectiveValue {
  int kept = 0;
  int importance = 0;
  auto operator<=>(const ObjectiveValue&) const = default;
};

enum class SolveStatus { kOptimal, kUnsatisfiable, kTimedOut };

std::string_view ToString(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kUnsatisfiable;
  /// Optimal deployment, or the incumbent when timed out.
  std::optional<Deployment> deployment;
  ObjectiveValue value;
  /// Search nodes expanded; diagnostics only.
  long long explored = 0;

  /// Kept count in MinimizeChanges mode, importance otherwise.
  int ObjectiveFor(ObjectiveMode mode) const {
    return mode == ObjectiveMode::kMinimizeChanges ? value.kept : value.importance;
  }
};

/// Checks every validity condition (C1..C10) of a deployment and returns one
/// description per violation, each prefixed with its condition tag.
std::vector<std::string> VerifyDeployment(const Deployment& deployment, const PlacementProblem& problem);

/// Same checks over a raw assignment list, which may repeat a component.
std::vector<std::string> VerifyAssignmentList(
    const std::vector<std::pair<std::string, Placement>>& assignments,
    const PlacementProblem& problem);

/// Objective of a deployment under the problem's mode.
ObjectiveValue Evaluate(const Deployment& deployment, const PlacementProblem& problem);

/// Deterministic tie-break: compares deployments component by component in
/// name order using (flavour, node) names, an undeployed component sorting
/// before any placement. Returns true when `a` precedes `b`.
bool TieBreakPrecedes(const Deployment& a, const Deployment& b, const ApplicationSpec& app);

using Seconds = std::chrono::duration<double>;

/// Exact branch and bound over the placement matrix.
SolveOutcome Solve(const PlacementProblem& problem, Seconds time_limit = Seconds(300));

class OracleSizeExceeded : public InputError {
 public:
  using InputError::InputError;
};

/// Exhaustive enumeration filtered through VerifyDeployment. Throws
/// OracleSizeExceeded when the candidate count passes `max_candidates`.
SolveOutcome BruteForceOracle(const PlacementProblem& problem, double max_candidates = 1e7);

struct RelaxationResult {
  SolveOutcome outcome;
  std::vector<SoftConstraint> dropped;
  int attempts = 0;
};

/// Enforces every soft constraint; when infeasible, drops subsets of
/// increasing size (ascending total weight, then constraint text) until a
/// feasible deployment appears. `max_drop` caps the subset size (negative:
/// no cap). A timed-out attempt ends the loop.
RelaxationResult SolveWithRelaxation(const PlacementProblem& problem,
                                     const std::vector<SoftConstraint>& soft,
                                     Seconds time_limit = Seconds(300), int max_drop = -1);

/// Human-readable dump of the instantiated constraint model.
std::string DumpModel(const PlacementProblem& problem);

}  // namespace edgeplan
