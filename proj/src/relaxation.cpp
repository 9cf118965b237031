#include <algorithm>
#include <numeric>

#include "edgeplan/solver.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan {

namespace {

struct DropSet {
  std::vector<int> members;
  double weight = 0.0;
  std::vector<std::string> texts;  // sorted identities, for tie-breaking
};

void Combinations(int n, int k, int start, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (int(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int i = start; i <= n - (k - int(current.size())); ++i) {
    current.push_back(i);
    Combinations(n, k, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

RelaxationResult SolveWithRelaxation(const PlacementProblem& problem, const std::vector<SoftConstraint>& soft,
                                     Seconds time_limit, int max_drop) {
  RelaxationResult result;
  const int n = int(soft.size());
  const int cap = max_drop < 0 ? n : std::min(max_drop, n);

  auto attempt = [&](const std::vector<int>& dropped) {
    PlacementProblem p = problem;
    for (int i = 0; i < n; ++i) {
      if (std::find(dropped.begin(), dropped.end(), i) == dropped.end()) p.enforced.push_back(soft[i]);
    }
    ++result.attempts;
    return Solve(p, time_limit);
  };

  for (int k = 0; k <= cap; ++k) {
    std::vector<std::vector<int>> combos;
    std::vector<int> current;
    Combinations(n, k, 0, current, combos);
    std::vector<DropSet> sets;
    for (auto& members : combos) {
      DropSet ds;
      for (int i : members) {
        ds.weight += soft[i].weight;
        ds.texts.push_back(FormatConstraint(soft[i]));
      }
      std::sort(ds.texts.begin(), ds.texts.end());
      ds.members = std::move(members);
      sets.push_back(std::move(ds));
    }
    std::stable_sort(sets.begin(), sets.end(), [](const DropSet& a, const DropSet& b) {
      if (a.weight != b.weight) return a.weight < b.weight;
      return a.texts < b.texts;
    });
    for (const auto& ds : sets) {
      SolveOutcome outcome = attempt(ds.members);
      if (outcome.status == SolveStatus::kUnsatisfiable) continue;
      result.outcome = std::move(outcome);
      for (int i : ds.members) result.dropped.push_back(soft[i]);
      return result;
    }
  }
  result.outcome = SolveOutcome{};
  result.dropped = soft;
  return result;
}

}  // namespace edgeplan
