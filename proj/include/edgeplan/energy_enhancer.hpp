#pragma once

#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "edgeplan/model.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan {

/// Power statistics of one subject. Each merged observation counts as a
/// single sample.
struct EnergyProfile {
  double min_w = 0.0;
  double max_w = 0.0;
  double avg_w = 0.0;
  int sample_count = 0;

  static EnergyProfile Single(double watts) { return {watts, watts, watts, 1}; }
  /// Widens min/max and reweights the mean by sample count.
  void Merge(double watts);
  void Merge(const EnergyProfile& other);
  bool operator==(const EnergyProfile&) const = default;
};

/// (component, flavour, node)
using ServiceKey = std::tuple<std::string, std::string, std::string>;
/// (component, flavour, other component, other flavour), directed.
using ConnectionKey = std::tuple<std::string, std::string, std::string, std::string>;

struct StoredConstraint {
  SoftConstraint constraint;
  double estimated_impact_g = 0.0;
  double memory_weight = 1.0;
  bool operator==(const StoredConstraint&) const = default;
};

struct KnowledgeBase {
  static constexpr double kDecay = 0.5;
  static constexpr double kEvictAtOrBelow = 0.125;
  static constexpr double kRetrieveAtOrAbove = 0.5;
  static constexpr std::size_t kCarbonHistoryLimit = 1440;

  std::map<ServiceKey, EnergyProfile> service_profiles;
  std::map<ConnectionKey, EnergyProfile> connection_profiles;
  std::map<std::string, EnergyProfile> node_profiles;
  std::map<std::string, std::deque<double>> node_carbon_history;
  /// Keyed by constraint identity.
  std::map<std::string, StoredConstraint> stored_constraints;
  int rounds = 0;

  std::string ToJson() const;
  static KnowledgeBase FromJson(std::string_view text);
  bool operator==(const KnowledgeBase&) const = default;
};

/// Mean of the last `window` intensity samples (time-ordered by tick).
double AggregateCarbonIntensity(const std::vector<std::pair<int, double>>& samples, int window);

struct SubjectEstimate {
  EnergyProfile profile;  // over active ticks only
  int active_ticks = 0;
  double hours = 0.0;
  double intensity = 0.0;  // gCO2/kWh
  double emissions_g = 0.0;
};

struct EmissionEstimates {
  std::map<ServiceKey, SubjectEstimate> services;
  std::map<ConnectionKey, SubjectEstimate> connections;
  std::map<std::string, SubjectEstimate> nodes;
  /// Aggregated intensity per node for this round.
  std::map<std::string, double> node_intensity;
  /// Raw intensity samples of the round, time-ordered.
  std::map<std::string, std::vector<std::pair<int, double>>> intensity_samples;
};

/// Per-subject emissions from one round's samples. Ticks without a sample
/// are inactive. Nodes without intensity samples use their spec value.
/// Connections use the mean intensity of their two endpoint nodes.
EmissionEstimates EstimateEmissions(const SimulationRecord& record, const InfrastructureSpec& infra,
                                    int window = 120);

struct EnergyThresholds {
  double service_g = 30.0;
  double connection_g = 30.0;
  std::size_t top_k = 10;
  double round_hours = 2.0;
  int carbon_window = 120;
};

/// Intensity used for projections: aggregated history when present, the
/// spec value otherwise.
double ProjectedIntensity(const KnowledgeBase& kb, const Node& node, int window);

/// Mean of the (component, flavour) average power over every node it was
/// observed on, or nullopt when never observed.
std::optional<double> ObservedAveragePower(const KnowledgeBase& kb, const std::string& component,
                                           const std::string& flavour);

/// Ranked energy constraints for the next round (provenance energy).
std::vector<SoftConstraint> GenerateEnergyConstraints(const KnowledgeBase& kb, const ApplicationSpec& app,
                                                      const InfrastructureSpec& infra,
                                                      const Deployment& current,
                                                      const EnergyThresholds& thresholds);

/// Merges the round's profiles and intensity samples into the knowledge
/// base, one sample per subject.
void MergeObservations(KnowledgeBase& kb, const EmissionEstimates& estimates);

/// Remembers freshly generated constraints: regenerated ones reset to memory
/// weight 1.0, the others decay by kDecay and are evicted at kEvictAtOrBelow.
void RememberConstraints(KnowledgeBase& kb, const std::vector<SoftConstraint>& fresh,
                         const std::map<std::string, double>& impacts = {});

/// Fresh constraints united with stored ones whose memory weight reaches
/// kRetrieveAtOrAbove, keeping the max weight per identity, with the
/// feasibility guard re-applied and the result ranked.
std::vector<SoftConstraint> RetrieveConstraints(const KnowledgeBase& kb, const std::vector<SoftConstraint>& fresh,
                                                const ApplicationSpec& app, const InfrastructureSpec& infra,
                                                const EnergyThresholds& thresholds);

/// Full per-round step: estimate, merge, generate, remember, retrieve.
struct EnergyRoundResult {
  EmissionEstimates estimates;
  std::vector<SoftConstraint> fresh;
  std::vector<SoftConstraint> constraints;
};
EnergyRoundResult RunEnergyEnhancer(KnowledgeBase& kb, const SimulationRecord& record,
                                    const ApplicationSpec& app, const InfrastructureSpec& infra,
                                    const Deployment& current, const EnergyThresholds& thresholds);

/// Copy of `app` whose flavour energy_w values are replaced by observed
/// averages from the knowledge base.
ApplicationSpec WithObservedEnergy(const ApplicationSpec& app, const KnowledgeBase& kb);

/// Orders by descending weight, ties by constraint text.
void RankByWeight(std::vector<SoftConstraint>& constraints);

}  // namespace edgeplan
