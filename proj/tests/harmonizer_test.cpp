#include <gtest/gtest.h>

#include "edgeplan/harmonizer.hpp"
#include "edgeplan/spec_io.hpp"

namespace edgeplan {
namespace {

const SoftConstraint kFailureAnti = SoftConstraint::AntiAffinity("api", "large", "etcd", "large");
const SoftConstraint kEnergyAff =
    SoftConstraint::Affinity("etcd", "large", "api", "large", Provenance::kEnergy, 0.8);
const SoftConstraint kAvoid = SoftConstraint::Avoid("frontend", "large", "public1");
const SoftConstraint kEnergyAvoid =
    SoftConstraint::Avoid("database", "large", "private1", Provenance::kEnergy, 1.0);

bool Contains(const std::vector<SoftConstraint>& cs, const SoftConstraint& c) {
  return std::find(cs.begin(), cs.end(), c) != cs.end();
}

TEST(Harmonize, FailurePriorityDropsEnergySide) {
  const auto out = Harmonize({kFailureAnti, kAvoid}, {kEnergyAff, kEnergyAvoid}, Priority::kFailure);
  EXPECT_TRUE(Contains(out.kept, kFailureAnti));
  EXPECT_FALSE(Contains(out.kept, kEnergyAff));
  ASSERT_EQ(out.dropped.size(), 1u);
  EXPECT_EQ(out.dropped[0].constraint, kEnergyAff);
  EXPECT_FALSE(out.dropped[0].reason.empty());
  EXPECT_TRUE(Contains(out.kept, kAvoid));
  EXPECT_TRUE(Contains(out.kept, kEnergyAvoid));
}

TEST(Harmonize, EnergyPriorityDropsFailureSide) {
  const auto out = Harmonize({kFailureAnti}, {kEnergyAff}, Priority::kEnergy);
  EXPECT_EQ(out.kept, std::vector<SoftConstraint>{kEnergyAff});
  ASSERT_EQ(out.dropped.size(), 1u);
  EXPECT_EQ(out.dropped[0].constraint, kFailureAnti);
}

TEST(Harmonize, NoPriorityDropsBoth) {
  const auto out = Harmonize({kFailureAnti}, {kEnergyAff}, Priority::kNone);
  EXPECT_TRUE(out.kept.empty());
  EXPECT_EQ(out.dropped.size(), 2u);
}

TEST(Harmonize, ContradictionWithinOneSourceDropsBoth) {
  const auto aff = SoftConstraint::Affinity("api", "large", "etcd", "large");
  const auto out = Harmonize({kFailureAnti, aff, kAvoid}, {}, Priority::kFailure);
  EXPECT_EQ(out.kept, std::vector<SoftConstraint>{kAvoid});
  EXPECT_EQ(out.dropped.size(), 2u);
}

TEST(Harmonize, DifferentFlavoursDoNotConflict) {
  const auto other = SoftConstraint::Affinity("api", "tiny", "etcd", "large", Provenance::kEnergy, 0.5);
  const auto out = Harmonize({kFailureAnti}, {other}, Priority::kFailure);
  EXPECT_EQ(out.kept.size(), 2u);
  EXPECT_TRUE(out.dropped.empty());
}

TEST(Harmonize, DuplicatesCollapse) {
  const auto energy_copy = SoftConstraint::Avoid("frontend", "large", "public1", Provenance::kEnergy, 0.3);
  const auto out = Harmonize({kAvoid, kAvoid}, {energy_copy}, Priority::kFailure);
  EXPECT_EQ(out.kept, std::vector<SoftConstraint>{kAvoid});
  const auto energy_first = Harmonize({kAvoid}, {energy_copy}, Priority::kEnergy);
  EXPECT_EQ(energy_first.kept, std::vector<SoftConstraint>{energy_copy});
}

TEST(Harmonize, OrderFailureByTextThenEnergyByWeight) {
  const auto e1 = SoftConstraint::Avoid("x", "f", "n", Provenance::kEnergy, 0.2);
  const auto e2 = SoftConstraint::Avoid("y", "f", "n", Provenance::kEnergy, 0.9);
  const auto f1 = SoftConstraint::Avoid("b", "f", "n");
  const auto f2 = SoftConstraint::Avoid("a", "f", "n");
  const auto out = Harmonize({f1, f2}, {e1, e2}, Priority::kFailure);
  EXPECT_EQ(out.kept, (std::vector<SoftConstraint>{f2, f1, e2, e1}));
}

TEST(Harmonize, Idempotent) {
  const auto once = Harmonize({kFailureAnti, kAvoid}, {kEnergyAff, kEnergyAvoid}, Priority::kFailure);
  std::vector<SoftConstraint> f, e;
  for (const auto& c : once.kept) (c.provenance == Provenance::kFailure ? f : e).push_back(c);
  const auto twice = Harmonize(f, e, Priority::kFailure);
  EXPECT_EQ(twice.kept, once.kept);
  EXPECT_TRUE(twice.dropped.empty());
}

TEST(Priority, ParseAndPrint) {
  for (Priority p : {Priority::kFailure, Priority::kEnergy, Priority::kNone}) {
    EXPECT_EQ(ParsePriority(ToString(p)), p);
  }
  EXPECT_FALSE(ParsePriority("carbon").has_value());
}

TEST(DroppedReport, ReasonThenConstraint) {
  const auto out = Harmonize({kFailureAnti}, {kEnergyAff}, Priority::kNone);
  const std::string report = EmitDroppedReport(out.dropped);
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 4);
  EXPECT_NE(report.find(FormatConstraint(kFailureAnti)), std::string::npos);
}

}  // namespace
}  // namespace edgeplan
