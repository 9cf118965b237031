#include <gtest/gtest.h>

#include "edgeplan/model.hpp"
#include "test_support.hpp"

namespace edgeplan {
namespace {

using testing::FixtureApp;
using testing::FixtureInfra;

TEST(ValidateSpecs, FixtureIsClean) { EXPECT_TRUE(ValidateSpecs(FixtureApp(), FixtureInfra()).empty()); }

TEST(ValidateSpecs, DanglingDependencyIsNamed) {
  ApplicationSpec app;
  app.components.push_back({"web", true, {{"small", 1, {}, {}, {{"ghost", 0}}, 1.0}}});
  const auto v = ValidateSpecs(app, {});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("ghost"), std::string::npos);
}

TEST(ValidateSpecs, NegativeCapacity) {
  InfrastructureSpec infra;
  Node n;
  n.name = "edge";
  n.consumable_capacities["cpu"] = -1;
  infra.nodes.push_back(n);
  EXPECT_EQ(ValidateSpecs({}, infra).size(), 1u);
}

TEST(ValidateSpecs, CatchesTypeInvariants) {
  ApplicationSpec app;
  app.components.push_back({"a", true, {}});
  app.components.push_back({"b", true, {{"x", 1, {}, {}, {}, 0}, {"x", 1, {}, {}, {}, 0}}});
  app.components.push_back({"b", true, {{"y", 2, {}, {}, {}, 0}}});
  app.monetary_budget = -1;
  InfrastructureSpec infra;
  Node n;
  n.name = "n";
  n.unit_costs["gpu"] = 1.0;
  n.carbon_intensity = -3;
  infra.nodes = {n, n};
  infra.links.push_back({"n", "m", 1, 2});
  const auto v = ValidateSpecs(app, infra);
  // empty flavours, duplicate flavour, duplicate importance, duplicate
  // component, negative budget, duplicate node, cost without capacity,
  // negative intensity, unknown link end, availability above 1.
  EXPECT_GE(v.size(), 10u);
}

TEST(ValidateSpecs, PureFunction) {
  auto app = FixtureApp();
  app.components[0].flavours[0].dependencies.push_back({"ghost", 1});
  EXPECT_EQ(ValidateSpecs(app, FixtureInfra()), ValidateSpecs(app, FixtureInfra()));
}

TEST(MaxTotalImportance, Examples) {
  EXPECT_EQ(MaxTotalImportance(FixtureApp()), 21);
  ApplicationSpec one;
  one.components.push_back({"only", true, {{"f", 5, {}, {}, {}, 0}}});
  EXPECT_EQ(MaxTotalImportance(one), 5);
  EXPECT_EQ(MaxTotalImportance(ApplicationSpec{}), 0);
}

TEST(SoftConstraint, PairwiseNormalizationIsIdempotentAndSymmetric) {
  const auto a = SoftConstraint::Affinity("frontend", "large", "api", "tiny");
  const auto b = SoftConstraint::Affinity("api", "tiny", "frontend", "large");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.Normalized(), a.Normalized().Normalized());
  EXPECT_EQ(a.Identity(), "affinity(api,tiny,frontend,large)");
  EXPECT_EQ(SoftConstraint::Avoid("api", "large", "private1").Identity(), "avoid(d(api,large),private1)");
}

TEST(SoftConstraint, EqualityIncludesProvenanceAndWeight) {
  const auto f = SoftConstraint::Avoid("db", "large", "n1");
  const auto e = SoftConstraint::Avoid("db", "large", "n1", Provenance::kEnergy, 0.5);
  EXPECT_NE(f, e);
  EXPECT_EQ(f.Identity(), e.Identity());
  EXPECT_TRUE(f < e || e < f);
}

TEST(Deployment, ChangeCounting) {
  Deployment a, b;
  a.assignments = {{"x", {"f", "n1"}}, {"y", {"f", "n2"}}, {"z", {"f", "n3"}}};
  b.assignments = {{"x", {"f", "n1"}}, {"y", {"g", "n2"}}, {"w", {"f", "n3"}}};
  EXPECT_EQ(CountChanges(a, b), 3);
  EXPECT_EQ(CountKept(a, b), 1);
  EXPECT_EQ(CountChanges(a, a), 0);
}

TEST(Infrastructure, SelfLinkIsImplicit) {
  const auto infra = FixtureInfra();
  const auto self = infra.LinkBetween("public1", "public1");
  ASSERT_TRUE(self);
  EXPECT_EQ(self->latency_ms, 0);
  EXPECT_EQ(self->availability, 1);
  EXPECT_TRUE(infra.LinkBetween("private2", "public1"));
  EXPECT_FALSE(infra.LinkBetween("public1", "private3"));
}

TEST(Attributes, SubnetAndEncryption) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const Flavour& db = app.FindComponent("database")->flavours.front();
  EXPECT_TRUE(AttributesSatisfied(db, *infra.FindNode("private5")));
  EXPECT_FALSE(AttributesSatisfied(db, *infra.FindNode("public1")));
  EXPECT_FALSE(AttributesSatisfied(db, *infra.FindNode("private3")));
}

}  // namespace
}  // namespace edgeplan
