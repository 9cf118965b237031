#include <gtest/gtest.h>

#include <random>

#include "edgeplan/spec_io.hpp"
#include "test_support.hpp"

namespace edgeplan {
namespace {

using testing::FixtureApp;
using testing::FixtureInfra;
using testing::FixtureRound0;

TEST(ParseApplication, Fixture) {
  const auto app = FixtureApp();
  ASSERT_EQ(app.components.size(), 7u);
  const Component* api = app.FindComponent("api");
  ASSERT_NE(api, nullptr);
  std::set<std::string> names;
  for (const auto& f : api->flavours) names.insert(f.name);
  EXPECT_EQ(names, (std::set<std::string>{"tiny", "medium", "large"}));
  for (const char* single : {"etcd", "database"}) {
    const Component* c = app.FindComponent(single);
    ASSERT_EQ(c->flavours.size(), 1u);
    EXPECT_EQ(c->flavours[0].name, "large");
  }
  EXPECT_FALSE(app.FindComponent("redis")->mandatory);
}

TEST(ParseApplication, MissingComponentsNamesTheField) {
  try {
    ParseApplication("app:\n  name: x\n");
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("components"), std::string::npos);
    EXPECT_EQ(e.field(), "app.components");
  }
}

TEST(ParseApplication, DuplicateFlavourNamesTheDuplicate) {
  const char* doc = R"(components:
  - name: web
    flavours:
      - {name: small, importance: 1}
      - {name: small, importance: 2}
)";
  try {
    ParseApplication(doc);
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("small"), std::string::npos);
  }
}

TEST(ParseApplication, WrongTypeReportsLine) {
  const char* doc = "components:\n  - name: web\n    flavours:\n      - {name: s, importance: lots}\n";
  try {
    ParseApplication(doc);
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(e.field().find("importance"), std::string::npos);
  }
}

TEST(ParseApplication, MalformedYaml) { EXPECT_THROW(ParseApplication("components: [\n"), ParseError); }

TEST(ParseInfrastructure, FixtureTopology) {
  const auto infra = FixtureInfra();
  std::set<std::string> names;
  for (const auto& n : infra.nodes) names.insert(n.name);
  EXPECT_EQ(names, (std::set<std::string>{"public1", "public2", "private1", "private2", "private3", "private4",
                                           "private5"}));
  EXPECT_TRUE(infra.LinkBetween("public1", "public2"));
  for (int a = 1; a <= 5; ++a) {
    for (int b = a + 1; b <= 5; ++b) {
      EXPECT_TRUE(infra.LinkBetween("private" + std::to_string(a), "private" + std::to_string(b)));
    }
  }
  for (const char* pub : {"public1", "public2"}) {
    for (int k = 1; k <= 5; ++k) {
      EXPECT_EQ(infra.LinkBetween(pub, "private" + std::to_string(k)).has_value(), k <= 2) << pub << " " << k;
    }
  }
  EXPECT_EQ(infra.FindNode("public1")->attributes.at("subnet"), "public");
  EXPECT_EQ(infra.FindNode("private3")->attributes.at("subnet"), "private");
}

TEST(ParseInfrastructure, UnknownLinkEnd) {
  const char* doc = "nodes:\n  - {name: a}\nlinks:\n  - {nodes: [a, b]}\n";
  EXPECT_THROW(ParseInfrastructure(doc), ParseError);
}

TEST(YamlRoundTrip, EmitThenParseIsIdentity) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  EXPECT_EQ(ParseApplication(EmitApplication(app)), app);
  EXPECT_EQ(ParseInfrastructure(EmitInfrastructure(infra)), infra);
}

TEST(Deployment, EmitIsSortedAndRoundTrips) {
  const std::string text = EmitDeployment(FixtureRound0());
  EXPECT_EQ(text.substr(0, text.find('\n')), "api large private1");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  EXPECT_EQ(EmitDeployment(Deployment{}), "");
  EXPECT_THROW(ParseDeployment("api large private1\napi tiny private2\n"), ParseError);
  EXPECT_THROW(ParseDeployment("api large\n"), ParseError);
}

TEST(Deployment, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  const auto names = std::vector<std::string>{"api", "db", "web_ui", "cache", "x1"};
  for (int i = 0; i < 100; ++i) {
    Deployment d;
    for (const auto& n : names) {
      if (rng() % 3 == 0) continue;
      d.assignments[n] = {"f" + std::to_string(rng() % 4), "node_" + std::to_string(rng() % 9)};
    }
    EXPECT_EQ(ParseDeployment(EmitDeployment(d)), d);
  }
}

TEST(Constraints, FunctorText) {
  EXPECT_EQ(FormatConstraint(SoftConstraint::Avoid("frontend", "large", "public1")),
            "avoid(d(frontend,large),public1).");
  const auto parsed = ParseConstraints("affinity(frontend,large,load_balancer,large).");
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], SoftConstraint::Affinity("frontend", "large", "load_balancer", "large"));
  EXPECT_EQ(parsed[0].weight, 1.0);
  const auto weighted = ParseConstraints("avoid(d(database,large),private1,1.0).", Provenance::kEnergy);
  ASSERT_EQ(weighted.size(), 1u);
  EXPECT_EQ(weighted[0], SoftConstraint::Avoid("database", "large", "private1", Provenance::kEnergy, 1.0));
  EXPECT_EQ(FormatConstraint(weighted[0]), "avoid(d(database,large),private1,1.0).");
  EXPECT_EQ(FormatConstraint(SoftConstraint::Avoid("identity_provider", "large", "private3", Provenance::kEnergy, 0.883)),
            "avoid(d(identity_provider,large),private3,0.883).");
}

TEST(Constraints, NestedPairwiseFormAndHeaders) {
  const auto cs = ParseConstraints(
      "% comment\n# energy\nantiaffinity(d(b,x),d(a,y),0.5).\n# failure\navoid(d(a,y),n1).\n");
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0], SoftConstraint::AntiAffinity("a", "y", "b", "x", Provenance::kEnergy, 0.5));
  EXPECT_EQ(cs[1].provenance, Provenance::kFailure);
}

TEST(Constraints, RoundTrip) {
  const std::vector<SoftConstraint> cs = {
      SoftConstraint::Avoid("frontend", "large", "public1"),
      SoftConstraint::AntiAffinity("api", "large", "etcd", "large"),
      SoftConstraint::Avoid("database", "large", "private1", Provenance::kEnergy, 1.0),
      SoftConstraint::Affinity("api", "large", "redis", "tiny", Provenance::kEnergy, 0.125),
  };
  EXPECT_EQ(ParseConstraints(EmitConstraints(cs)), cs);
}

TEST(Constraints, MalformedInput) {
  EXPECT_THROW(ParseConstraints("avoid(d(a,b),n"), ParseError);
  EXPECT_THROW(ParseConstraints("avoid(d(a,b))."), ParseError);
  EXPECT_THROW(ParseConstraints("affinity(a,x,a,y)."), ParseError);
  EXPECT_THROW(ParseConstraints("prefer(a,b)."), ParseError);
  EXPECT_THROW(ParseConstraints("avoid(d(a,b),n,1.5)."), ParseError);
}

std::string Round0ExcerptLog(const std::string& clock) {
  std::string log;
  log += clock + "|SIM|Simulation - Event Start-0 fired.\n";
  log += clock + "|SIM|Simulation - Event Tick-0 fired.\n";
  log += clock + "|SIM|PlacementManager - Placement of webshop on infrastructure\n";
  log += clock + "|SIM|PlacementManager - {load_balancer_large -> public1 |\n";
  log += "    api_large -> private1 |\n    frontend_large -> public1 |\n    redis_large -> private3 |\n";
  log += "    identity_provider_large -> private3 |\n    database_large -> private5 |\n";
  log += "    etcd_large -> private1}\n";
  for (int t = 31; t <= 98; ++t) {
    const std::string tick = std::to_string(t);
    log += clock + "|SIM|Monitor - OVERLOAD public1 cpu " + tick + " 3000\n";
    log += clock + "|SIM|Monitor - UNREACHABLE frontend " + tick + "\n";
    log += clock + "|SIM|Monitor - UNREACHABLE load_balancer " + tick + "\n";
  }
  return log;
}

TEST(SimulationLog, PlacementBlockAndEvents) {
  const auto app = FixtureApp();
  const FactBase f = ParseSimulationLog(Round0ExcerptLog("17:20:33"), &app);
  EXPECT_EQ(f.deployed.size(), 7u);
  EXPECT_EQ(f.deployed.count({"api", "large", "private1"}), 1u);
  EXPECT_EQ(f.deployed.count({"database", "large", "private5"}), 1u);
  EXPECT_EQ(f.deployed.count({"frontend", "large", "public1"}), 1u);
  EXPECT_EQ(f.deployed.count({"identity_provider", "large", "private3"}), 1u);
  for (int t = 31; t <= 98; ++t) EXPECT_EQ(f.unreachables.count({"frontend", t}), 1u);
  EXPECT_EQ(f.unreachables.size(), 2u * 68u);
  ASSERT_EQ(f.overloads.size(), 1u);
  EXPECT_EQ(f.overloads.begin()->node, "public1");
  EXPECT_EQ(f.overloads.begin()->resource, "cpu");
  EXPECT_EQ(f.overloads.begin()->tick_start, 31);
  EXPECT_EQ(f.overloads.begin()->tick_end, 98);
}

TEST(SimulationLog, WithoutAppSplitsAtLastUnderscore) {
  const FactBase f = ParseSimulationLog(Round0ExcerptLog("00:00:00"));
  EXPECT_EQ(f.deployed.count({"identity_provider", "large", "private3"}), 1u);
}

TEST(SimulationLog, InsensitiveToWallClock) {
  EXPECT_EQ(ParseSimulationLog(Round0ExcerptLog("17:20:33")), ParseSimulationLog(Round0ExcerptLog("03:01:59")));
}

TEST(SimulationLog, LaterPlacementBlockWins) {
  const std::string log =
      "t|SIM|PlacementManager - {api_large -> private1}\n"
      "t|SIM|PlacementManager - {api_tiny -> private2}\n";
  const FactBase f = ParseSimulationLog(log);
  ASSERT_EQ(f.deployed.size(), 1u);
  EXPECT_EQ(*f.deployed.begin(), (DeployedFact{"api", "tiny", "private2"}));
}

TEST(SimulationLog, MalformedLineReportsLineNumber) {
  const std::string log = "t|SIM|Simulation - Event Tick-0 fired.\nno separators here\n";
  try {
    ParseSimulationLog(log);
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(ParseSimulationLog("t|SIM|Monitor - UNREACHABLE api -4\n"), ParseError);
  EXPECT_THROW(ParseSimulationLog("t|SIM|Monitor - EXPLODED api 3\n"), ParseError);
}

TEST(Overloads, GapsSplitIntervalsAndPeakIsKept) {
  const auto out = CoalesceOverloads({{"n", "cpu", 1, 110}, {"n", "cpu", 2, 150}, {"n", "cpu", 4, 120},
                                      {"n", "ram", 2, 101}});
  ASSERT_EQ(out.size(), 3u);
  auto it = out.begin();
  EXPECT_EQ(it->tick_start, 1);
  EXPECT_EQ(it->tick_end, 2);
  EXPECT_EQ(it->peak_load_pct, 150);
  ++it;
  EXPECT_EQ(it->tick_start, 4);
  EXPECT_EQ(it->tick_end, 4);
}

TEST(Facts, EmitListing) {
  FactBase f;
  f.deployed.insert({"api", "large", "private1"});
  f.overloads.insert({"public1", "cpu", 31, 98, std::nullopt});
  const std::string text = EmitFacts(f);
  EXPECT_NE(text.find("deployedTo(api, large, private1)."), std::string::npos);
  EXPECT_NE(text.find("overload(public1, cpu, 31, 98)."), std::string::npos);
}

}  // namespace
}  // namespace edgeplan
