#include <gtest/gtest.h>

#include <numeric>

#include "edgeplan/simulator.hpp"
#include "edgeplan/solver.hpp"
#include "test_support.hpp"

namespace edgeplan {
namespace {

using testing::FixtureApp;
using testing::FixtureInfra;
using testing::FixtureRound0;

Scenario NodeDelta(const std::string& node, const std::string& resource, double delta, int from, int to) {
  Scenario s;
  s.target.kind = TargetKind::kNodeResource;
  s.target.node = node;
  s.target.resource = resource;
  s.shape = ConstantShape{delta, from, to};
  return s;
}

Scenario FlavourSine(const std::string& c, const std::string& f, double amplitude, int period, int from, int to) {
  Scenario s;
  s.target.kind = TargetKind::kFlavourEnergy;
  s.target.component = c;
  s.target.flavour = f;
  s.shape = SinusoidalShape{amplitude, period, from, to};
  return s;
}

TEST(Scenario, ConstantInclusiveRange) {
  const auto s = NodeDelta("public1", "cpu", -5, 3, 5);
  EXPECT_EQ(s.DeltaAt(2), 0.0);
  EXPECT_EQ(s.DeltaAt(3), -5.0);
  EXPECT_EQ(s.DeltaAt(5), -5.0);
  EXPECT_EQ(s.DeltaAt(6), 0.0);
}

TEST(Scenario, SinusoidShape) {
  const auto s = FlavourSine("database", "large", 56, 200, 10, 110);
  EXPECT_NEAR(s.DeltaAt(10), 0.0, 1e-12);
  EXPECT_NEAR(s.DeltaAt(60), 56.0, 1e-12);
  EXPECT_NEAR(s.DeltaAt(110), 0.0, 1e-9);
  EXPECT_EQ(s.DeltaAt(111), 0.0);
}

TEST(Scenario, Validation) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  EXPECT_THROW(ValidateScenario(NodeDelta("ghost", "cpu", 1, 0, 1), app, infra, 120), InputError);
  EXPECT_THROW(ValidateScenario(NodeDelta("public1", "cpu", 1, 5, 4), app, infra, 120), InputError);
  EXPECT_THROW(ValidateScenario(NodeDelta("public1", "cpu", 1, 0, 500), app, infra, 120), InputError);
  EXPECT_THROW(ValidateScenario(FlavourSine("database", "large", 1, 7, 0, 10), app, infra, 120), InputError);
  EXPECT_THROW(ValidateScenario(FlavourSine("database", "tiny", 1, 20, 0, 10), app, infra, 120), InputError);
  EXPECT_NO_THROW(ValidateScenario(FlavourSine("database", "large", 1, 20, 0, 10), app, infra, 120));
}

TEST(Policy, ExpressionExpandsPerRound) {
  const auto rounds = ParsePolicyExpression("[a]*2 + [b, c]*1 + []*3");
  ASSERT_EQ(rounds.size(), 6u);
  EXPECT_EQ(rounds[0], std::vector<std::string>{"a"});
  EXPECT_EQ(rounds[2], (std::vector<std::string>{"b", "c"}));
  EXPECT_TRUE(rounds[5].empty());
  EXPECT_EQ(ParsePolicyExpression("[x]").size(), 1u);
  EXPECT_TRUE(ParsePolicyExpression("").empty());
  EXPECT_THROW(ParsePolicyExpression("[a]*"), ParseError);
  EXPECT_THROW(ParsePolicyExpression("[a] [b]"), ParseError);
  EXPECT_THROW(ParsePolicyExpression("[a,]"), ParseError);
}

TEST(RunRound, QuiescentRound) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const auto trace = RunRound(FixtureRound0(), app, infra, {}, RoundOptions{});
  EXPECT_EQ(trace.metrics.downtime_pct, 0.0);
  EXPECT_DOUBLE_EQ(trace.metrics.app_quality_pct, 100.0);
  EXPECT_EQ(trace.metrics.changes, 0);
  // 150.3 W for two hours.
  EXPECT_NEAR(trace.metrics.energy_kwh, 0.3006, 1e-9);
  // 25 W at 300, 24 W at 493, 51.3 W at 883, 50 W at 413 for two hours.
  EXPECT_NEAR(trace.metrics.co2_g, 170.5598, 1e-6);
  EXPECT_TRUE(trace.record.facts.overloads.empty());
  EXPECT_TRUE(trace.record.facts.unreachables.empty());
  EXPECT_EQ(trace.record.facts.deployed.size(), 7u);
}

TEST(RunRound, PublicNodeDegradation) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const std::vector<Scenario> s = {NodeDelta("public1", "cpu", -3950, 31, 98),
                                   NodeDelta("public1", "ram", -7900, 31, 98)};
  const auto trace = RunRound(FixtureRound0(), app, infra, s, RoundOptions{});
  EXPECT_EQ(trace.down_ticks.size(), 68u);
  EXPECT_NEAR(trace.metrics.downtime_pct, 100.0 * 68 / 120, 1e-9);
  const auto& o = trace.record.facts.overloads;
  ASSERT_EQ(o.size(), 2u);
  for (const auto& f : o) {
    EXPECT_EQ(f.node, "public1");
    EXPECT_EQ(f.tick_start, 31);
    EXPECT_EQ(f.tick_end, 98);
  }
  EXPECT_EQ(trace.record.facts.unreachables.count({"frontend", 31}), 1u);
  EXPECT_EQ(trace.record.facts.unreachables.count({"load_balancer", 98}), 1u);
  EXPECT_EQ(trace.record.facts.unreachables.count({"frontend", 99}), 0u);
  EXPECT_EQ(trace.record.facts.unreachables.size(), 2u * 68u);
}

TEST(RunRound, FullPeriodSineLeavesEnergyUnchanged) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const auto base = RunRound(FixtureRound0(), app, infra, {}, RoundOptions{});
  const auto wave =
      RunRound(FixtureRound0(), app, infra, {FlavourSine("database", "large", 30, 50, 10, 110)}, RoundOptions{});
  EXPECT_NEAR(wave.metrics.energy_kwh, base.metrics.energy_kwh, 1e-9);
  const auto hump =
      RunRound(FixtureRound0(), app, infra, {FlavourSine("database", "large", 56, 200, 10, 110)}, RoundOptions{});
  EXPECT_GT(hump.metrics.energy_kwh, base.metrics.energy_kwh);
  EXPECT_NEAR(hump.metrics.energy_kwh, 0.36001295841868014, 1e-12);
}

TEST(RunRound, ComponentPowerSumsToNodePower) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const auto trace = RunRound(FixtureRound0(), app, infra, {FlavourSine("database", "large", 56, 200, 10, 110)},
                              RoundOptions{});
  for (int t = 0; t < trace.ticks; ++t) {
    double components = 0.0, nodes = 0.0;
    for (const auto& [_, series] : trace.record.power.component_w) components += series.count(t) ? series.at(t) : 0.0;
    for (const auto& [_, series] : trace.record.power.node_w) nodes += series.count(t) ? series.at(t) : 0.0;
    ASSERT_NEAR(components, nodes, 1e-9) << "tick " << t;
  }
}

TEST(RunRound, ChangesCountedAgainstPrevious) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  Deployment next = FixtureRound0();
  next.assignments["frontend"].node = "public2";
  const auto prev = FixtureRound0();
  EXPECT_EQ(RunRound(next, app, infra, {}, RoundOptions{}, &prev).metrics.changes, 1);
}

TEST(RunRound, DisconnectionAndCongestion) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  Scenario down;
  down.target.kind = TargetKind::kNodeConnectivity;
  down.target.node = "private5";
  down.shape = ConstantShape{-1, 4, 4};
  Scenario jam;
  jam.target.kind = TargetKind::kLinkCongestion;
  jam.target.node = "public1";
  jam.target.other = "private1";
  jam.shape = ConstantShape{1, 7, 7};
  const auto trace = RunRound(FixtureRound0(), app, infra, {down, jam}, RoundOptions{});
  const auto& f = trace.record.facts;
  EXPECT_EQ(f.disconnections.count({"private5", 4}), 1u);
  EXPECT_EQ(f.unreachables.count({"database", 4}), 1u);
  EXPECT_EQ(f.timeouts.count({"api", "database", 4}), 1u);
  EXPECT_EQ(f.congestions.count({"public1", "private1", 7}), 1u);
  EXPECT_EQ(f.congestions.count({"private1", "public1", 7}), 1u);
  EXPECT_EQ(f.timeouts.count({"frontend", "api", 7}), 1u);
  EXPECT_EQ(trace.down_ticks, (std::vector<int>{4}));
}

TEST(RunRound, RaceBetweenColocatedComponents) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  // private1 hosts api (1500 cpu) and etcd (400 cpu) with 2400 cpu.
  const auto trace = RunRound(FixtureRound0(), app, infra, {NodeDelta("private1", "cpu", -600, 2, 2)}, RoundOptions{});
  const auto& f = trace.record.facts;
  EXPECT_EQ(f.races.count({"private1", "cpu", "api", "large", "etcd", "large", 2}), 1u);
  EXPECT_EQ(f.races.count({"private1", "cpu", "etcd", "large", "api", "large", 2}), 1u);
  EXPECT_EQ(f.overloads.size(), 1u);
}

TEST(SimulationLog, RoundTripsTheRecord) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const std::vector<Scenario> s = {NodeDelta("public1", "cpu", -3950, 31, 98),
                                   FlavourSine("database", "large", 56, 200, 10, 110)};
  const auto trace = RunRound(FixtureRound0(), app, infra, s, RoundOptions{});
  const std::string log = EmitSimulationLog(trace, app);
  const auto back = ParseSimulationRecord(log, &app);
  EXPECT_EQ(back.facts, trace.record.facts);
  EXPECT_EQ(back.power, trace.record.power);
  EXPECT_NE(log.find("|SIM|PlacementManager - Placement of webshop on infrastructure"), std::string::npos);
  EXPECT_EQ(log, EmitSimulationLog(RunRound(FixtureRound0(), app, infra, s, RoundOptions{}), app));
}

TEST(Baselines, FirstFitRespectsCapacity) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const auto d = FirstFit(app, infra);
  EXPECT_EQ(d.size(), app.components.size());
  for (const auto& [c, p] : d.assignments) {
    EXPECT_EQ(p.flavour, "large") << c;
  }
  PlacementProblem capacity_only;
  capacity_only.app = app;
  capacity_only.infra = infra;
  for (const auto& v : VerifyDeployment(d, capacity_only)) EXPECT_NE(v.rfind("C5", 0), 0u) << v;
  EXPECT_EQ(d.Find("load_balancer")->node, "public1");
}

TEST(Baselines, BestFitIsSeededAndFeasibleOnCapacity) {
  const auto app = FixtureApp();
  const auto infra = FixtureInfra();
  const auto a = BestFit(app, infra, 7);
  EXPECT_EQ(a, BestFit(app, infra, 7));
  EXPECT_EQ(a.size(), app.components.size());
  PlacementProblem capacity_only;
  capacity_only.app = app;
  capacity_only.infra = infra;
  for (const auto& v : VerifyDeployment(a, capacity_only)) EXPECT_NE(v.rfind("C5", 0), 0u) << v;
}

TEST(CampaignConfig, ParsesFixture) {
  const auto dir = testing::SourcePath("data/fixture");
  const auto cfg = ParseCampaignConfig(testing::ReadText(dir / "campaign.yaml"), dir);
  EXPECT_EQ(cfg.modes.size(), 5u);
  EXPECT_EQ(cfg.rounds, 6);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.priority, Priority::kFailure);
  EXPECT_EQ(cfg.scenarios.at("public1_degradation").size(), 2u);
  EXPECT_EQ(cfg.policy.infrastructure.size(), 6u);
  EXPECT_EQ(cfg.application_path, dir / "application.yaml");
  EXPECT_THROW(ParseCampaignConfig("campaign:\n  modes: [solver-plus]\n", dir), InputError);
  EXPECT_EQ(ParseCampaignMode("full-freeda"), CampaignMode::kFullLoop);
  EXPECT_FALSE(ParseCampaignMode("greedy").has_value());
}

TEST(Campaign, MetricsMatchIndependentComputation) {
  const auto dir = testing::SourcePath("data/fixture");
  auto cfg = ParseCampaignConfig(testing::ReadText(dir / "campaign.yaml"), dir);
  cfg.modes = {CampaignMode::kSolverOnly, CampaignMode::kFullLoop};
  cfg.rounds = 3;
  const auto result = RunCampaign(cfg, FixtureApp(), FixtureInfra());
  ASSERT_EQ(result.modes.size(), 2u);
  const auto& solver_only = result.modes[0];
  const auto& full = result.modes[1];
  ASSERT_EQ(full.rounds.size(), 3u);
  EXPECT_NEAR(solver_only.rounds[2].trace.metrics.co2_g, 195.0973518269149, 1e-9);
  EXPECT_NEAR(full.rounds[0].trace.metrics.co2_g, 195.0973518269149, 1e-9);
  EXPECT_NEAR(full.rounds[2].trace.metrics.co2_g, 132.55355182691488, 1e-9);
  EXPECT_EQ(full.rounds[2].trace.metrics.downtime_pct, 0.0);
  EXPECT_EQ(full.rounds[1].trace.metrics.changes, 3);
  EXPECT_NEAR(solver_only.rounds[1].trace.metrics.downtime_pct, 100.0 * 68 / 120, 1e-9);
  const std::string csv = result.MetricsCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "round,mode,downtime_pct,app_quality_pct,energy_kwh,co2_g,changes");
  const auto charts = RenderCharts(csv);
  EXPECT_EQ(charts.count("co2_g"), 1u);
  EXPECT_NE(charts.at("co2_g").find("<svg"), std::string::npos);
}

}  // namespace
}  // namespace edgeplan
