#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "edgeplan/spec_io.hpp"
#include "test_support.hpp"

namespace edgeplan {
namespace {

namespace fs = std::filesystem;
using testing::ReadText;
using testing::SourcePath;

struct Run {
  int code = -1;
  std::string out;
};

Run Cli(const std::string& args) {
  const std::string cmd = std::string(EDGEPLAN_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("edgeplan_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  static std::string Fixture(const std::string& f) { return SourcePath("data/fixture/" + f).string(); }
  std::string Specs() const { return "--app " + Fixture("application.yaml") + " --infra " + Fixture("infrastructure.yaml"); }

  fs::path dir_;
};

TEST_F(CliTest, SolveFixture) {
  const auto r = Cli("solve " + Specs() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("status: optimal"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("objective: 21"), std::string::npos) << r.out;
  EXPECT_EQ(ParseDeployment(ReadText(dir_ / "deployment.txt")), testing::FixtureRound0());
  EXPECT_TRUE(fs::exists(dir_ / "model.txt"));
}

TEST_F(CliTest, RedeployWithFailureConstraints) {
  EXPECT_EQ(Cli("solve " + Specs() + " --out " + dir_.string()).code, 0);
  const auto cs = Write("fe.constraints",
                        "avoid(d(frontend,large),public1).\navoid(d(load_balancer,large),public1).\n");
  const auto r = Cli("solve " + Specs() + " --objective redeploy --previous " + (dir_ / "deployment.txt").string() +
                     " --constraints " + cs + " --out " + (dir_ / "r1").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("changes: 2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("objective: 5"), std::string::npos) << r.out;
}

TEST_F(CliTest, UnsatisfiableWithoutRelaxation) {
  const auto cs = Write("db.constraints",
                        "avoid(d(database,large),private1).\navoid(d(database,large),private5).\n");
  const auto r = Cli("solve " + Specs() + " --constraints " + cs + " --max-drop-k 0 --out " + dir_.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("no satisfactory deployment"), std::string::npos) << r.out;
  const auto relaxed = Cli("solve " + Specs() + " --constraints " + cs + " --out " + dir_.string());
  EXPECT_EQ(relaxed.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "relaxed.constraints"));
}

TEST_F(CliTest, InputErrors) {
  const auto bad = Write("bad.yaml", "app:\n  name: x\n");
  EXPECT_EQ(Cli("solve --app " + bad + " --infra " + Fixture("infrastructure.yaml")).code, 1);
  EXPECT_EQ(Cli("solve --app /no/such/file.yaml --infra " + Fixture("infrastructure.yaml")).code, 1);
  EXPECT_EQ(Cli("frobnicate").code, 1);
  const auto cfg = Write("c.yaml", "campaign:\n  application: " + Fixture("application.yaml") +
                                       "\n  infrastructure: " + Fixture("infrastructure.yaml") +
                                       "\n  modes: [solver-only, greedy]\n");
  EXPECT_EQ(Cli("campaign --config " + cfg + " --out " + dir_.string()).code, 1);
}

TEST_F(CliTest, OracleAgrees) {
  const auto r = Cli("oracle " + Specs());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("solver agrees: yes"), std::string::npos) << r.out;
}

TEST_F(CliTest, SimulateEnhanceHarmonize) {
  EXPECT_EQ(Cli("solve " + Specs() + " --out " + dir_.string()).code, 0);
  const auto sim = Cli("simulate " + Specs() + " --deployment " + (dir_ / "deployment.txt").string() +
                       " --config " + Fixture("campaign.yaml") + " --round 0 --out " + (dir_ / "sim").string());
  ASSERT_EQ(sim.code, 0);
  ASSERT_TRUE(fs::exists(dir_ / "sim" / "simulation.log"));

  const auto enh = Cli("enhance --log " + (dir_ / "sim" / "simulation.log").string() + " " + Specs() + " --kb " +
                       (dir_ / "kb.json").string() + " --out " + (dir_ / "enh").string());
  ASSERT_EQ(enh.code, 0);
  const auto failure = ParseConstraints(ReadText(dir_ / "enh" / "failure.constraints"));
  EXPECT_EQ(failure, (std::vector<SoftConstraint>{SoftConstraint::Avoid("frontend", "large", "public1"),
                                                   SoftConstraint::Avoid("load_balancer", "large", "public1")}));
  EXPECT_TRUE(fs::exists(dir_ / "kb.json"));
  const auto energy = ParseConstraints(ReadText(dir_ / "enh" / "energy.constraints"), Provenance::kEnergy);
  EXPECT_FALSE(energy.empty());

  const auto har = Cli("harmonize --failure " + (dir_ / "enh" / "failure.constraints").string() + " --energy " +
                       (dir_ / "enh" / "energy.constraints").string() + " --priority failure --out " +
                       (dir_ / "har").string());
  ASSERT_EQ(har.code, 0);
  EXPECT_EQ(ParseConstraints(ReadText(dir_ / "har" / "kept.constraints")).size(), failure.size() + energy.size());
  EXPECT_EQ(Cli("harmonize --failure " + (dir_ / "enh" / "failure.constraints").string() + " --energy " +
                (dir_ / "enh" / "energy.constraints").string() + " --priority sometimes")
                .code,
            1);
}

TEST_F(CliTest, CampaignWritesArtifacts) {
  const auto cfg = Write("c.yaml", "campaign:\n  application: " + Fixture("application.yaml") +
                                       "\n  infrastructure: " + Fixture("infrastructure.yaml") +
                                       "\n  modes: [bestfit, full-freeda]\n  rounds: 2\n  seed: 3\n");
  const auto r = Cli("campaign --config " + cfg + " --out " + (dir_ / "out").string() + " --charts");
  ASSERT_EQ(r.code, 0);
  const std::string csv = ReadText(dir_ / "out" / "metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "full-freeda" / "round1" / "simulation.log"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "charts" / "co2_g.svg"));
}

}  // namespace
}  // namespace edgeplan
