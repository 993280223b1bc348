#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ccx/cli.hpp"
#include "ccx/report.hpp"
#include "ccx/suites.hpp"

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ccx");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return ccx::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Report, DumpIsStable) {
  ccx::Report r("demo", {{"b", 1}, {"a", 2}});
  r.check("first", true, 0.5, 1.0);
  r.check("second", false, 2.0, 1.0, {{"why", "too big"}});
  EXPECT_FALSE(r.all_pass());
  const auto j = r.to_json();
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["checks"].size(), 2u);
  EXPECT_LT(r.dump().find("\"a\""), r.dump().find("\"b\""));
  EXPECT_NE(r.text().find("FAIL second"), std::string::npos);
}

TEST(Report, MergePrefixesNames) {
  ccx::Report top("all", {});
  ccx::Report sub("part", {{"x", 1}});
  sub.check("c", true, 0, 0);
  top.merge(sub);
  EXPECT_EQ(top.checks()[0]["name"], "part/c");
  EXPECT_TRUE(top.all_pass());
}

TEST(Cli, Lemma3PrintsIdentity) {
  testing::internal::CaptureStdout();
  const int rc = run_cli({"lemma3", "--n", "6"});
  const std::string out = testing::internal::GetCapturedStdout();
  EXPECT_EQ(rc, 0);
  EXPECT_NE(out.find("42 = 42 PASS"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  testing::internal::CaptureStderr();
  EXPECT_EQ(run_cli({"lemma3", "--bogus"}), 2);
  EXPECT_EQ(run_cli({"no-such-suite"}), 2);
  EXPECT_EQ(run_cli({}), 2);
  EXPECT_EQ(run_cli({"lemma3", "--n", "40"}), 2);
  EXPECT_EQ(run_cli({"lemma3", "--format", "csv"}), 2);
  testing::internal::GetCapturedStderr();
  testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"--help"}), 0);
  testing::internal::GetCapturedStdout();
}

TEST(Cli, WritesJsonReport) {
  const auto path = (std::filesystem::temp_directory_path() / "ccx_cli_cov.json").string();
  ASSERT_EQ(run_cli({"covariance-table", "--out", path}), 0);
  std::ifstream is(path);
  const auto j = nlohmann::json::parse(is);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["command"], "covariance-table");
  EXPECT_TRUE(j["pass"].get<bool>());
  for (const auto& c : j["checks"]) EXPECT_TRUE(c.contains("tolerance"));
  std::filesystem::remove(path);
}

TEST(Cli, CsvForTables) {
  testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"covariance-table", "--format", "csv"}), 0);
  const std::string out = testing::internal::GetCapturedStdout();
  EXPECT_EQ(out.rfind("r,C_reg,C_full,c1_exp_minus_2r\n", 0), 0u);
}

TEST(Cli, EnvironmentOverride) {
  setenv("CCX_N", "5", 1);
  testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"lemma3"}), 0);
  const std::string out = testing::internal::GetCapturedStdout();
  unsetenv("CCX_N");
  EXPECT_NE(out.find("14 = 14 PASS"), std::string::npos);
  EXPECT_EQ(out.find("42 = 42"), std::string::npos);
}

TEST(Cli, ConfigFile) {
  const auto path = (std::filesystem::temp_directory_path() / "ccx_cli.toml").string();
  std::ofstream(path) << "n = 4\n";
  testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"lemma3", "--config", path}), 0);
  const std::string out = testing::internal::GetCapturedStdout();
  EXPECT_NE(out.find("5 = 5 PASS"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Suites, TreeLengthsAreSeeded) {
  ccx::RunConfig rc;
  rc.instances = 40;
  rc.seed = 5;
  EXPECT_EQ(ccx::suite_tree_lengths(rc).dump(), ccx::suite_tree_lengths(rc).dump());
  rc.seed = 6;
  EXPECT_TRUE(ccx::suite_tree_lengths(rc).all_pass());
}
