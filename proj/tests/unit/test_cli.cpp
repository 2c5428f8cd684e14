#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rpe/cli.hpp"

using namespace rpe;

namespace {

const std::string kDir = RPE_FIXTURES;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rpe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, WardropPigou) {
  const auto r = run({"wardrop", kDir + "/networks/pigou.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["tool"], "rpe");
  EXPECT_EQ(doc["exit_code"], 0);
  EXPECT_TRUE(doc.contains("config"));
}

TEST(Cli, PoaPigou) {
  const auto r = run({"poa", kDir + "/networks/pigou.json", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("price_of_anarchy"), std::string::npos);
}

TEST(Cli, CheckExitCodes) {
  EXPECT_EQ(run({"check", kDir + "/games/three_path.json", "--profile", "g0", "--all"}).code, kExitOk);
  EXPECT_EQ(run({"check", kDir + "/games/three_path.json", "--profile", "4/6,1/6,1/6",
                 "--admissible"})
                .code,
            kExitCheckFailed);
  EXPECT_EQ(run({"check", kDir + "/games/attack.json", "--profile", "half-half-zero", "--all"}).code,
            kExitCheckFailed);
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(run({"wardrop", kDir + "/missing.json"}).code, kExitInputError);
  EXPECT_EQ(run({"check", kDir + "/games/three_path.json", "--profile", "0.7,0.7,0", "--nash"}).code,
            kExitInputError);
  EXPECT_EQ(run({"bogus"}).code, kExitInputError);
  EXPECT_EQ(run({"rpe", kDir + "/networks/pigou.json", "--schedule", "5..1"}).code, kExitInputError);
}

TEST(Cli, SimulateDeterministicCsv) {
  const std::vector<std::string> args{"simulate", kDir + "/games/three_path.json", "--n", "500",
                                      "--seed", "3", "--format", "csv"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("# rpe ", 0), 0u);
  auto c = args;
  c[5] = "4";
  EXPECT_NE(run(c).out, a.out);
}

TEST(Cli, SimulateSinglePlayer) {
  const auto r = run({"simulate", kDir + "/games/three_path.json", "--n", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  const auto& s = doc["result"]["empirical_summary"];
  double mx = 0;
  for (const auto& [k, v] : s.items()) mx = std::max(mx, v.get<double>());
  EXPECT_DOUBLE_EQ(mx, 1.0);
}

TEST(Cli, OutDirWritesReportAndCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "rpe_cli_test_out";
  std::filesystem::remove_all(dir);
  const auto r = run({"rpe", kDir + "/networks/three_path.json", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  ASSERT_TRUE(std::filesystem::exists(dir / "trajectory.csv"));
  std::ifstream in(dir / "trajectory.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("# rpe ", 0), 0u);
  std::ifstream rep(dir / "report.json");
  const auto doc = nlohmann::json::parse(rep);
  EXPECT_EQ(doc["exit_code"], 0);
  std::filesystem::remove_all(dir);
}
