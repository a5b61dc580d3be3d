#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "klasian/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "klasian");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = klasian::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  for (std::string w; in >> w;) parts.push_back(w);
  return parts;
}

nlohmann::json without_wall_time(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  j.erase("wall_time_ms");
  return j;
}

const std::vector<std::string> kMarket{"--s0", "100", "--mu", "0.05", "--sigma", "0.2", "--strike", "100", "--T", "64"};

}  // namespace

TEST(Cli, PriceSchemaAndDeterminism) {
  auto args = split("price --method subsample --epsilon 0.05 --paths 5000 --seed 7");
  args.insert(args.end(), kMarket.begin(), kMarket.end());
  const auto a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto j = nlohmann::json::parse(a.out);
  for (const char* key : {"value", "std_error", "method", "n_outer", "n_inner", "seed", "wall_time_ms"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["method"], "subsample");
  EXPECT_EQ(j["seed"], 7);
  args.push_back("--workers");
  args.push_back("3");
  const auto b = run(args);
  EXPECT_EQ(without_wall_time(a.out), without_wall_time(b.out));
  EXPECT_EQ(without_wall_time(a.out).dump(), without_wall_time(b.out).dump());
}

TEST(Cli, GoldenOutputs) {
  std::ifstream in(std::string(KLASIAN_GOLDEN_DIR) + "/golden.json");
  ASSERT_TRUE(in);
  const auto golden = nlohmann::json::parse(in);
  for (const auto& [command, expected] : golden["cli"].items()) {
    auto args = split("price --method " + command);
    args.insert(args.end(), kMarket.begin(), kMarket.end());
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << command << ": " << r.err;
    EXPECT_EQ(without_wall_time(r.out), expected) << command;
  }
}

TEST(Cli, ValidationFailureExitsTwo) {
  const auto r = run(split("price --method baseline --sigma 0 --seed 1"));
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  ASSERT_FALSE(r.err.empty());
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"], "validation");
  EXPECT_EQ(j["exit_code"], 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(split("analyze --probe nonsense --seed 1")).code, 2);
  EXPECT_EQ(run(split("price --method nonsense --seed 1")).code, 2);
  EXPECT_EQ(run(split("price --paths notanumber")).code, 2);
  EXPECT_EQ(run(split("frobnicate")).code, 2);
}

TEST(Cli, GeometricClosedForm) {
  const auto r = run(split("price --method geometric-cf --seed 1"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["std_error"], 0.0);
  EXPECT_NEAR(j["value"].get<double>(), 5.908600267254523, 1e-10);
}

TEST(Cli, QsimCheck) {
  const auto r = run(split("price --method qsim-check --seed 1"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["pass"], true);
  EXPECT_EQ(j["qubits"], 5);
}

TEST(Cli, MissingSeedIsEchoed) {
  const auto r = run(split("price --method baseline --paths 100 --T 4"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto notice = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["seed"], notice["seed"]);
}

TEST(Cli, AnalyzeTruncationWritesFiles) {
  const std::string prefix = ::testing::TempDir() + "klasian_trunc";
  const auto r = run(split("analyze --probe truncation --L 8,32 --L-ref 512 --paths 5000 --seed 3 --output " + prefix));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["bound_name"], "truncation");
  EXPECT_EQ(j["all_pass"], true);
  std::ifstream csv(prefix + ".csv"), js(prefix + ".json");
  ASSERT_TRUE(csv && js);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "bound_name,L,L_ref,t_worst,measured,measured_se,bound,pass");
  EXPECT_EQ(nlohmann::json::parse(js), j);
}

TEST(Cli, AnalyzeConvergenceHasSlope) {
  const auto r = run(split("analyze --probe convergence --method baseline --T 8 --budgets 200,400,800,1600 "
                           "--seeds 6 --oracle-paths 20000 --seed 4"));
  ASSERT_NE(r.code, 2) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["summary"].contains("slope"));
}

TEST(Cli, HelpListsFlags) {
  const auto r = run(split("price --help"));
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--method", "--s0", "--sigma", "--seed", "--workers", "--epsilon", "--paths"})
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
}
