#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twocon/cli.hpp"

using namespace twocon;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "twocon");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(TWOCON_DATA_DIR) + "/" + name; }

std::string temp_file(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST(Cli, CertifyExitCodes) {
  auto r = run({"certify", "--builtin", "multistable4", "--param", "0.7", "--method", "thm1"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("verdict"), "certified");
  EXPECT_EQ(j.at("method"), "thm3");
  EXPECT_EQ(run({"certify", "--builtin", "multistable4", "--param", "0.9"}).code, 1);
  EXPECT_EQ(run({"certify", "--builtin", "thomas3", "--param", "1.0", "--method", "n3"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"certify", "--builtin", "multistable4"}).code, 2);
  EXPECT_EQ(run({"certify", "--builtin", "multistable4", "--param", "0.5", "--file", data("cascade.json")}).code, 2);
  EXPECT_EQ(run({"certify", "--builtin", "lorenz", "--param", "0.5"}).code, 2);
  EXPECT_EQ(run({"certify", "--builtin", "multistable4", "--param", "0.5", "--method", "thm9"}).code, 2);
  EXPECT_EQ(run({"certify", "--builtin", "thomas4", "--param", "-1"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"sweep", "--builtin", "multistable4", "--bisect", "--range", "0.1", "0.3"}).code, 2);
  EXPECT_EQ(run({"sweep", "--builtin", "multistable4", "--bisect", "--curve"}).code, 2);
}

TEST(Cli, MalformedModelFiles) {
  const auto bad = temp_file("twocon_bad.json");
  std::ofstream(bad) << R"({"name": "x", "n1": 2, "n2": 2, "vertices": [[1, 2, 3]]})";
  auto r = run({"certify", "--file", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("vertices[0]"), std::string::npos) << r.err;
  std::ofstream(bad) << "{ not json";
  r = run({"certify", "--file", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ParseError at byte"), std::string::npos) << r.err;
  std::filesystem::remove(bad);
}

TEST(Cli, DecomposeCascadeHasZeroB1) {
  const auto r = run({"decompose", "--file", data("cascade.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto& v = j.at("vertices").at(0);
  for (const auto& x : v.at("B1").at("data")) EXPECT_EQ(x.get<double>(), 0.0);
  EXPECT_EQ(v.at("A_compound").at("rows"), 6);
}

TEST(Cli, CascadeFileCertifiesByPartitionedRoute) {
  const auto r = run({"certify", "--file", data("cascade.json"), "--method", "thm1"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_LE(nlohmann::json::parse(r.out).at("condition_value").get<double>(), 1e-6);
}

TEST(Cli, GainOutputIsDeterministic) {
  const std::vector<std::string> args{"gain", "--file", data("multistable4_k0.7.json")};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_NEAR(j.at("gamma1").at("gamma").get<double>(), 0.5, 1e-4);
  EXPECT_NEAR(j.at("gamma2").at("gamma").get<double>(), 0.35, 1e-4);
}

TEST(Cli, ConfigFillsMissingFlags) {
  const auto cfg = temp_file("twocon_cfg.json");
  std::ofstream(cfg) << R"({"builtin": "multistable4", "param": 0.9, "method": "thm1"})";
  EXPECT_EQ(run({"--config", cfg, "certify"}).code, 1);
  // Command-line flags win over the config file.
  EXPECT_EQ(run({"--config", cfg, "certify", "--param", "0.5"}).code, 0);
  std::filesystem::remove(cfg);
}

TEST(Cli, ToleranceFromEnvironment) {
  ::setenv(cli::kToleranceEnv, "1e-8", 1);
  const auto r = run({"certify", "--builtin", "multistable4", "--param", "0.5"});
  ::unsetenv(cli::kToleranceEnv);
  EXPECT_EQ(r.code, 0) << r.err;
  ::setenv(cli::kToleranceEnv, "-1", 1);
  EXPECT_EQ(run({"certify", "--builtin", "multistable4", "--param", "0.5"}).code, 2);
  ::unsetenv(cli::kToleranceEnv);
}

TEST(Cli, SweepWritesCsv) {
  const auto csv = temp_file("twocon_curve.csv");
  const auto r = run({"sweep", "--builtin", "multistable4", "--curve", "--grid", "0.1", "0.1", "0.3", "--csv", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "param,gamma1,gamma2,gamma12,Gamma1,Gamma2,verdict");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::filesystem::remove(csv);
}

TEST(Cli, SweepBisectJson) {
  const auto r = run({"sweep", "--builtin", "multistable4", "--bisect", "--method", "thm2", "--range", "0", "1",
                      "--tol", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("threshold").get<double>(), 0.715, 0.02);
}

TEST(Cli, SimulateCsv) {
  const auto r = run({"simulate", "--builtin", "thomas3", "--param", "1.0", "--t-end", "1", "--step", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,x3");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(run({"simulate", "--builtin", "thomas3", "--param", "1.0", "--x0", "1", "2"}).code, 2);
}

TEST(Cli, ReproThomasThree) {
  const auto r = run({"repro", "--example", "thomas3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("n3 threshold"), std::string::npos);
}
