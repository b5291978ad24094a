#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli_matrix.hpp"
#include "mdm/version.hpp"

namespace mdm {
namespace {

using nlohmann::json;
using test::run_cli;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Cli, ExactK4) {
  const auto dir = test::cli_fixtures();
  auto r = run_cli({"exact", "--graph", (dir / "k4.json").string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_NEAR(doc["result"]["log_z"].get<double>(), std::log(10.0), 1e-14);
  EXPECT_EQ(doc["meta"]["version"], kVersion);
  EXPECT_EQ(doc["meta"]["seed"], 0);
  EXPECT_EQ(doc["meta"]["config_hash"].get<std::string>().size(), 16u);
}

TEST(Cli, CsvHeaderBlock) {
  const auto dir = test::cli_fixtures();
  auto r = run_cli({"exact", "--graph", (dir / "k4.json").string(), "--seed", "42"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# mdm " + std::string(kVersion) + "\n# config_hash: ", 0), 0u);
  EXPECT_NE(r.out.find("# seed: 42\n"), std::string::npos);
}

TEST(Cli, MatrixRunsAndIsDeterministic) {
  for (const auto& args : test::cli_matrix()) {
    auto full = args;
    full.push_back("--strict-determinism");
    auto a = run_cli(full), b = run_cli(full);
    std::string joined;
    for (const auto& s : args) joined += s + " ";
    ASSERT_EQ(a.code, 0) << joined << a.err;
    EXPECT_EQ(a.out, b.out) << joined;
  }
}

TEST(Cli, ThreadsDoNotChangeResults) {
  auto a = run_cli({"gaussian", "--graph", (test::cli_fixtures() / "k4.json").string(), "--samples", "30000",
                    "--threads", "1"});
  auto b = run_cli({"gaussian", "--graph", (test::cli_fixtures() / "k4.json").string(), "--samples", "30000",
                    "--threads", "3"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SeedChangesHash) {
  auto a = run_cli({"er", "density", "--K", "1000", "--seed", "1", "--format", "json"});
  auto b = run_cli({"er", "density", "--K", "1000", "--seed", "2", "--format", "json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(json::parse(a.out)["meta"]["config_hash"], json::parse(b.out)["meta"]["config_hash"]);
}

TEST(Cli, ConfigFileAndOverrides) {
  const auto dir = test::cli_fixtures();
  const auto cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"seed": 5, "fluct": {"action": "pmf", "N": 10, "h": 0.5}})";
  auto r = run_cli({"fluct", "--config", cfg.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["meta"]["seed"], 5);
  EXPECT_EQ(doc["meta"]["config"]["N"], 10);
  auto o = run_cli({"fluct", "--config", cfg.string(), "--N", "12", "--format", "json"});
  EXPECT_EQ(json::parse(o.out)["meta"]["config"]["N"], 12);

  // Same resolved config from flags alone gives the same bytes.
  auto f = run_cli({"fluct", "pmf", "--N", "10", "--h", "0.5", "--seed", "5", "--format", "json"});
  EXPECT_EQ(f.out, r.out);
}

TEST(Cli, UnknownConfigKeysRejected) {
  const auto dir = test::cli_fixtures();
  const auto cfg = dir / "bad_config.json";
  std::ofstream(cfg) << R"({"fluct": {"action": "pmf", "NN": 10}})";
  auto r = run_cli({"fluct", "--config", cfg.string()});
  EXPECT_EQ(r.code, app::kExitUsage);
  EXPECT_EQ(r.err.rfind("mdm: error: config: unknown key 'fluct.NN'", 0), 0u) << r.err;

  std::ofstream(cfg) << R"({"colour": 1})";
  EXPECT_EQ(run_cli({"selfavg", "--config", cfg.string()}).code, app::kExitUsage);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"exact"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"meanfield", "sideways"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"fluct", "pmf", "--N", "abc"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"fluct", "pmf", "--N", "100", "--seed", "-1"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"meanfield", "analyze", "--J", "-1"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"exact", "--graph", "/nonexistent/graph.json"}).code, app::kExitUsage);
  EXPECT_EQ(run_cli({"--version"}).code, 0);
}

TEST(Cli, SizeCapExitCode) {
  const auto dir = test::cli_fixtures();
  std::ofstream(dir / "p26.txt") << [] {
    std::string s = "26\n";
    for (int i = 0; i + 1 < 26; ++i) s += std::to_string(i) + " " + std::to_string(i + 1) + "\n";
    return s;
  }();
  auto r = run_cli({"exact", "--graph", (dir / "p26.txt").string()});
  EXPECT_EQ(r.code, app::kExitNumeric);
  EXPECT_EQ(r.err.rfind("mdm: error: ", 0), 0u);
}

TEST(Cli, CriticalNeedsReference) {
  auto r = run_cli({"fluct", "critical", "--Ns", "1e3"});
  EXPECT_EQ(r.code, app::kExitUsage);
  EXPECT_NE(r.err.find("meanfield critical"), std::string::npos);

  const auto dir = test::cli_fixtures();
  auto doc = json::parse(slurp(dir / "reference.json"));
  doc["version"] = "0.0.0";
  std::ofstream(dir / "stale.json") << doc.dump();
  auto s = run_cli({"fluct", "critical", "--Ns", "1e3", "--reference", (dir / "stale.json").string()});
  EXPECT_EQ(s.code, app::kExitUsage);
}

TEST(Cli, ReferenceRegenerationIsIdentical) {
  const auto dir = test::cli_fixtures();
  ASSERT_EQ(run_cli({"meanfield", "critical", "--out", (dir / "ref_a.json").string()}).code, 0);
  ASSERT_EQ(run_cli({"meanfield", "critical", "--out", (dir / "ref_b.json").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "ref_a.json"), slurp(dir / "ref_b.json"));
  auto doc = json::parse(slurp(dir / "ref_a.json"));
  EXPECT_EQ(doc["provenance"], "derived");
  EXPECT_TRUE(doc.contains("meta"));
}

TEST(Cli, Fnv1a) {
  EXPECT_EQ(app::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(app::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

}  // namespace
}  // namespace mdm
