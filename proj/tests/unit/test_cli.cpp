#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "clothtrack/cli.hpp"
#include "clothtrack/io.hpp"
#include "temp_dir.hpp"

using namespace clothtrack;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

// Small, fast setup shared by the end-to-end tests.
void write_tiny_config(const std::filesystem::path& path) {
  io::write_text(path,
                 "scenario.num_x = 6\n"
                 "scenario.num_y = 6\n"
                 "scenario.spacing = 0.02\n"
                 "scenario.substeps_per_action = 8\n"
                 "scenario.segments = 1\n"
                 "grid.stiffness = 0.55, 1.25\n"
                 "grid.dynamic_friction = 1.4\n"
                 "grid.particle_friction = 2.3\n"
                 "tto1.iterations = 5\n"
                 "tto2.iterations = 5\n");
}

}  // namespace

TEST(Cli, HelpAndVersion) {
  const CliRun h = run({"--help"});
  EXPECT_EQ(h.code, kExitOk);
  EXPECT_NE(h.out.find("track"), std::string::npos);
  EXPECT_EQ(run({"track", "--help"}).code, kExitOk);
  const CliRun v = run({"--version"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  const CliRun r = run({"gen"});
  EXPECT_EQ(r.code, kExitUsage);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"]["exit_code"], kExitUsage);
  EXPECT_EQ(run({"bench"}).code, kExitUsage);
}

TEST(Cli, ConfigErrors) {
  TempDir tmp;
  EXPECT_EQ(run({"gen", "--out", (tmp / "d").string(), "--set", "nope.key=1"}).code,
            kExitConfig);
  EXPECT_EQ(run({"gen", "--out", (tmp / "d").string(), "--set", "tracker.gamma=2"}).code,
            kExitConfig);
  EXPECT_EQ(run({"gen", "--out", (tmp / "d").string(), "--set", "no-equals-sign"}).code,
            kExitUsage);
}

TEST(Cli, IoErrors) {
  TempDir tmp;
  EXPECT_EQ(run({"eval", "--dataset", (tmp / "missing").string()}).code, kExitIo);
  EXPECT_EQ(run({"track", "--data", (tmp / "missing").string(), "--out",
                 (tmp / "o").string()})
                .code,
            kExitIo);
  EXPECT_EQ(run({"gen", "--out", (tmp / "d").string(), "--config",
                 (tmp / "missing.cfg").string()})
                .code,
            kExitIo);
}

TEST(Cli, GenTrackEval) {
  TempDir tmp;
  write_tiny_config(tmp / "tiny.cfg");
  const std::string data = (tmp / "data").string();
  const CliRun g = run({"gen", "--out", data, "--config", (tmp / "tiny.cfg").string(),
                     "--trajectories", "2", "--seed", "4"});
  ASSERT_EQ(g.code, kExitOk) << g.err;
  EXPECT_EQ(io::read_trajectory_dir(data).size(), 2u);

  const std::string ds = (tmp / "labels").string();
  const CliRun t = run({"track", "--data", data, "--out", ds, "--ablate", "no-act-cond",
                     "--diagnostics", (tmp / "diag.jsonl").string()});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  const json summary = json::parse(t.out);
  EXPECT_EQ(summary["command"], "track");
  EXPECT_EQ(io::read_dataset(ds).records.size(), 4u);
  EXPECT_TRUE(std::filesystem::exists(tmp / "diag.jsonl"));

  const CliRun e = run({"eval", "--dataset", ds, "--data", data, "--out",
                     (tmp / "report.csv").string()});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("method: no_act_cond"), std::string::npos);
  EXPECT_NE(e.out.find("records: 2"), std::string::npos);
  EXPECT_NE(e.out.find("mesh error (1e-4 m)"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(tmp / "report.csv"));
}

TEST(Cli, Calibrate) {
  TempDir tmp;
  write_tiny_config(tmp / "tiny.cfg");
  const std::string data = (tmp / "data").string();
  ASSERT_EQ(run({"gen", "--out", data, "--config", (tmp / "tiny.cfg").string()}).code, kExitOk);
  const CliRun c = run({"calibrate", "--data", data, "--out", (tmp / "sim.cfg").string()});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  const json j = json::parse(c.out);
  EXPECT_LT(j["index"].get<int>(), 2);
  EXPECT_TRUE(std::filesystem::exists(tmp / "sim.cfg"));
}

TEST(Cli, BenchRowsPerSeed) {
  TempDir tmp;
  write_tiny_config(tmp / "tiny.cfg");
  const CliRun b = run({"bench", "--seeds", "2", "--config", (tmp / "tiny.cfg").string()});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  std::istringstream lines(b.out);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("seed,method,", 0), 0u);
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 10);
}
