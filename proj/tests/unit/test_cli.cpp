#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include <fmt/format.h>

#include "test_support.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/run/config.hpp"

#ifdef URBANGEN_CLI

namespace urbangen {
namespace {

namespace ut = urbangen::testing;
using nlohmann::json;

struct CliResult {
  int exit = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  const auto cmd = fmt::format("'{}' {} 2>/dev/null", URBANGEN_CLI, args);
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_config(const ut::TempDir& dir, const json& j) {
  const auto path = dir / "config.json";
  write_file_atomic(path, j.dump(2));
  return path.string();
}

TEST(Cli, ValidateConfigPrintsResolvedConfig) {
  const auto r = cli(fmt::format("validate-config '{}' --seed 11", ut::fixture("block_config.json").string()));
  ASSERT_EQ(r.exit, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["seed"], 11);
  EXPECT_TRUE(std::filesystem::path(j["paths"]["osm_file"].get<std::string>()).is_absolute());
}

TEST(Cli, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(cli("").exit, 2);
  EXPECT_EQ(cli("frobnicate").exit, 2);
  EXPECT_EQ(cli("run").exit, 2);
  EXPECT_EQ(cli("validate-config /nonexistent/config.json").exit, 2);
  const auto cfg = ut::fixture("block_config.json").string();
  EXPECT_EQ(cli(fmt::format("validate-config '{}' --backend judge=psychic", cfg)).exit, 2);
  EXPECT_EQ(cli(fmt::format("validate-config '{}' --bbox 1,2,3", cfg)).exit, 2);
  EXPECT_EQ(cli(fmt::format("stage paint --config '{}'", cfg)).exit, 2);
  EXPECT_EQ(cli(fmt::format("stage fetch --config '{}' --run-dir /tmp", cfg)).exit, 2);

  ut::TempDir dir("cli_badkey");
  auto j = run::to_json(ut::block_config(dir / "run"));
  j["pipeline"]["max_atempts"] = 3;
  EXPECT_EQ(cli(fmt::format("validate-config '{}'", write_config(dir, j))).exit, 2);
}

TEST(Cli, FullRunThenResumeIsComplete) {
  ut::TempDir dir("cli_run");
  const auto cfg = write_config(dir, run::to_json(ut::block_config(dir / "run")));
  const auto r = cli(fmt::format("run --config '{}'", cfg));
  ASSERT_EQ(r.exit, 0) << r.out;
  EXPECT_NE(r.out.find("done 12"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "scene.glb"));
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "eval_report.json"));

  const auto again = cli(fmt::format("resume '{}'", (dir / "run").string()));
  EXPECT_EQ(again.exit, 0);
  EXPECT_NE(again.out.find("already complete"), std::string::npos);

  const auto before = sha256_hex(read_file_bytes(dir / "run" / "eval_report.json"));
  EXPECT_EQ(cli(fmt::format("evaluate '{}'", (dir / "run").string())).exit, 0);
  EXPECT_EQ(sha256_hex(read_file_bytes(dir / "run" / "eval_report.json")), before);
}

TEST(Cli, StagesRunInIsolation) {
  ut::TempDir dir("cli_stage");
  const auto cfg = write_config(dir, run::to_json(ut::block_config(dir / "run")));
  const auto run_dir = (dir / "run").string();
  // Assemble needs finished jobs: a prerequisite failure, reported as a data error.
  EXPECT_EQ(cli(fmt::format("stage fetch --config '{}'", cfg)).exit, 0);
  EXPECT_EQ(cli(fmt::format("stage assemble --run-dir '{}'", run_dir)).exit, 4);
  EXPECT_EQ(cli(fmt::format("stage roads --run-dir '{}'", run_dir)).exit, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "roadnet.json"));
  EXPECT_EQ(cli(fmt::format("resume '{}'", run_dir)).exit, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "scene.glb"));
}

TEST(Cli, ToolFailureExitsThree) {
  ut::TempDir dir("cli_tool");
  const auto cfg = write_config(dir, run::to_json(ut::block_config(dir / "run")));
  // Replay with an empty cache: every tool call misses.
  EXPECT_EQ(cli(fmt::format("run --config '{}' --backend all=replay", cfg)).exit, 3);
}

TEST(Cli, BadMapDataExitsFour) {
  ut::TempDir dir("cli_data");
  auto c = ut::block_config(dir / "run");
  c.paths.osm_file = ut::fixture("truncated.osm");
  EXPECT_EQ(cli(fmt::format("run --config '{}'", write_config(dir, run::to_json(c)))).exit, 4);
}

}  // namespace
}  // namespace urbangen

#endif
