// Command-line front end: runs, resumes and inspects city-block generation
// runs. Exit codes: 0 ok, 2 config, 3 tool outage, 4 data.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/run/config.hpp"
#include "urbangen/run/pipeline.hpp"

namespace {

using urbangen::Error;
using urbangen::ErrorCode;
using urbangen::ExitCode;
namespace run = urbangen::run;

struct Overrides {
  std::string bbox;
  std::vector<std::string> backends;
  std::optional<int> parallelism;
  std::optional<std::uint64_t> seed;
  std::string artifact_dir;
  std::string streetview_dir;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--bbox", o.bbox, "min_lat,min_lon,max_lat,max_lon");
  cmd->add_option("--backend", o.backends, "tool=mock|replay|live, or all=mode (repeatable)");
  cmd->add_option("--parallelism", o.parallelism, "worker threads for building jobs");
  cmd->add_option("--seed", o.seed, "seed for tools and traffic");
  cmd->add_option("--artifact-dir", o.artifact_dir, "run directory");
  cmd->add_option("--streetview-dir", o.streetview_dir, "directory of street-view fixture images");
}

run::RunConfig load(const std::string& path, const Overrides& o) {
  auto cfg = run::load_run_config(path);
  if (!o.bbox.empty()) cfg.bbox = run::parse_bbox(o.bbox);
  for (const auto& b : o.backends) run::apply_backend_override(cfg, b);
  if (o.parallelism) cfg.pipeline.parallelism = *o.parallelism;
  if (o.seed) run::set_seed(cfg, *o.seed);
  if (!o.artifact_dir.empty()) cfg.paths.artifact_dir = std::filesystem::absolute(o.artifact_dir);
  if (!o.streetview_dir.empty()) cfg.paths.streetview_dir = std::filesystem::absolute(o.streetview_dir);
  cfg.validate();
  return cfg;
}

void print_diagnostics(const urbangen::Diagnostics& diag) {
  for (const auto& e : diag.entries())
    std::fprintf(stderr, "%s: %s [%s] %s\n", e.severity == urbangen::Severity::kWarning ? "warning" : "info",
                 e.code.c_str(), e.subject.c_str(), e.message.c_str());
}

int finish(run::Pipeline& p, const run::RunSummary& s) {
  print_diagnostics(p.diagnostics());
  if (s.already_complete) {
    std::puts("already complete");
  } else {
    fmt::print("jobs {}: done {}, failed {}, best-effort {}, degraded {}\n", s.jobs, s.done, s.failed, s.best_effort,
               s.degraded);
  }
  return static_cast<int>(s.exit);
}

void attach_log(run::Pipeline& p) {
  p.set_log([](const std::string& m) { std::fprintf(stderr, "%s\n", m.c_str()); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate textured 3D city blocks from map data"};
  app.require_subcommand(1);

  std::string config_path, run_dir, stage_name;
  Overrides overrides;

  auto* run_cmd = app.add_subcommand("run", "run every stage for a configured region");
  run_cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
  add_overrides(run_cmd, overrides);

  auto* resume_cmd = app.add_subcommand("resume", "continue an interrupted run");
  resume_cmd->add_option("run_dir", run_dir, "run directory")->required();

  auto* stage_cmd = app.add_subcommand("stage", "run one stage in isolation");
  stage_cmd->add_option("name", stage_name, "fetch, perception, imagination, gen3d, postprocess, align, roads, "
                                            "furnish, assemble or evaluate")
      ->required();
  stage_cmd->add_option("--config", config_path, "run configuration (JSON)");
  stage_cmd->add_option("--run-dir", run_dir, "existing run directory");
  add_overrides(stage_cmd, overrides);

  auto* eval_cmd = app.add_subcommand("evaluate", "recompute eval_report.json for a finished run");
  eval_cmd->add_option("run_dir", run_dir, "run directory")->required();

  auto* check_cmd = app.add_subcommand("validate-config", "check a configuration file and exit");
  check_cmd->add_option("config", config_path, "run configuration (JSON)")->required();
  add_overrides(check_cmd, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*check_cmd) {
      const auto cfg = load(config_path, overrides);
      std::cout << run::to_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (*run_cmd) {
      run::Pipeline p(load(config_path, overrides));
      attach_log(p);
      const auto s = p.run();
      return finish(p, s);
    }
    if (*resume_cmd) {
      auto p = run::Pipeline::open(run_dir);
      attach_log(*p);
      const auto s = p->run();
      return finish(*p, s);
    }
    if (*eval_cmd) {
      auto p = run::Pipeline::open(run_dir);
      attach_log(*p);
      const auto s = p->run_stage(run::RunStage::kEvaluate);
      return finish(*p, s);
    }
    if (*stage_cmd) {
      const auto stage = run::run_stage_from_string(stage_name);
      if (config_path.empty() == run_dir.empty())
        throw Error(ErrorCode::kConfig, "stage needs exactly one of --config or --run-dir");
      auto p = run_dir.empty() ? std::make_unique<run::Pipeline>(load(config_path, overrides))
                               : run::Pipeline::open(run_dir);
      attach_log(*p);
      const auto s = p->run_stage(stage);
      return finish(*p, s);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", urbangen::to_string(e.code()), e.what());
    return static_cast<int>(urbangen::exit_code_for(e.code()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ExitCode::kFailure);
  }
  return 0;
}
