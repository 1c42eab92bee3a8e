#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/imagery/streetview.hpp"
#include "urbangen/run/config.hpp"
#include "urbangen/run/store.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::run {

// Pipeline phases in execution order. The five building stages run per job
// on the worker pool; the others run once per region.
enum class RunStage { kFetch, kPerception, kImagination, kGen3D, kPostProcess, kAlign, kRoads, kFurnish, kAssemble, kEvaluate };

std::string_view to_string(RunStage stage);
RunStage run_stage_from_string(std::string_view name);  // throws Error(kConfig)
std::span<const RunStage> all_run_stages();
bool is_job_stage(RunStage stage);

struct RunSummary {
  ExitCode exit = ExitCode::kOk;
  bool already_complete = false;
  std::size_t jobs = 0;
  std::size_t done = 0;
  std::size_t failed = 0;
  std::size_t best_effort = 0;
  std::size_t degraded = 0;
  std::size_t processed = 0;  // jobs touched by this invocation
};

// Maps a job failure cause to the process exit code.
ExitCode exit_code_for_cause(const std::string& cause);

class Pipeline {
 public:
  // Opens or creates the run directory config.paths.artifact_dir. The config
  // is validated first and persisted as config.json; a directory holding a
  // different configuration is refused with Error(kConfig). An existing
  // ledger is checked and a corrupt one refused with Error(kCorruptLedger).
  explicit Pipeline(RunConfig config);
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  // Reopens a run from its persisted config.json.
  static std::unique_ptr<Pipeline> open(const std::filesystem::path& run_dir);

  const RunConfig& config() const { return config_; }
  ArtifactStore& store() { return store_; }
  Diagnostics& diagnostics() { return diag_; }
  // Backends are installed on first use; mocks need the fetched region.
  tools::Toolbox& toolbox();

  // Replaces a tool backend (tests and integrations); applies at next use.
  void override_backend(tools::ToolKind tool, std::shared_ptr<tools::Backend> backend);
  void set_streetview_client(std::shared_ptr<imagery::StreetViewClient> client);
  void set_log(std::function<void(const std::string&)> log) { log_ = std::move(log); }

  // Every stage in order, skipping work that is already persisted.
  RunSummary run();
  // One stage in isolation. Throws Error(kPrerequisite) naming what is
  // missing. Building stages only touch jobs waiting at that stage; with
  // `max_jobs` at most that many are processed (an interrupted run).
  RunSummary run_stage(RunStage stage, std::optional<std::size_t> max_jobs = std::nullopt);

  std::vector<agent::BuildingJob> jobs() const;
  const geodata::RegionModel& region();

 private:
  void fetch();
  void job_stage(RunStage stage, bool strict, std::optional<std::size_t> max_jobs, RunSummary& summary);
  void perception(agent::BuildingJob& job);
  void imagination(agent::BuildingJob& job);
  void gen3d(agent::BuildingJob& job);
  void postprocess(agent::BuildingJob& job);
  void align(agent::BuildingJob& job);
  void roads();
  void furnish();
  void assemble();
  void evaluate();
  void transition(agent::BuildingJob& job, agent::Stage to, nlohmann::json extra = nlohmann::json::object());
  void require_file(const std::string& name, RunStage needed_by, RunStage producer) const;
  const furnish::AssetLibrary& library();
  RunSummary summarize() const;
  void log(const std::string& message) const;

  RunConfig config_;
  ArtifactStore store_;
  Diagnostics diag_;
  std::shared_ptr<const geodata::RegionModel> region_;
  std::unique_ptr<tools::Toolbox> toolbox_;
  std::map<tools::ToolKind, std::shared_ptr<tools::Backend>> overrides_;
  std::shared_ptr<imagery::StreetViewClient> streetview_;
  std::optional<furnish::AssetLibrary> library_;
  std::function<void(const std::string&)> log_;
};

}  // namespace urbangen::run
