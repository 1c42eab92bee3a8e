#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/agent/job.hpp"
#include "urbangen/tools/backend.hpp"

namespace urbangen::run {

// Run directory layout:
//   config.json, region.json           inputs as persisted at the start
//   blobs/ab/<sha256>                  immutable content-addressed artifacts
//   meshes/ab/<sha256>.glb             mesh store shared with the tool layer
//   jobs/<building>/state.json         latest checkpoint per building
//   jobs.jsonl                         append-only ledger
//   stages/<name>.json                 completion markers of region stages
//   roadnet.json, furniture.json, scene.glb, scene.json, eval_report.json
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file(const std::string& name) const { return root_ / name; }

  std::string put(std::span<const std::uint8_t> bytes);
  std::string put_text(std::string_view text);
  std::vector<std::uint8_t> get(const std::string& digest) const;  // throws Error(kData)
  std::string get_text(const std::string& digest) const;
  bool contains(const std::string& digest) const;
  std::filesystem::path blob_path(const std::string& digest) const;

  std::shared_ptr<tools::MeshStore> meshes() const { return meshes_; }

  void save_job(const agent::BuildingJob& job);
  std::optional<agent::BuildingJob> load_job(const std::string& building) const;

  // One JSON object per line. A timestamp is added under "time".
  void append_ledger(nlohmann::json entry);
  // Throws Error(kCorruptLedger) when a line does not parse or the file does
  // not end with a newline (a write cut short).
  std::vector<nlohmann::json> read_ledger() const;

  void mark_stage(const std::string& stage, const nlohmann::json& info);
  bool stage_done(const std::string& stage) const;
  void clear_stage(const std::string& stage);

 private:
  std::filesystem::path root_;
  std::shared_ptr<tools::MeshStore> meshes_;
  mutable std::mutex ledger_mutex_;
};

}  // namespace urbangen::run
