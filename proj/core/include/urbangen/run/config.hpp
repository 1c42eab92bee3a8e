#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/agent/config.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/roadnet/roadnet.hpp"
#include "urbangen/tools/backend.hpp"

namespace urbangen::run {

struct ToolBackendConfig {
  tools::BackendKind mode = tools::BackendKind::kMock;
  std::optional<tools::LiveEndpoint> live;  // required for live mode
};

// All paths are absolute once loaded; relative entries in a config file are
// resolved against the file's directory.
struct RunPaths {
  std::filesystem::path artifact_dir;
  std::filesystem::path osm_file;  // offline extract, or
  std::string osm_url;             // an Overpass-compatible endpoint
  std::filesystem::path osm_cache_dir;   // default: <artifact_dir>/osm_cache
  std::filesystem::path streetview_dir;  // fixture images
  bool streetview_http = false;          // endpoint and key from the environment
  std::filesystem::path library_dir;     // empty: builtin furniture
  std::filesystem::path replay_dir;      // default: <artifact_dir>/replay
  std::filesystem::path ground_mesh;     // empty: builtin
  std::filesystem::path sky_mesh;
};

struct MetricCommand {
  std::string name;
  std::string command;
};

struct EvaluationConfig {
  bool judge = true;
  std::vector<MetricCommand> metrics;
};

struct RunConfig {
  geodata::GeoBox bbox;
  std::map<tools::ToolKind, ToolBackendConfig> backends;
  agent::PipelineConfig pipeline;
  RunPaths paths;
  std::uint64_t seed = 0;
  std::vector<furnish::PlacementRule> rules = furnish::default_rules();
  roadnet::LaneCounts lanes;
  roadnet::TrafficOptions traffic;
  EvaluationConfig evaluation;

  // Throws Error(kConfig) naming the first problem.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
// Unknown keys are rejected. Throws Error(kConfig).
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// "min_lat,min_lon,max_lat,max_lon". Throws Error(kConfig).
geodata::GeoBox parse_bbox(const std::string& text);
// "tool=mode", where tool may be "all". Throws Error(kConfig).
void apply_backend_override(RunConfig& config, const std::string& spec);
// Keeps pipeline.seed and traffic.seed in step with `seed`.
void set_seed(RunConfig& config, std::uint64_t seed);

}  // namespace urbangen::run
