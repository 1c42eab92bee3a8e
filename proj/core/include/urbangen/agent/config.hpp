#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "urbangen/imagery/streetview.hpp"
#include "urbangen/tools/tool.hpp"

namespace urbangen::agent {

struct PipelineConfig {
  int accept_threshold = 4;
  int max_attempts = 3;
  double detection_threshold = 0.01;
  int top_k_views = 3;
  double yaw_step = 1.0;  // degrees
  int parallelism = 1;
  double raster_cell = 0.25;  // metres
  int render_size = 256;
  std::uint64_t seed = 0;
  imagery::CaptureOptions capture;
  std::map<tools::ToolKind, nlohmann::json> tool_params;  // overrides merged over the defaults

  // Throws Error(kConfig) naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Unknown keys are rejected. Throws Error(kConfig).
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

}  // namespace urbangen::agent
