#include "urbangen/agent/config.hpp"

#include <set>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"

namespace urbangen::agent {

using nlohmann::json;

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (accept_threshold < 0 || accept_threshold > 5) fail("accept_threshold must be an integer in [0, 5]");
  if (max_attempts < 1) fail("max_attempts must be at least 1");
  if (!(detection_threshold >= 0.0 && detection_threshold <= 1.0)) fail("detection_threshold must lie in [0, 1]");
  if (top_k_views < 0) fail("top_k_views must not be negative");
  if (!(yaw_step > 0.0 && yaw_step <= 180.0)) fail("yaw_step must lie in (0, 180] degrees");
  if (parallelism < 1) fail("parallelism must be at least 1");
  if (!(raster_cell > 0.0)) fail("raster_cell must be positive");
  if (render_size < 16 || render_size > 4096) fail("render_size must lie in [16, 4096]");
  if (capture.max_points < 0) fail("capture.max_points must not be negative");
  if (!(capture.radius > 0.0)) fail("capture.radius must be positive");
  if (!(capture.sample_spacing > 0.0)) fail("capture.sample_spacing must be positive");
  if (!(capture.fallback_distance > 0.0)) fail("capture.fallback_distance must be positive");
  if (!(capture.fov_deg > 0.0 && capture.fov_deg < 180.0)) fail("capture.fov_deg must lie in (0, 180)");
  for (const auto& [tool, params] : tool_params) {
    if (!params.is_object()) fail(fmt::format("tool_params.{} must be an object", tools::to_string(tool)));
    for (const auto& [key, value] : params.items()) {
      if (!tools::allowed_params(tool).count(key)) {
        fail(fmt::format("tool_params.{}.{} is not a parameter of that tool", tools::to_string(tool), key));
      }
    }
  }
}

json to_json(const PipelineConfig& c) {
  json tp = json::object();
  for (const auto& [tool, params] : c.tool_params) tp[std::string(tools::to_string(tool))] = params;
  return {
      {"accept_threshold", c.accept_threshold},
      {"max_attempts", c.max_attempts},
      {"detection_threshold", c.detection_threshold},
      {"top_k_views", c.top_k_views},
      {"yaw_step", c.yaw_step},
      {"parallelism", c.parallelism},
      {"raster_cell", c.raster_cell},
      {"render_size", c.render_size},
      {"seed", c.seed},
      {"capture",
       {{"max_points", c.capture.max_points},
        {"radius", c.capture.radius},
        {"sample_spacing", c.capture.sample_spacing},
        {"fallback_distance", c.capture.fallback_distance},
        {"fov_deg", c.capture.fov_deg}}},
      {"tool_params", tp},
  };
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::kConfig, fmt::format("unknown key '{}{}'", where, key));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, fmt::format("'{}{}' has the wrong type", where, key));
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "pipeline configuration must be an object");
  reject_unknown(j,
                 {"accept_threshold", "max_attempts", "detection_threshold", "top_k_views", "yaw_step", "parallelism",
                  "raster_cell", "render_size", "seed", "capture", "tool_params"},
                 "");
  PipelineConfig c;
  read(j, "accept_threshold", c.accept_threshold, "");
  read(j, "max_attempts", c.max_attempts, "");
  read(j, "detection_threshold", c.detection_threshold, "");
  read(j, "top_k_views", c.top_k_views, "");
  read(j, "yaw_step", c.yaw_step, "");
  read(j, "parallelism", c.parallelism, "");
  read(j, "raster_cell", c.raster_cell, "");
  read(j, "render_size", c.render_size, "");
  read(j, "seed", c.seed, "");
  if (j.contains("capture")) {
    const auto& cap = j["capture"];
    if (!cap.is_object()) throw Error(ErrorCode::kConfig, "'capture' must be an object");
    reject_unknown(cap, {"max_points", "radius", "sample_spacing", "fallback_distance", "fov_deg"}, "capture.");
    read(cap, "max_points", c.capture.max_points, "capture.");
    read(cap, "radius", c.capture.radius, "capture.");
    read(cap, "sample_spacing", c.capture.sample_spacing, "capture.");
    read(cap, "fallback_distance", c.capture.fallback_distance, "capture.");
    read(cap, "fov_deg", c.capture.fov_deg, "capture.");
  }
  if (j.contains("tool_params")) {
    const auto& tp = j["tool_params"];
    if (!tp.is_object()) throw Error(ErrorCode::kConfig, "'tool_params' must be an object");
    for (const auto& [name, params] : tp.items()) c.tool_params[tools::tool_from_string(name)] = params;
  }
  c.validate();
  return c;
}

}  // namespace urbangen::agent
