#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/common/image.hpp"

namespace urbangen::tools {

enum class ToolKind { kDetector, kEnvInfoExtractor, kImaginer, kCritic, kShapeGenerator, kTexturePainter, kJudge };

inline constexpr ToolKind kAllTools[] = {ToolKind::kDetector,       ToolKind::kEnvInfoExtractor, ToolKind::kImaginer,
                                         ToolKind::kCritic,         ToolKind::kShapeGenerator,   ToolKind::kTexturePainter,
                                         ToolKind::kJudge};

std::string_view to_string(ToolKind tool);
ToolKind tool_from_string(std::string_view name);  // throws Error(kConfig)

enum class Modality { kText, kImage, kMeshRef, kRecord };
std::string_view to_string(Modality m);
Modality output_modality(ToolKind tool);

enum class BackendKind { kLive, kMock, kReplay };
std::string_view to_string(BackendKind b);
BackendKind backend_from_string(std::string_view name);  // throws Error(kConfig)

// Content-addressed pointer to a mesh held in a MeshStore.
struct MeshRef {
  std::string digest;  // SHA-256 of the stored GLB bytes
  bool operator==(const MeshRef&) const = default;
};

struct Part {
  enum class Kind { kText, kImage, kMesh };
  Kind kind = Kind::kText;
  std::string text;                 // kText
  std::vector<std::uint8_t> bytes;  // kImage: PNG bytes
  MeshRef mesh;                     // kMesh

  static Part make_text(std::string text);
  static Part make_image(const RgbImage& image);
  static Part make_png(std::vector<std::uint8_t> png);
  static Part make_mesh(MeshRef ref);
  bool operator==(const Part&) const = default;
};

struct ToolRequest {
  ToolKind tool = ToolKind::kDetector;
  std::vector<Part> parts;
  nlohmann::json params = nlohmann::json::object();

  // Throws Error(kPrecondition): empty payload, non-object params, or a
  // parameter outside the tool's whitelist.
  void validate() const;
  std::vector<RgbImage> images() const;
  std::string text() const;  // text parts joined by newlines
};

const std::set<std::string>& allowed_params(ToolKind tool);

struct CacheKey {
  std::string digest;
  bool operator==(const CacheKey&) const = default;
};

// SHA-256 over the tool name, params serialized with sorted keys, and each
// part's kind, length and content hash.
CacheKey canonicalize(const ToolRequest& request);

struct ToolResponse {
  Modality type = Modality::kText;
  std::string text;
  std::vector<std::uint8_t> image_png;
  MeshRef mesh;
  nlohmann::json record;
  double latency_ms = 0.0;
  BackendKind backend = BackendKind::kMock;

  static ToolResponse make_text(std::string text);
  static ToolResponse make_image(const RgbImage& image);
  static ToolResponse make_mesh(MeshRef ref);
  static ToolResponse make_record(nlohmann::json record);

  RgbImage image() const;
  // Content only: latency and backend are not part of the persisted bytes.
  std::vector<std::uint8_t> serialize() const;
  static ToolResponse deserialize(std::span<const std::uint8_t> bytes);  // throws Error(kProtocol)
};

nlohmann::json request_to_json(const ToolRequest& request);  // human-readable summary for the replay cache

}  // namespace urbangen::tools

namespace urbangen::tools {

// Text part naming the building an asset request is for. Generators may use
// it as a caption; the scaffold mocks use it to look the footprint up.
Part asset_tag(std::string_view building_id);
std::optional<std::string> find_asset_tag(const ToolRequest& request);

}  // namespace urbangen::tools
