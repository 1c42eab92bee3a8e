#include "urbangen/tools/tool.hpp"

#include <map>

#include <fmt/format.h>

#include "urbangen/common/base64.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/hash.hpp"

namespace urbangen::tools {

using nlohmann::json;

namespace {

struct ToolInfo {
  ToolKind tool;
  std::string_view name;
  Modality output;
  std::set<std::string> params;
};

const std::vector<ToolInfo>& tool_table() {
  static const std::vector<ToolInfo> table = {
      {ToolKind::kDetector, "detector", Modality::kRecord, {"labels"}},
      {ToolKind::kEnvInfoExtractor, "env_info_extractor", Modality::kRecord, {"temperature", "top_p"}},
      {ToolKind::kImaginer, "imaginer", Modality::kImage, {"temperature", "top_p", "seed"}},
      {ToolKind::kCritic, "critic", Modality::kRecord, {"temperature", "top_p"}},
      {ToolKind::kShapeGenerator, "shape_generator", Modality::kMeshRef, {"seed"}},
      {ToolKind::kTexturePainter, "texture_painter", Modality::kMeshRef, {"resolution", "max_views", "seed"}},
      {ToolKind::kJudge, "judge", Modality::kText, {"temperature"}},
  };
  return table;
}

const ToolInfo& info(ToolKind tool) {
  for (const auto& t : tool_table()) {
    if (t.tool == tool) return t;
  }
  throw Error(ErrorCode::kPrecondition, "unknown tool");
}

std::string_view part_kind_name(Part::Kind k) {
  switch (k) {
    case Part::Kind::kText: return "text";
    case Part::Kind::kImage: return "image";
    case Part::Kind::kMesh: return "mesh";
  }
  return "?";
}

}  // namespace

std::string_view to_string(ToolKind tool) { return info(tool).name; }

ToolKind tool_from_string(std::string_view name) {
  for (const auto& t : tool_table()) {
    if (t.name == name) return t.tool;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown tool '{}'", name));
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kText: return "text";
    case Modality::kImage: return "image";
    case Modality::kMeshRef: return "mesh";
    case Modality::kRecord: return "record";
  }
  return "?";
}

Modality output_modality(ToolKind tool) { return info(tool).output; }

std::string_view to_string(BackendKind b) {
  switch (b) {
    case BackendKind::kLive: return "live";
    case BackendKind::kMock: return "mock";
    case BackendKind::kReplay: return "replay";
  }
  return "?";
}

BackendKind backend_from_string(std::string_view name) {
  if (name == "live") return BackendKind::kLive;
  if (name == "mock") return BackendKind::kMock;
  if (name == "replay") return BackendKind::kReplay;
  throw Error(ErrorCode::kConfig, fmt::format("unknown backend '{}' (expected live, mock or replay)", name));
}

const std::set<std::string>& allowed_params(ToolKind tool) { return info(tool).params; }

Part Part::make_text(std::string text) {
  Part p;
  p.kind = Kind::kText;
  p.text = std::move(text);
  return p;
}

Part Part::make_image(const RgbImage& image) { return make_png(encode_png(image)); }

Part Part::make_png(std::vector<std::uint8_t> png) {
  Part p;
  p.kind = Kind::kImage;
  p.bytes = std::move(png);
  return p;
}

Part Part::make_mesh(MeshRef ref) {
  Part p;
  p.kind = Kind::kMesh;
  p.mesh = std::move(ref);
  return p;
}

void ToolRequest::validate() const {
  if (parts.empty()) throw Error(ErrorCode::kPrecondition, fmt::format("{} request has an empty payload", to_string(tool)));
  if (!params.is_object()) throw Error(ErrorCode::kPrecondition, "request params must be an object");
  const auto& allowed = allowed_params(tool);
  for (const auto& [key, value] : params.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::kPrecondition, fmt::format("parameter '{}' is not accepted by {}", key, to_string(tool)));
    }
  }
}

std::vector<RgbImage> ToolRequest::images() const {
  std::vector<RgbImage> out;
  for (const auto& p : parts) {
    if (p.kind == Part::Kind::kImage) out.push_back(decode_png(p.bytes));
  }
  return out;
}

std::string ToolRequest::text() const {
  std::string out;
  for (const auto& p : parts) {
    if (p.kind != Part::Kind::kText) continue;
    if (!out.empty()) out += '\n';
    out += p.text;
  }
  return out;
}

CacheKey canonicalize(const ToolRequest& request) {
  Sha256 h;
  h.update("urbangen.tool-request.v1\n");
  h.update(to_string(request.tool));
  h.update("\n");
  h.update(request.params.dump());  // object keys are kept sorted
  h.update("\n");
  for (const auto& p : request.parts) {
    std::string content_hash;
    std::size_t length = 0;
    switch (p.kind) {
      case Part::Kind::kText:
        content_hash = sha256_hex(p.text);
        length = p.text.size();
        break;
      case Part::Kind::kImage:
        content_hash = sha256_hex(p.bytes);
        length = p.bytes.size();
        break;
      case Part::Kind::kMesh:
        content_hash = p.mesh.digest;
        length = p.mesh.digest.size();
        break;
    }
    h.update(fmt::format("{}:{}:{}\n", part_kind_name(p.kind), length, content_hash));
  }
  return {h.hex_digest()};
}

ToolResponse ToolResponse::make_text(std::string text) {
  ToolResponse r;
  r.type = Modality::kText;
  r.text = std::move(text);
  return r;
}

ToolResponse ToolResponse::make_image(const RgbImage& image) {
  ToolResponse r;
  r.type = Modality::kImage;
  r.image_png = encode_png(image);
  return r;
}

ToolResponse ToolResponse::make_mesh(MeshRef ref) {
  ToolResponse r;
  r.type = Modality::kMeshRef;
  r.mesh = std::move(ref);
  return r;
}

ToolResponse ToolResponse::make_record(json record) {
  ToolResponse r;
  r.type = Modality::kRecord;
  r.record = std::move(record);
  return r;
}

RgbImage ToolResponse::image() const {
  if (type != Modality::kImage) throw Error(ErrorCode::kProtocol, "response does not carry an image");
  return decode_png(image_png);
}

std::vector<std::uint8_t> ToolResponse::serialize() const {
  json j = {{"type", to_string(type)}};
  switch (type) {
    case Modality::kText: j["text"] = text; break;
    case Modality::kImage: j["image_png"] = base64_encode(image_png); break;
    case Modality::kMeshRef: j["mesh"] = mesh.digest; break;
    case Modality::kRecord: j["record"] = record; break;
  }
  const std::string s = j.dump();
  return {s.begin(), s.end()};
}

ToolResponse ToolResponse::deserialize(std::span<const std::uint8_t> bytes) {
  try {
    const json j = json::parse(bytes.begin(), bytes.end());
    const std::string type = j.at("type").get<std::string>();
    if (type == "text") return make_text(j.at("text").get<std::string>());
    if (type == "record") return make_record(j.at("record"));
    if (type == "mesh") return make_mesh({j.at("mesh").get<std::string>()});
    if (type == "image") {
      ToolResponse r;
      r.type = Modality::kImage;
      r.image_png = base64_decode(j.at("image_png").get<std::string>());
      return r;
    }
    throw Error(ErrorCode::kProtocol, "unknown response type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("malformed tool response: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) throw;
    throw Error(ErrorCode::kProtocol, std::string("malformed tool response: ") + e.what());
  }
}

json request_to_json(const ToolRequest& request) {
  json parts = json::array();
  for (const auto& p : request.parts) {
    switch (p.kind) {
      case Part::Kind::kText: parts.push_back({{"type", "text"}, {"text", p.text}}); break;
      case Part::Kind::kImage:
        parts.push_back({{"type", "image"}, {"bytes", p.bytes.size()}, {"sha256", sha256_hex(p.bytes)}});
        break;
      case Part::Kind::kMesh: parts.push_back({{"type", "mesh"}, {"digest", p.mesh.digest}}); break;
    }
  }
  return {{"tool", to_string(request.tool)}, {"params", request.params}, {"parts", parts}};
}

}  // namespace urbangen::tools

namespace urbangen::tools {

namespace {
constexpr std::string_view kAssetTagPrefix = "building_id: ";
}

Part asset_tag(std::string_view building_id) { return Part::make_text(std::string(kAssetTagPrefix) + std::string(building_id)); }

std::optional<std::string> find_asset_tag(const ToolRequest& request) {
  for (const auto& p : request.parts) {
    if (p.kind == Part::Kind::kText && p.text.rfind(kAssetTagPrefix, 0) == 0) return p.text.substr(kAssetTagPrefix.size());
  }
  return std::nullopt;
}

}  // namespace urbangen::tools
