#include "urbangen/tools/backend.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "urbangen/common/base64.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/common/http.hpp"
#include "urbangen/mesh/io.hpp"

namespace urbangen::tools {

namespace fs = std::filesystem;
using nlohmann::json;

MeshStore::MeshStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path MeshStore::path_for(const MeshRef& ref) const {
  return dir_ / ref.digest.substr(0, 2) / (ref.digest + ".glb");
}

MeshRef MeshStore::put(const mesh::Mesh& m) {
  auto node = mesh::SceneNode{"asset", std::make_shared<const mesh::Mesh>(m), {}, 1.0, 0.0};
  return put_glb(mesh::export_glb(std::span<const mesh::SceneNode>(&node, 1)));
}

MeshRef MeshStore::put_glb(const std::vector<std::uint8_t>& glb) {
  MeshRef ref{sha256_hex(glb)};
  if (dir_.empty()) {
    std::lock_guard lock(mutex_);
    memory_.try_emplace(ref.digest, glb);
    return ref;
  }
  const auto path = path_for(ref);
  if (!fs::exists(path)) write_file_atomic(path, glb);
  return ref;
}

bool MeshStore::contains(const MeshRef& ref) const {
  if (dir_.empty()) {
    std::lock_guard lock(mutex_);
    return memory_.count(ref.digest) != 0;
  }
  return fs::exists(path_for(ref));
}

std::vector<std::uint8_t> MeshStore::get_glb(const MeshRef& ref) const {
  if (dir_.empty()) {
    std::lock_guard lock(mutex_);
    auto it = memory_.find(ref.digest);
    if (it == memory_.end()) throw Error(ErrorCode::kData, "mesh " + ref.digest + " is not in the store");
    return it->second;
  }
  const auto path = path_for(ref);
  if (!fs::exists(path)) throw Error(ErrorCode::kData, "mesh " + ref.digest + " is not in the store");
  return read_file_bytes(path);
}

mesh::Mesh MeshStore::get(const MeshRef& ref) const {
  const auto glb = get_glb(ref);
  auto nodes = mesh::import_glb(glb);
  if (nodes.size() != 1) throw Error(ErrorCode::kData, "stored mesh " + ref.digest + " is not a single-node scene");
  return std::move(nodes.front().mesh);
}

ToolResponse MockBackend::invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) {
  ++calls_;
  ToolResponse r = script_(request, key, store);
  r.backend = BackendKind::kMock;
  return r;
}

ReplayCache::ReplayCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

bool ReplayCache::contains(const CacheKey& key) const { return fs::exists(dir_ / (key.digest + ".response.bin")); }

std::optional<ToolResponse> ReplayCache::load(const CacheKey& key, MeshStore& store) const {
  const auto path = dir_ / (key.digest + ".response.bin");
  if (!fs::exists(path)) return std::nullopt;
  ToolResponse r = ToolResponse::deserialize(read_file_bytes(path));
  if (r.type == Modality::kMeshRef && !store.contains(r.mesh)) {
    const auto blob = dir_ / (r.mesh.digest + ".mesh.glb");
    if (!fs::exists(blob)) throw Error(ErrorCode::kData, "replay cache lacks mesh blob " + r.mesh.digest);
    store.put_glb(read_file_bytes(blob));
  }
  return r;
}

void ReplayCache::store(const ToolRequest& request, const CacheKey& key, const ToolResponse& response,
                        const MeshStore& meshes) {
  if (response.type == Modality::kMeshRef) {
    const auto blob = dir_ / (response.mesh.digest + ".mesh.glb");
    if (!fs::exists(blob)) write_file_atomic(blob, meshes.get_glb(response.mesh));
  }
  write_file_atomic(dir_ / (key.digest + ".request.json"), request_to_json(request).dump(2) + "\n");
  write_file_atomic(dir_ / (key.digest + ".response.bin"), response.serialize());
}

ToolResponse ReplayBackend::invoke(const ToolRequest&, const CacheKey& key, MeshStore& store) {
  auto r = cache_->load(key, store);
  if (!r) throw ReplayMiss(key.digest);
  r->backend = BackendKind::kReplay;
  return *r;
}

ToolResponse RecordingBackend::invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) {
  ToolResponse r = inner_->invoke(request, key, store);
  cache_->store(request, key, r, store);
  return r;
}

LiveBackend::LiveBackend(LiveEndpoint endpoint, RetryPolicy retry, std::shared_ptr<ReplayCache> cache)
    : endpoint_(std::move(endpoint)), retry_(retry), cache_(std::move(cache)) {
  if (endpoint_.url.empty()) throw Error(ErrorCode::kConfig, "live backend needs an endpoint url");
}

namespace {

std::string envelope(const ToolRequest& request, const MeshStore& store) {
  json parts = json::array();
  for (const auto& p : request.parts) {
    switch (p.kind) {
      case Part::Kind::kText: parts.push_back({{"type", "text"}, {"text", p.text}}); break;
      case Part::Kind::kImage: parts.push_back({{"type", "image"}, {"png_base64", base64_encode(p.bytes)}}); break;
      case Part::Kind::kMesh:
        parts.push_back({{"type", "mesh"}, {"glb_base64", base64_encode(store.get_glb(p.mesh))}});
        break;
    }
  }
  return json{{"tool", to_string(request.tool)}, {"params", request.params}, {"parts", parts}}.dump();
}

ToolResponse parse_live_response(const std::string& body, MeshStore& store) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("tool endpoint returned invalid JSON: ") + e.what());
  }
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "text") return ToolResponse::make_text(j.at("text").get<std::string>());
    if (type == "record") return ToolResponse::make_record(j.at("record"));
    if (type == "image") {
      ToolResponse r;
      r.type = Modality::kImage;
      r.image_png = base64_decode(j.at("png_base64").get<std::string>());
      decode_png(r.image_png);  // reject undecodable images here rather than downstream
      return r;
    }
    if (type == "mesh") {
      const auto glb = base64_decode(j.at("glb_base64").get<std::string>());
      mesh::import_glb(glb);
      return ToolResponse::make_mesh(store.put_glb(glb));
    }
    throw Error(ErrorCode::kProtocol, "tool endpoint returned unknown type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("tool endpoint response is missing fields: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) throw;
    throw Error(ErrorCode::kProtocol, std::string("tool endpoint returned unusable content: ") + e.what());
  }
}

}  // namespace

ToolResponse LiveBackend::invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) {
  const std::string body = envelope(request, store);
  http::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    if (const char* k = std::getenv(endpoint_.api_key_env.c_str()); k && *k) headers["Authorization"] = std::string("Bearer ") + k;
  }
  auto delay = retry_.base_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    ++network_calls_;
    std::string err;
    auto resp = http::post(endpoint_.url, body, "application/json", headers, &err, endpoint_.timeout_seconds);
    if (resp && resp->status == 200) {
      ToolResponse r = parse_live_response(resp->body, store);
      r.backend = BackendKind::kLive;
      if (cache_) cache_->store(request, key, r, store);
      return r;
    }
    if (resp && resp->status != 429 && resp->status < 500) {
      throw Error(ErrorCode::kToolUnavailable,
                  fmt::format("{} endpoint rejected the request with HTTP {}", to_string(request.tool), resp->status));
    }
    last_error = resp ? fmt::format("HTTP {}", resp->status) : err;
    if (attempt < retry_.max_attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw Error(ErrorCode::kToolUnavailable, fmt::format("{} unavailable after {} attempts: {}", to_string(request.tool),
                                                       retry_.max_attempts, last_error));
}

}  // namespace urbangen::tools
