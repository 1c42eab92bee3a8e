#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "urbangen/mesh/mesh.hpp"
#include "urbangen/tools/tool.hpp"

namespace urbangen::tools {

// Content-addressed mesh storage. Meshes are stored as single-node GLB files
// named by the SHA-256 of their bytes. Without a directory the store is kept
// in memory.
class MeshStore {
 public:
  MeshStore() = default;
  explicit MeshStore(std::filesystem::path dir);

  MeshRef put(const mesh::Mesh& mesh);
  MeshRef put_glb(const std::vector<std::uint8_t>& glb);
  mesh::Mesh get(const MeshRef& ref) const;  // throws Error(kData) when absent
  std::vector<std::uint8_t> get_glb(const MeshRef& ref) const;
  bool contains(const MeshRef& ref) const;
  std::filesystem::path path_for(const MeshRef& ref) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<std::uint8_t>> memory_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  virtual ToolResponse invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) = 0;
  virtual std::size_t network_calls() const { return 0; }
};

// Deterministic scripted backend; never touches the network.
class MockBackend : public Backend {
 public:
  using Script = std::function<ToolResponse(const ToolRequest&, const CacheKey&, MeshStore&)>;
  explicit MockBackend(Script script) : script_(std::move(script)) {}

  BackendKind kind() const override { return BackendKind::kMock; }
  ToolResponse invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  Script script_;
  std::atomic<std::size_t> calls_{0};
};

// On-disk cache of tool exchanges: {digest}.request.json, {digest}.response.bin
// and, for mesh responses, {mesh digest}.mesh.glb. Writes are atomic renames,
// so concurrent writers of the same digest are harmless.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  bool contains(const CacheKey& key) const;
  std::optional<ToolResponse> load(const CacheKey& key, MeshStore& store) const;
  void store(const ToolRequest& request, const CacheKey& key, const ToolResponse& response, const MeshStore& meshes);

 private:
  std::filesystem::path dir_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {}
  BackendKind kind() const override { return BackendKind::kReplay; }
  // Throws ReplayMiss naming the digest.
  ToolResponse invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) override;

 private:
  std::shared_ptr<ReplayCache> cache_;
};

// Wraps another backend and persists every response to a replay cache.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ReplayCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  BackendKind kind() const override { return inner_->kind(); }
  ToolResponse invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) override;
  std::size_t network_calls() const override { return inner_->network_calls(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ReplayCache> cache_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};  // doubled after each failed attempt
};

struct LiveEndpoint {
  std::string url;
  std::string api_key_env;  // name of the environment variable holding the key
  int timeout_seconds = 300;
};

// JSON-over-HTTP backend. Request body:
//   {"tool", "params", "parts": [{"type": "text", "text"} | {"type": "image", "png_base64"}
//                                | {"type": "mesh", "glb_base64"}]}
// Response body: {"type": "text"|"image"|"mesh"|"record", "text"|"png_base64"|"glb_base64"|"record"}.
// Transport failures, 429 and 5xx are retried; exhaustion raises
// ToolUnavailable. Malformed bodies raise ProtocolError.
class LiveBackend : public Backend {
 public:
  LiveBackend(LiveEndpoint endpoint, RetryPolicy retry = {}, std::shared_ptr<ReplayCache> cache = nullptr);
  BackendKind kind() const override { return BackendKind::kLive; }
  ToolResponse invoke(const ToolRequest& request, const CacheKey& key, MeshStore& store) override;
  std::size_t network_calls() const override { return network_calls_.load(); }

 private:
  LiveEndpoint endpoint_;
  RetryPolicy retry_;
  std::shared_ptr<ReplayCache> cache_;
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace urbangen::tools
