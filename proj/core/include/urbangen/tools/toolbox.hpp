#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>

#include "urbangen/tools/backend.hpp"

namespace urbangen::tools {

// Per-tool sampling defaults.
nlohmann::json default_params(ToolKind tool);

// Routes requests to one backend per tool. Defaults are merged under the
// request's own params, the request is validated and keyed, and the response
// modality is checked against the tool's declared output.
class Toolbox {
 public:
  using Observer = std::function<void(const ToolRequest&, const CacheKey&, const ToolResponse&)>;

  explicit Toolbox(std::shared_ptr<MeshStore> store = std::make_shared<MeshStore>());

  void set_backend(ToolKind tool, std::shared_ptr<Backend> backend);
  Backend* backend(ToolKind tool) const;
  void set_params(ToolKind tool, nlohmann::json params);  // replaces the defaults for `tool`
  const nlohmann::json& params(ToolKind tool) const;
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  // The request as it will be sent: defaults merged in.
  ToolRequest prepare(ToolRequest request) const;
  CacheKey key_for(const ToolRequest& request) const { return canonicalize(prepare(request)); }

  // Throws Error(kPrecondition) without a backend, Error(kProtocol) on a
  // modality mismatch, and whatever the backend raises.
  ToolResponse call(ToolRequest request);

  MeshStore& meshes() { return *store_; }
  std::shared_ptr<MeshStore> mesh_store() const { return store_; }
  std::size_t call_count(ToolKind tool) const;
  std::size_t network_calls() const;

 private:
  std::shared_ptr<MeshStore> store_;
  std::map<ToolKind, std::shared_ptr<Backend>> backends_;
  std::map<ToolKind, nlohmann::json> params_;
  std::map<ToolKind, std::atomic<std::size_t>> calls_;
  Observer observer_;
};

}  // namespace urbangen::tools
