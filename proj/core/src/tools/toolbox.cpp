#include "urbangen/tools/toolbox.hpp"

#include <fmt/format.h>

#include "urbangen/common/error.hpp"

namespace urbangen::tools {

using nlohmann::json;

json default_params(ToolKind tool) {
  switch (tool) {
    case ToolKind::kImaginer: return {{"temperature", 0.9}};
    case ToolKind::kCritic: return {{"temperature", 0.6}, {"top_p", 0.85}};
    case ToolKind::kJudge: return {{"temperature", 0}};
    case ToolKind::kTexturePainter: return {{"resolution", 512}, {"max_views", 6}};
    case ToolKind::kEnvInfoExtractor: return {{"temperature", 0}};
    case ToolKind::kDetector: return {{"labels", {"building"}}};
    case ToolKind::kShapeGenerator: return json::object();
  }
  return json::object();
}

Toolbox::Toolbox(std::shared_ptr<MeshStore> store) : store_(std::move(store)) {
  for (auto t : kAllTools) {
    params_[t] = default_params(t);
    calls_[t] = 0;
  }
}

void Toolbox::set_backend(ToolKind tool, std::shared_ptr<Backend> backend) { backends_[tool] = std::move(backend); }

Backend* Toolbox::backend(ToolKind tool) const {
  auto it = backends_.find(tool);
  return it == backends_.end() ? nullptr : it->second.get();
}

void Toolbox::set_params(ToolKind tool, json params) { params_[tool] = std::move(params); }

const json& Toolbox::params(ToolKind tool) const { return params_.at(tool); }

ToolRequest Toolbox::prepare(ToolRequest request) const {
  json merged = params_.at(request.tool);
  if (request.params.is_object()) {
    for (const auto& [k, v] : request.params.items()) merged[k] = v;
  }
  request.params = std::move(merged);
  request.validate();
  return request;
}

ToolResponse Toolbox::call(ToolRequest request) {
  request = prepare(std::move(request));
  auto* b = backend(request.tool);
  if (!b) throw Error(ErrorCode::kPrecondition, fmt::format("no backend configured for {}", to_string(request.tool)));
  const CacheKey key = canonicalize(request);
  ++calls_.at(request.tool);
  const auto start = std::chrono::steady_clock::now();
  ToolResponse r = b->invoke(request, key, *store_);
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (r.type != output_modality(request.tool)) {
    throw Error(ErrorCode::kProtocol, fmt::format("{} returned {} content, expected {}", to_string(request.tool),
                                                  to_string(r.type), to_string(output_modality(request.tool))));
  }
  if (observer_) observer_(request, key, r);
  return r;
}

std::size_t Toolbox::call_count(ToolKind tool) const { return calls_.at(tool).load(); }

std::size_t Toolbox::network_calls() const {
  std::size_t n = 0;
  for (const auto& [tool, b] : backends_) n += b->network_calls();
  return n;
}

}  // namespace urbangen::tools
