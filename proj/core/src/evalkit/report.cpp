#include "urbangen/evalkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/mesh/scaffold.hpp"

namespace urbangen::evalkit {

using nlohmann::json;

mesh::FootprintRaster world_footprint(const mesh::Mesh& world, double cell) {
  return mesh::project_footprint_placed(world, 0.0, {0.0, 0.0}, {0.0, 0.0}, cell);
}

namespace {

const scenedesign::PlacedAsset* find_placed(const scenedesign::SceneGraph& scene, const std::string& id) {
  for (const auto& p : scene.placed)
    if (p.building == id) return &p;
  return nullptr;
}

mesh::Mesh world_asset(const scenedesign::PlacedAsset& p, const tools::MeshStore& store) {
  return mesh::transformed(store.get(p.asset), p.scale, p.yaw, p.translation);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

mesh::Bounds3 union_bounds(std::span<const mesh::Mesh> meshes) {
  mesh::Bounds3 b{{1e300, 1e300, 1e300}, {-1e300, -1e300, -1e300}};
  for (const auto& m : meshes) {
    if (m.empty()) continue;
    const auto mb = mesh::bounds(m);
    b.min = {std::min(b.min.x, mb.min.x), std::min(b.min.y, mb.min.y), std::min(b.min.z, mb.min.z)};
    b.max = {std::max(b.max.x, mb.max.x), std::max(b.max.y, mb.max.y), std::max(b.max.z, mb.max.z)};
  }
  return b;
}

struct RenderPair {
  RgbImage generated;
  RgbImage reference;
};

// Both sides share one camera so their edges are comparable pixel by pixel.
RenderPair render_pair(std::span<const mesh::Mesh> generated, std::span<const mesh::Mesh> reference, int size) {
  std::vector<mesh::Mesh> all(generated.begin(), generated.end());
  all.insert(all.end(), reference.begin(), reference.end());
  mesh::ViewParams view;
  view.width = view.height = size;
  if (std::any_of(all.begin(), all.end(), [](const mesh::Mesh& m) { return !m.empty(); }))
    view.frame = union_bounds(all);
  return {mesh::render_meshes(generated, view), mesh::render_meshes(reference, view)};
}

}  // namespace

LayoutReport layout_report(const scenedesign::SceneGraph& scene, const geodata::RegionModel& region,
                           const tools::MeshStore& store, double cell) {
  LayoutReport report;
  double sum = 0.0;
  for (const auto& b : region.buildings) {
    BuildingLayout row;
    row.building = b.id;
    const auto ref = mesh::rasterize_polygon(b.polygon, cell);
    if (const auto* p = find_placed(scene, b.id)) {
      const auto placed = world_footprint(world_asset(*p, store), cell);
      row.iou = mesh::intersection_over_union(placed, ref);
      row.centroid_error = placed.count() ? distance(placed.centroid(), ref.centroid()) : 0.0;
    } else {
      row.missing = true;
      ++report.missing;
    }
    sum += row.iou;
    report.min = report.min ? std::min(*report.min, row.iou) : row.iou;
    report.buildings.push_back(std::move(row));
  }
  if (!report.buildings.empty()) report.mean = sum / static_cast<double>(report.buildings.size());
  return report;
}

json to_json(const LayoutReport& report) {
  json rows = json::array();
  for (const auto& r : report.buildings) {
    rows.push_back(
        {{"building", r.building}, {"iou", r.iou}, {"centroid_error", r.centroid_error}, {"missing", r.missing}});
  }
  return {{"buildings", std::move(rows)},
          {"mean", optional_number(report.mean)},
          {"min", optional_number(report.min)},
          {"mean_defined", report.mean.has_value()},
          {"missing", report.missing}};
}

double EdgeIouMetric::compute(const RgbImage& prediction, const RgbImage& reference) const {
  return edge_iou(detect_edges(prediction, params_), detect_edges(reference, params_));
}

double CommandMetric::compute(const RgbImage& prediction, const RgbImage& reference) const {
  const auto pa = encode_png(prediction);
  const auto dir = std::filesystem::temp_directory_path() /
                   fmt::format("urbangen-metric-{}", sha256_hex(std::string_view(
                                                         reinterpret_cast<const char*>(pa.data()), pa.size()))
                                                         .substr(0, 16));
  std::filesystem::create_directories(dir);
  write_png(dir / "prediction.png", prediction);
  write_png(dir / "reference.png", reference);
  const auto cmd = fmt::format("{} '{}' '{}'", command_, (dir / "prediction.png").string(),
                               (dir / "reference.png").string());
  std::string out;
  int status = -1;
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    status = ::pclose(pipe);
  }
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  if (status != 0) throw Error(ErrorCode::kToolUnavailable, fmt::format("metric '{}' command failed", name_));
  char* end = nullptr;
  const double v = std::strtod(out.c_str(), &end);
  if (end == out.c_str()) throw Error(ErrorCode::kProtocol, fmt::format("metric '{}' printed no number", name_));
  return v;
}

json evaluate_scene(const EvalInputs& in, const EvalOptions& options,
                    std::span<const std::shared_ptr<ImageMetric>> metrics, tools::Toolbox* judge, Diagnostics& diag) {
  if (!in.scene || !in.region || !in.store || !in.library)
    throw Error(ErrorCode::kPrecondition, "evaluation inputs are incomplete");
  const auto& scene = *in.scene;
  const auto& region = *in.region;

  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["layout"] = to_json(layout_report(scene, region, *in.store, options.cell));

  std::vector<mesh::Mesh> generated_all, reference_all;
  std::map<std::string, RenderPair> renders;
  json per_building = json::array();
  double edge_sum = 0.0;
  std::size_t edge_n = 0;
  for (const auto& b : region.buildings) {
    const auto* p = find_placed(scene, b.id);
    if (!p) {
      per_building.push_back({{"building", b.id}, {"edge_iou", nullptr}});
      continue;
    }
    mesh::Mesh gen = world_asset(*p, *in.store);
    mesh::Mesh ref = mesh::extrude_prism(b);
    auto pair = render_pair(std::span<const mesh::Mesh>(&gen, 1), std::span<const mesh::Mesh>(&ref, 1),
                            options.render_size);
    const double e =
        edge_iou(detect_edges(pair.generated, options.canny), detect_edges(pair.reference, options.canny));
    edge_sum += e;
    ++edge_n;
    per_building.push_back({{"building", b.id}, {"edge_iou", e}});
    renders.emplace(b.id, std::move(pair));
    generated_all.push_back(std::move(gen));
    reference_all.push_back(std::move(ref));
  }
  const auto block = render_pair(generated_all, reference_all, options.render_size);
  report["edge_iou"] = {
      {"block", edge_iou(detect_edges(block.generated, options.canny), detect_edges(block.reference, options.canny))},
      {"buildings", std::move(per_building)},
      {"mean", edge_n ? json(edge_sum / static_cast<double>(edge_n)) : json(nullptr)},
      {"canny", {{"low", options.canny.low}, {"high", options.canny.high}}}};

  json extra = json::object();
  for (const auto& metric : metrics) {
    try {
      extra[metric->name()] = metric->compute(block.generated, block.reference);
    } catch (const Error& err) {
      diag.warn("metric_failed", metric->name(), err.what());
      extra[metric->name()] = nullptr;
    }
  }
  report["metrics"] = std::move(extra);

  if (!judge) {
    report["judge"] = nullptr;
    return report;
  }
  json j = json::object();
  if (options.pointwise) {
    try {
      mesh::ViewParams view;
      view.width = view.height = options.render_size;
      const auto meshes = scenedesign::world_meshes(scene, *in.store, *in.library, false);
      j["pointwise"] = pointwise_judge(mesh::render_meshes(meshes, view), *judge);
    } catch (const Error& err) {
      diag.warn("judge_failed", "pointwise", err.what());
      j["pointwise"] = nullptr;
    }
  }
  if (options.pairwise) {
    std::vector<JudgeVerdict> verdicts;
    json rows = json::array();
    for (const auto& [id, pair] : renders) {
      try {
        verdicts.push_back(pairwise_judge("generated:" + id, pair.generated, "scaffold:" + id, pair.reference, *judge));
        rows.push_back(to_json(verdicts.back()));
      } catch (const Error& err) {
        diag.warn("judge_failed", id, err.what());
      }
    }
    j["pairwise"] = std::move(rows);
    j["win_rate"] = verdicts.empty() ? json(nullptr) : json(win_rate(verdicts));
  }
  report["judge"] = std::move(j);
  return report;
}

}  // namespace urbangen::evalkit
