#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/evalkit/edges.hpp"
#include "urbangen/evalkit/judge.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/mesh/footprint.hpp"
#include "urbangen/scenedesign/scene.hpp"
#include "urbangen/tools/backend.hpp"

namespace urbangen::evalkit {

inline constexpr int kReportSchemaVersion = 1;

// Footprint raster of a mesh already in world coordinates.
mesh::FootprintRaster world_footprint(const mesh::Mesh& world, double cell);

struct BuildingLayout {
  std::string building;
  double iou = 0.0;
  double centroid_error = 0.0;  // metres between raster centroids
  bool missing = false;
};

struct LayoutReport {
  std::vector<BuildingLayout> buildings;  // region order
  std::optional<double> mean;             // unset when there is nothing to average
  std::optional<double> min;
  std::size_t missing = 0;
};

// Compares each placed asset's footprint raster with the reference polygon's.
// Region buildings without a placement are listed with IoU 0 and flagged.
LayoutReport layout_report(const scenedesign::SceneGraph& scene, const geodata::RegionModel& region,
                           const tools::MeshStore& store, double cell = 0.25);

nlohmann::json to_json(const LayoutReport& report);

// Image-pair metric plug-in (LPIPS, SSIM and the like live outside).
class ImageMetric {
 public:
  virtual ~ImageMetric() = default;
  virtual std::string name() const = 0;
  virtual double compute(const RgbImage& prediction, const RgbImage& reference) const = 0;
};

class EdgeIouMetric : public ImageMetric {
 public:
  explicit EdgeIouMetric(CannyParams params = {}) : params_(params) {}
  std::string name() const override { return "edge_iou"; }
  double compute(const RgbImage& prediction, const RgbImage& reference) const override;

 private:
  CannyParams params_;
};

// Runs `command <prediction.png> <reference.png>` and reads one number from
// its standard output. Throws Error(kToolUnavailable) when the command fails.
class CommandMetric : public ImageMetric {
 public:
  CommandMetric(std::string name, std::string command) : name_(std::move(name)), command_(std::move(command)) {}
  std::string name() const override { return name_; }
  double compute(const RgbImage& prediction, const RgbImage& reference) const override;

 private:
  std::string name_;
  std::string command_;
};

struct EvalOptions {
  double cell = 0.25;
  int render_size = 256;
  CannyParams canny;
  bool pointwise = true;  // only when a judge is available
  bool pairwise = true;
};

struct EvalInputs {
  const scenedesign::SceneGraph* scene = nullptr;
  const geodata::RegionModel* region = nullptr;
  const tools::MeshStore* store = nullptr;
  const furnish::AssetLibrary* library = nullptr;
};

// Layout IoU, Edge-IoU between renders of the placed assets and of the
// reference prisms (per building and for the whole block), extra metrics on
// the block renders and, with a toolbox, the judge protocols. The result has
// no timings, so identical inputs give identical bytes.
nlohmann::json evaluate_scene(const EvalInputs& inputs, const EvalOptions& options,
                              std::span<const std::shared_ptr<ImageMetric>> metrics, tools::Toolbox* judge,
                              Diagnostics& diag);

}  // namespace urbangen::evalkit
