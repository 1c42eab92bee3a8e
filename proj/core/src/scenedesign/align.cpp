#include "urbangen/scenedesign/align.hpp"

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/geodata/extract.hpp"
#include "urbangen/mesh/footprint.hpp"

namespace urbangen::scenedesign {

geodata::LocalPoint align_position(const geodata::BuildingFootprint& footprint) {
  return polygon::centroid(footprint.polygon);
}

double align_scale(const mesh::Mesh& generated, const geodata::BuildingFootprint& reference) {
  const double v = mesh::mesh_volume(generated);
  if (!(v > 0.0)) throw Error(ErrorCode::kDegenerate, "generated mesh has zero volume");
  return std::cbrt(geodata::footprint_volume(reference) / v);
}

YawResult align_yaw(const mesh::Mesh& generated, const geodata::BuildingFootprint& reference,
                    const AlignOptions& options, Diagnostics& diag, const std::string& subject) {
  if (generated.empty()) throw Error(ErrorCode::kPrecondition, "cannot align an empty mesh");
  if (!(options.yaw_step_deg > 0.0)) throw Error(ErrorCode::kPrecondition, "yaw step must be positive");
  const auto ref = mesh::rasterize_polygon(reference.polygon, options.cell);
  const Vec2 target = align_position(reference);
  const Vec2 pivot = mesh::footprint_centroid(generated, options.cell);
  const auto steps = static_cast<std::size_t>(std::ceil(360.0 / options.yaw_step_deg - 1e-9));

  YawResult result;
  result.scores.resize(steps);
  std::size_t best = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double yaw = deg2rad(static_cast<double>(k) * options.yaw_step_deg);
    const auto raster = mesh::project_footprint_placed(generated, yaw, pivot, target, options.cell);
    result.scores[k] = mesh::overlap_cells(raster, ref);
    if (result.scores[k] > result.scores[best]) best = k;
  }
  result.score = result.scores[best];
  if (result.score == 0) {
    diag.warn("yaw_no_overlap", subject, "asset footprint never overlaps the reference; yaw set to 0");
    result.yaw = 0.0;
    return result;
  }
  result.yaw = deg2rad(static_cast<double>(best) * options.yaw_step_deg);
  return result;
}

Alignment align_asset(const mesh::Mesh& generated, const geodata::BuildingFootprint& reference,
                      const AlignOptions& options, Diagnostics& diag) {
  Alignment a;
  a.position = align_position(reference);
  a.scale = align_scale(generated, reference);
  const mesh::Mesh scaled = mesh::transformed(generated, a.scale, 0.0, {});
  const auto yaw = align_yaw(scaled, reference, options, diag, reference.id);
  a.yaw = yaw.yaw;
  a.overlap = yaw.score;
  const Vec2 pivot = mesh::footprint_centroid(scaled, options.cell);
  const Vec2 turned = rotate(pivot, a.yaw);
  const double min_z = mesh::bounds(scaled).min.z;
  a.translation = {a.position.x - turned.x, a.position.y - turned.y, -min_z};
  return a;
}

mesh::Mesh apply(const mesh::Mesh& generated, const Alignment& a) {
  return mesh::transformed(generated, a.scale, a.yaw, a.translation);
}

}  // namespace urbangen::scenedesign
