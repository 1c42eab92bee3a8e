#pragma once

#include <optional>
#include <span>

#include "urbangen/common/image.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/mesh/mesh.hpp"

namespace urbangen::mesh {

// Closed prism from z=0 to the footprint height.
Mesh extrude_prism(const geodata::BuildingFootprint& footprint);

struct ViewParams {
  int width = 256;
  int height = 256;
  double elevation_deg = 45.0;
  double azimuth_deg = 225.0;  // camera direction from the target, CCW from +x
  double margin = 0.1;         // fraction of the frame kept empty on each side
  Rgb background{220, 220, 220};
  // When set, the camera is fitted to this box instead of the meshes, so
  // renders of different content share one framing.
  std::optional<Bounds3> frame;
};

// Orthographic flat-shaded software rasterization. The camera is fitted to
// the bounds of all meshes. Textured meshes are sampled nearest-neighbour.
RgbImage render_scaffold(const Mesh& mesh, const ViewParams& view = {});
RgbImage render_meshes(std::span<const Mesh> meshes, const ViewParams& view = {});

}  // namespace urbangen::mesh
