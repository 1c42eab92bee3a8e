#pragma once

#include <string>
#include <vector>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/mesh/mesh.hpp"

namespace urbangen::scenedesign {

struct AlignOptions {
  double yaw_step_deg = 1.0;
  double cell = 0.25;
};

// Area centroid of the reference polygon. Throws Error(kDegenerate).
geodata::LocalPoint align_position(const geodata::BuildingFootprint& footprint);

// Cube root of reference volume over mesh volume. Throws Error(kNotClosed)
// for open meshes and Error(kDegenerate) for zero volumes.
double align_scale(const mesh::Mesh& generated, const geodata::BuildingFootprint& reference);

struct YawResult {
  double yaw = 0.0;  // radians in [0, 2*pi)
  std::size_t score = 0;
  std::vector<std::size_t> scores;  // per swept angle, index k = k * step
};

// Sweeps yaw over [0, 2*pi) at the configured step. Each candidate rotates the
// mesh about its footprint centroid, places that centroid on the reference
// centroid and counts cells shared with the rasterized reference. Returns the
// argmax, smallest angle on ties; zero overlap everywhere yields yaw 0 and a
// "yaw_no_overlap" diagnostic.
YawResult align_yaw(const mesh::Mesh& generated, const geodata::BuildingFootprint& reference,
                    const AlignOptions& options, Diagnostics& diag, const std::string& subject = "");

// Transform taking the raw generated mesh into the scene:
//   world = R(yaw) * (scale * v) + translation.
struct Alignment {
  geodata::LocalPoint position;  // reference centroid
  double scale = 1.0;
  double yaw = 0.0;
  Vec3 translation;
  std::size_t overlap = 0;
};

// Position, then scale, then yaw. The asset is lifted so its lowest point sits
// on z = 0.
Alignment align_asset(const mesh::Mesh& generated, const geodata::BuildingFootprint& reference,
                      const AlignOptions& options, Diagnostics& diag);

mesh::Mesh apply(const mesh::Mesh& generated, const Alignment& alignment);

}  // namespace urbangen::scenedesign
