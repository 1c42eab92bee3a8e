#pragma once

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/mesh/mesh.hpp"

namespace urbangen::mesh {

struct GroundPlaneParams {
  double normal_cone_deg = 5.0;
  double height_band = 0.02;      // fraction of the z range above min z
  double min_area_fraction = 0.2;  // cluster area / total area
  double max_removed_fraction = 0.8;
};

// Deletes large flat clusters at the bottom of the mesh, together with
// components left entirely inside the height band that touched them (slab
// rims). Refuses, with a "ground_plane_refused" diagnostic, when the removal
// would take more than max_removed_fraction of the faces.
Mesh remove_ground_plane(const Mesh& mesh, const GroundPlaneParams& params, Diagnostics& diag);
Mesh remove_ground_plane(const Mesh& mesh, const GroundPlaneParams& params = {});

// Keeps the largest component (by bounding-box volume) and every component
// whose bounding-box volume is at least min_fraction of it.
Mesh remove_outliers(const Mesh& mesh, double min_fraction = 0.01);

}  // namespace urbangen::mesh
