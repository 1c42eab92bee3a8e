#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "urbangen/common/geometry.hpp"
#include "urbangen/common/image.hpp"

namespace urbangen::mesh {

using Face = std::array<std::uint32_t, 3>;

// Indexed triangle mesh in metres, z up. Faces wind counter-clockwise when
// seen from outside. `uvs` is empty or holds one entry per vertex (glTF
// convention: v grows downwards in the texture).
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec2> uvs;
  std::optional<RgbImage> texture;
  Rgb color{200, 200, 200};

  bool empty() const { return faces.empty(); }
  // Throws Error(kData) when an invariant is broken: index out of range,
  // repeated index within a face, non-finite coordinate, uv count mismatch.
  void validate() const;
  bool operator==(const Mesh&) const = default;
};

struct Bounds3 {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  double volume() const {
    const Vec3 e = extent();
    return e.x * e.y * e.z;
  }
};

Bounds3 bounds(const Mesh& mesh);
Bounds3 bounds(const Mesh& mesh, std::span<const std::uint32_t> faces);

Vec3 face_normal(const Mesh& mesh, const Face& f);  // unit; zero for degenerate faces
double face_area(const Mesh& mesh, const Face& f);
double surface_area(const Mesh& mesh);

// Uniform scale, then rotation about +z by `yaw`, then translation.
Mesh transformed(const Mesh& mesh, double scale, double yaw, const Vec3& translation);
Vec3 transform_point(const Vec3& p, double scale, double yaw, const Vec3& translation);

// Concatenation; the first mesh's colour and texture win.
Mesh merge(std::span<const Mesh> meshes);

// Keeps faces with keep[i] == true and drops vertices no longer referenced;
// the remaining vertices keep their order.
Mesh filter_faces(const Mesh& mesh, const std::vector<bool>& keep);

// Every undirected edge is shared by exactly two faces with opposite
// directions (closed, consistently oriented surface).
bool is_watertight(const Mesh& mesh);

// Enclosed volume via the signed-tetrahedron sum. Throws Error(kNotClosed)
// unless the mesh is watertight.
double mesh_volume(const Mesh& mesh);

// Connected components of faces linked through shared vertices. Returns one
// label per face, labels dense from 0 in order of first appearance.
std::vector<std::uint32_t> face_components(const Mesh& mesh, std::uint32_t* count = nullptr);

// Ear-clipping triangulation of a simple CCW ring. Throws Error(kTriangulation).
std::vector<Face> triangulate(std::span<const Vec2> ring);

// Closed prism between z0 and z1 over a simple ring (any winding).
Mesh extrude_ring(std::span<const Vec2> ring, double z0, double z1);

}  // namespace urbangen::mesh
