#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "urbangen/mesh/mesh.hpp"

namespace urbangen::mesh {

// OBJ text for a single asset. With a texture, `mtl_name` and `texture_name`
// are referenced via mtllib/map_Kd.
std::string to_obj(const Mesh& mesh, const std::string& mtl_name = "");
// Writes <path>, plus <stem>.mtl and <stem>.png next to it for textured meshes.
void export_obj(const Mesh& mesh, const std::filesystem::path& path);
// Reads v/vt/f records (polygons fan-triangulated) and an optional texture
// via mtllib/map_Kd.
Mesh import_obj(const std::filesystem::path& path);
Mesh parse_obj(const std::string& text);

struct SceneNode {
  std::string name;
  std::shared_ptr<const Mesh> mesh;  // nodes sharing a pointer share one glTF mesh
  Vec3 translation;
  double scale = 1.0;
  double yaw = 0.0;  // radians about the up axis
};

// Binary glTF 2.0. Local z-up coordinates map to glTF y-up as (x, z, -y).
std::vector<std::uint8_t> export_glb(std::span<const SceneNode> nodes);
void write_glb(const std::filesystem::path& path, std::span<const SceneNode> nodes);

struct ImportedNode {
  std::string name;
  Mesh mesh;
  Vec3 translation;
  std::array<double, 3> scale{1, 1, 1};
  std::array<double, 4> rotation{0, 0, 0, 1};  // glTF quaternion x, y, z, w
  double yaw = 0.0;
};

std::vector<ImportedNode> import_glb(std::span<const std::uint8_t> bytes);
std::vector<ImportedNode> read_glb(const std::filesystem::path& path);

}  // namespace urbangen::mesh
