#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/mesh/mesh.hpp"
#include "urbangen/roadnet/roadnet.hpp"
#include "urbangen/scenedesign/align.hpp"
#include "urbangen/tools/backend.hpp"

namespace urbangen::scenedesign {

inline constexpr int kSceneSchemaVersion = 1;

inline constexpr double kVegetationThickness = 0.3;
inline constexpr double kWaterThickness = 0.05;
inline constexpr double kGroundThickness = 0.01;

struct PlacedAsset {
  std::string building;
  tools::MeshRef asset;
  Vec3 position;  // reference centroid, z = 0 is the ground
  double scale = 1.0;
  double yaw = 0.0;  // radians in [0, 2*pi)
  Vec3 translation;  // world = R(yaw) * (scale * v) + translation
  bool best_effort = false;

  bool operator==(const PlacedAsset&) const = default;
};

PlacedAsset make_placed(const std::string& building, const tools::MeshRef& asset, const Alignment& alignment,
                        bool best_effort = false);

struct ElementSlab {
  std::string id;
  geodata::LandKind kind = geodata::LandKind::kGround;
  std::shared_ptr<const mesh::Mesh> mesh;  // world coordinates
};

// Unit-sized ground quad and sky dome, scaled to the region at assembly.
struct Backdrop {
  std::string source;
  std::shared_ptr<const mesh::Mesh> mesh;
  Vec3 translation;
  double scale = 1.0;
};

struct BackdropAssets {
  std::string ground_source = "builtin:meshes/ground.obj";
  std::shared_ptr<const mesh::Mesh> ground;
  std::string sky_source = "builtin:meshes/sky.obj";
  std::shared_ptr<const mesh::Mesh> sky;

  static BackdropAssets builtin();
  // Either path may be empty to keep the builtin mesh.
  static BackdropAssets load(const std::filesystem::path& ground, const std::filesystem::path& sky);
};

struct SceneGraph {
  geodata::GeoCoord origin;
  std::vector<PlacedAsset> placed;  // sorted by building id
  std::shared_ptr<const mesh::Mesh> road_surface;
  std::shared_ptr<const mesh::Mesh> road_markings;
  std::vector<ElementSlab> elements;
  std::vector<furnish::FurniturePlacement> furniture;
  std::vector<roadnet::TrafficAgent> traffic;
  Backdrop ground;
  Backdrop sky;
};

// Throws Error(kData) for a building placed twice or one missing from the
// region. Land elements that fail to triangulate are skipped with a
// "element_triangulation" diagnostic.
SceneGraph assemble_scene(const geodata::RegionModel& region, std::vector<PlacedAsset> placed,
                          std::vector<furnish::FurniturePlacement> furniture, const roadnet::RoadMeshes& roads,
                          std::vector<roadnet::TrafficAgent> traffic, const BackdropAssets& backdrop,
                          Diagnostics& diag);

// One record per glTF node, in node order.
struct NodeRecord {
  std::string name;
  std::string kind;    // building, element, road, furniture, traffic, ground, sky
  std::string source;  // building id, element id, placement id, ...
  std::string mesh;    // SHA-256 of the mesh as a single-node GLB
  Vec3 translation;
  double scale = 1.0;
  double yaw = 0.0;

  bool operator==(const NodeRecord&) const = default;
};

struct SceneManifest {
  int schema_version = kSceneSchemaVersion;
  geodata::GeoCoord origin;
  std::vector<PlacedAsset> buildings;
  std::vector<NodeRecord> nodes;

  bool operator==(const SceneManifest&) const = default;
};

nlohmann::json to_json(const PlacedAsset& placed);
PlacedAsset placed_from_json(const nlohmann::json& j);  // throws Error(kData)

nlohmann::json to_json(const SceneManifest& manifest);
// Throws Error(kData) when the document does not follow the schema.
SceneManifest manifest_from_json(const nlohmann::json& j);
// Schema problems as readable strings; empty when valid.
std::vector<std::string> validate_manifest(const nlohmann::json& j);

struct ExportedScene {
  std::vector<std::uint8_t> glb;
  SceneManifest manifest;
};

// Building meshes come from the store, furniture and traffic from the
// library; nodes sharing a library mesh share one glTF mesh.
ExportedScene export_scene(const SceneGraph& scene, const tools::MeshStore& store,
                           const furnish::AssetLibrary& library);

// Every scene object transformed into world coordinates, for rendering.
std::vector<mesh::Mesh> world_meshes(const SceneGraph& scene, const tools::MeshStore& store,
                                     const furnish::AssetLibrary& library, bool include_backdrop = false);

std::string mesh_digest(const mesh::Mesh& mesh);

}  // namespace urbangen::scenedesign
