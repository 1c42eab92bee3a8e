#include "urbangen/scenedesign/scene.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "urbangen/common/assets.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/mesh/io.hpp"

namespace urbangen::scenedesign {

namespace {

using nlohmann::json;

constexpr Rgb kVegetationColor{86, 140, 64};
constexpr Rgb kWaterColor{64, 112, 190};
constexpr Rgb kGroundColor{150, 140, 120};
constexpr Rgb kBackdropGround{120, 118, 110};
constexpr Rgb kSkyColor{170, 200, 235};

std::shared_ptr<const mesh::Mesh> builtin_mesh(const std::string& name, Rgb color) {
  auto m = mesh::parse_obj(std::string(assets::get(name)));
  m.color = color;
  return std::make_shared<const mesh::Mesh>(std::move(m));
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kData, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::shared_ptr<const mesh::Mesh> shared_if_nonempty(const mesh::Mesh& m) {
  if (m.empty()) return nullptr;
  return std::make_shared<const mesh::Mesh>(m);
}

}  // namespace

PlacedAsset make_placed(const std::string& building, const tools::MeshRef& asset, const Alignment& alignment,
                        bool best_effort) {
  PlacedAsset p;
  p.building = building;
  p.asset = asset;
  p.position = {alignment.position.x, alignment.position.y, 0.0};
  p.scale = alignment.scale;
  p.yaw = normalize_angle(alignment.yaw);
  p.translation = alignment.translation;
  p.best_effort = best_effort;
  return p;
}

BackdropAssets BackdropAssets::builtin() {
  BackdropAssets b;
  b.ground = builtin_mesh("meshes/ground.obj", kBackdropGround);
  b.sky = builtin_mesh("meshes/sky.obj", kSkyColor);
  return b;
}

BackdropAssets BackdropAssets::load(const std::filesystem::path& ground, const std::filesystem::path& sky) {
  auto b = builtin();
  if (!ground.empty()) {
    b.ground = std::make_shared<const mesh::Mesh>(mesh::import_obj(ground));
    b.ground_source = ground.filename().string();
  }
  if (!sky.empty()) {
    b.sky = std::make_shared<const mesh::Mesh>(mesh::import_obj(sky));
    b.sky_source = sky.filename().string();
  }
  return b;
}

SceneGraph assemble_scene(const geodata::RegionModel& region, std::vector<PlacedAsset> placed,
                          std::vector<furnish::FurniturePlacement> furniture, const roadnet::RoadMeshes& roads,
                          std::vector<roadnet::TrafficAgent> traffic, const BackdropAssets& backdrop,
                          Diagnostics& diag) {
  SceneGraph scene;
  scene.origin = region.origin.origin;

  std::set<std::string> seen;
  for (const auto& p : placed) {
    if (!region.find_building(p.building))
      throw Error(ErrorCode::kData, fmt::format("placed asset for unknown building '{}'", p.building));
    if (!seen.insert(p.building).second)
      throw Error(ErrorCode::kData, fmt::format("building '{}' placed twice", p.building));
    if (!(p.scale > 0.0)) throw Error(ErrorCode::kData, fmt::format("building '{}' has non-positive scale", p.building));
  }
  std::sort(placed.begin(), placed.end(), [](const auto& a, const auto& b) { return a.building < b.building; });
  scene.placed = std::move(placed);

  scene.road_surface = shared_if_nonempty(roads.surface);
  scene.road_markings = shared_if_nonempty(roads.markings);

  for (const auto& e : region.elements) {
    double thickness = kGroundThickness;
    Rgb color = kGroundColor;
    if (e.kind == geodata::LandKind::kVegetation) {
      thickness = kVegetationThickness;
      color = kVegetationColor;
    } else if (e.kind == geodata::LandKind::kWater) {
      thickness = kWaterThickness;
      color = kWaterColor;
    }
    auto ring = polygon::normalize_ring(e.polygon);
    polygon::make_ccw(ring);
    try {
      auto slab = mesh::extrude_ring(ring, 0.0, thickness);
      slab.color = color;
      scene.elements.push_back({e.id, e.kind, std::make_shared<const mesh::Mesh>(std::move(slab))});
    } catch (const Error& err) {
      diag.warn("element_triangulation", e.id, err.what());
    }
  }

  scene.furniture = std::move(furniture);
  scene.traffic = std::move(traffic);

  const Rect area = region.local_bounds().expanded(region.margin);
  const Vec2 center{(area.min.x + area.max.x) / 2, (area.min.y + area.max.y) / 2};
  const double w = area.max.x - area.min.x;
  const double h = area.max.y - area.min.y;
  scene.ground = {backdrop.ground_source, backdrop.ground, {center.x, center.y, 0.0}, std::max(w, h)};
  scene.sky = {backdrop.sky_source, backdrop.sky, {center.x, center.y, 0.0}, 0.5 * std::hypot(w, h)};
  return scene;
}

std::string mesh_digest(const mesh::Mesh& m) {
  mesh::SceneNode node{"mesh", std::make_shared<const mesh::Mesh>(m), {}, 1.0, 0.0};
  return sha256_hex(mesh::export_glb(std::span<const mesh::SceneNode>(&node, 1)));
}

namespace {

// Collects glTF nodes and manifest records side by side so they cannot drift.
class NodeBuilder {
 public:
  void add(std::string name, std::string kind, std::string source, std::shared_ptr<const mesh::Mesh> m,
           std::string digest, Vec3 translation, double scale, double yaw) {
    if (digest.empty()) {
      auto it = digests_.find(m.get());
      if (it == digests_.end()) it = digests_.emplace(m.get(), mesh_digest(*m)).first;
      digest = it->second;
    }
    nodes.push_back({name, m, translation, scale, yaw});
    records.push_back({std::move(name), std::move(kind), std::move(source), std::move(digest), translation, scale, yaw});
  }

  std::vector<mesh::SceneNode> nodes;
  std::vector<NodeRecord> records;

 private:
  std::map<const mesh::Mesh*, std::string> digests_;
};

template <typename Fn>
void for_each_object(const SceneGraph& scene, const tools::MeshStore& store, const furnish::AssetLibrary& library,
                     bool include_backdrop, Fn&& fn) {
  if (include_backdrop && scene.ground.mesh)
    fn("ground", "ground", scene.ground.source, scene.ground.mesh, std::string(), scene.ground.translation,
       scene.ground.scale, 0.0);
  std::map<std::string, std::shared_ptr<const mesh::Mesh>> assets;
  for (const auto& p : scene.placed) {
    auto& m = assets[p.asset.digest];
    if (!m) m = std::make_shared<const mesh::Mesh>(store.get(p.asset));
    fn("building:" + p.building, "building", p.building, m, p.asset.digest, p.translation, p.scale, p.yaw);
  }
  for (const auto& e : scene.elements)
    fn("element:" + e.id, "element", e.id, e.mesh, std::string(), Vec3{}, 1.0, 0.0);
  if (scene.road_surface)
    fn("road:surface", "road", "lanes", scene.road_surface, std::string(), Vec3{}, 1.0, 0.0);
  if (scene.road_markings)
    fn("road:markings", "road", "markings", scene.road_markings, std::string(), Vec3{}, 1.0, 0.0);
  for (const auto& f : scene.furniture) {
    const auto& entry = library.entry(f.category);
    fn("furniture:" + f.id, "furniture", f.id, entry.mesh, std::string(), Vec3{f.position.x, f.position.y, 0.0},
       f.scale, f.yaw);
  }
  for (std::size_t i = 0; i < scene.traffic.size(); ++i) {
    const auto& a = scene.traffic[i];
    const auto& entry = library.entry(furnish::category_from_string(a.asset));
    const auto id = fmt::format("{}:{}", a.lane, i);
    fn("traffic:" + id, "traffic", id, entry.mesh, std::string(), Vec3{a.position.x, a.position.y, 0.0}, 1.0,
       a.yaw);
  }
  if (include_backdrop && scene.sky.mesh)
    fn("sky", "sky", scene.sky.source, scene.sky.mesh, std::string(), scene.sky.translation, scene.sky.scale, 0.0);
}

}  // namespace

ExportedScene export_scene(const SceneGraph& scene, const tools::MeshStore& store,
                           const furnish::AssetLibrary& library) {
  NodeBuilder builder;
  for_each_object(scene, store, library, true,
                  [&](std::string name, std::string kind, std::string source, std::shared_ptr<const mesh::Mesh> m,
                      std::string digest, Vec3 t, double s, double yaw) {
                    builder.add(std::move(name), std::move(kind), std::move(source), std::move(m),
                                std::move(digest), t, s, yaw);
                  });
  ExportedScene out;
  out.glb = mesh::export_glb(builder.nodes);
  out.manifest.origin = scene.origin;
  out.manifest.buildings = scene.placed;
  out.manifest.nodes = std::move(builder.records);
  return out;
}

std::vector<mesh::Mesh> world_meshes(const SceneGraph& scene, const tools::MeshStore& store,
                                     const furnish::AssetLibrary& library, bool include_backdrop) {
  std::vector<mesh::Mesh> out;
  for_each_object(scene, store, library, include_backdrop,
                  [&](const std::string&, const std::string& kind, const std::string&,
                      const std::shared_ptr<const mesh::Mesh>& m, const std::string&, Vec3 t, double s, double yaw) {
                    // The sky dome would hide everything from an elevated camera.
                    if (kind == "sky") return;
                    out.push_back(mesh::transformed(*m, s, yaw, t));
                  });
  return out;
}

json to_json(const PlacedAsset& p) {
  return {{"building", p.building},
          {"asset", p.asset.digest},
          {"position", vec3_json(p.position)},
          {"scale", p.scale},
          {"yaw", p.yaw},
          {"translation", vec3_json(p.translation)},
          {"best_effort", p.best_effort}};
}

PlacedAsset placed_from_json(const json& b) {
  try {
    PlacedAsset p;
    p.building = b.at("building").get<std::string>();
    p.asset.digest = b.at("asset").get<std::string>();
    p.position = vec3_from(b.at("position"));
    p.scale = b.at("scale").get<double>();
    p.yaw = b.at("yaw").get<double>();
    p.translation = vec3_from(b.at("translation"));
    p.best_effort = b.at("best_effort").get<bool>();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kData, std::string("invalid placed asset: ") + e.what());
  }
}

json to_json(const SceneManifest& manifest) {
  json j;
  j["schema_version"] = manifest.schema_version;
  j["origin"] = {{"lat", manifest.origin.lat}, {"lon", manifest.origin.lon}};
  json buildings = json::array();
  for (const auto& p : manifest.buildings) buildings.push_back(to_json(p));
  j["buildings"] = std::move(buildings);
  json nodes = json::array();
  for (const auto& n : manifest.nodes) {
    nodes.push_back({{"name", n.name},
                     {"kind", n.kind},
                     {"source", n.source},
                     {"mesh", n.mesh},
                     {"translation", vec3_json(n.translation)},
                     {"scale", n.scale},
                     {"yaw", n.yaw}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

std::vector<std::string> validate_manifest(const json& j) {
  std::vector<std::string> problems;
  auto need = [&](const json& obj, const char* key, bool (json::*pred)() const noexcept, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(fmt::format("{}: missing '{}'", where, key));
      return false;
    }
    if (!(obj.at(key).*pred)()) {
      problems.push_back(fmt::format("{}: '{}' has the wrong type", where, key));
      return false;
    }
    return true;
  };
  auto vec3 = [&](const json& obj, const char* key, const std::string& where) {
    if (!need(obj, key, &json::is_array, where)) return;
    const auto& a = obj.at(key);
    if (a.size() != 3 || !std::all_of(a.begin(), a.end(), [](const json& x) { return x.is_number(); }))
      problems.push_back(fmt::format("{}: '{}' must hold three numbers", where, key));
  };
  auto digest = [&](const json& obj, const char* key, const std::string& where) {
    if (!need(obj, key, &json::is_string, where)) return;
    const auto s = obj.at(key).get<std::string>();
    if (s.size() != 64 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
      problems.push_back(fmt::format("{}: '{}' is not a SHA-256 digest", where, key));
  };

  if (!j.is_object()) return {"document is not an object"};
  if (need(j, "schema_version", &json::is_number_integer, "scene") && j["schema_version"] != kSceneSchemaVersion)
    problems.push_back(fmt::format("scene: unsupported schema_version {}", j["schema_version"].dump()));
  if (need(j, "origin", &json::is_object, "scene")) {
    need(j["origin"], "lat", &json::is_number, "origin");
    need(j["origin"], "lon", &json::is_number, "origin");
  }
  std::set<std::string> buildings;
  if (need(j, "buildings", &json::is_array, "scene")) {
    for (std::size_t i = 0; i < j["buildings"].size(); ++i) {
      const auto& b = j["buildings"][i];
      const auto where = fmt::format("buildings[{}]", i);
      if (need(b, "building", &json::is_string, where) && !buildings.insert(b["building"].get<std::string>()).second)
        problems.push_back(where + ": duplicate building");
      digest(b, "asset", where);
      vec3(b, "position", where);
      vec3(b, "translation", where);
      if (need(b, "scale", &json::is_number, where) && !(b["scale"].get<double>() > 0.0))
        problems.push_back(where + ": scale must be positive");
      need(b, "yaw", &json::is_number, where);
      need(b, "best_effort", &json::is_boolean, where);
    }
  }
  static const std::set<std::string> kKinds{"building", "element", "road", "furniture", "traffic", "ground", "sky"};
  std::set<std::string> names;
  std::set<std::string> building_nodes;
  if (need(j, "nodes", &json::is_array, "scene")) {
    for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
      const auto& n = j["nodes"][i];
      const auto where = fmt::format("nodes[{}]", i);
      if (need(n, "name", &json::is_string, where) && !names.insert(n["name"].get<std::string>()).second)
        problems.push_back(where + ": duplicate node name");
      if (need(n, "kind", &json::is_string, where) && !kKinds.count(n["kind"].get<std::string>()))
        problems.push_back(where + ": unknown kind");
      if (need(n, "source", &json::is_string, where) && n.value("kind", "") == "building")
        building_nodes.insert(n["source"].get<std::string>());
      digest(n, "mesh", where);
      vec3(n, "translation", where);
      if (need(n, "scale", &json::is_number, where) && !(n["scale"].get<double>() > 0.0))
        problems.push_back(where + ": scale must be positive");
      need(n, "yaw", &json::is_number, where);
    }
  }
  if (problems.empty() && building_nodes != buildings)
    problems.push_back("scene: building nodes do not match the buildings list");
  return problems;
}

SceneManifest manifest_from_json(const json& j) {
  const auto problems = validate_manifest(j);
  if (!problems.empty()) throw Error(ErrorCode::kData, "invalid scene manifest: " + problems.front());
  SceneManifest m;
  m.schema_version = j["schema_version"].get<int>();
  m.origin = {j["origin"]["lat"].get<double>(), j["origin"]["lon"].get<double>()};
  for (const auto& b : j["buildings"]) m.buildings.push_back(placed_from_json(b));
  for (const auto& n : j["nodes"]) {
    m.nodes.push_back({n["name"].get<std::string>(), n["kind"].get<std::string>(), n["source"].get<std::string>(),
                       n["mesh"].get<std::string>(), vec3_from(n["translation"]), n["scale"].get<double>(),
                       n["yaw"].get<double>()});
  }
  return m;
}

}  // namespace urbangen::scenedesign
