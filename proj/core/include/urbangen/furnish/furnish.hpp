#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/mesh/mesh.hpp"
#include "urbangen/roadnet/roadnet.hpp"

namespace urbangen::tools {
class Toolbox;
}

namespace urbangen::furnish {

enum class Category {
  kStreetLamp,
  kTrafficSign,
  kTrafficLight,
  kUtilityPole,
  kBench,
  kTrashBin,
  kTree,
  kBush,
  kVehicle,
  kPedestrian,
};

std::string_view to_string(Category c);
Category category_from_string(std::string_view name);  // throws Error(kConfig)
std::span<const Category> all_categories();

enum class Orientation { kFaceRoad, kAlongRoad, kFixed };

struct PlacementRule {
  Category category = Category::kStreetLamp;
  double spacing = 30.0;  // metres; setback from the junction for junction rules
  double lateral_offset = 0.5;
  Orientation orientation = Orientation::kFaceRoad;
  std::set<geodata::LaneClass> lane_classes;
  bool junction_approach = false;  // one placement per road end at a junction instead of intervals
  double fixed_yaw = 0.0;

  void validate() const;  // throws Error(kConfig)
};

// Lamps 30 m on primary/secondary, trees 10 m on secondary/service, bins 50 m
// and benches 60 m on primary/secondary, signs at junction approaches.
std::vector<PlacementRule> default_rules();
nlohmann::json rules_to_json(std::span<const PlacementRule> rules);
std::vector<PlacementRule> rules_from_json(const nlohmann::json& j);  // throws Error(kConfig)

struct AssetLibraryEntry {
  Category category = Category::kStreetLamp;
  std::string name;
  std::shared_ptr<const mesh::Mesh> mesh;  // base centred on the origin, height = nominal_height
  double nominal_height = 1.0;
};

class AssetLibrary {
 public:
  // Procedural stand-ins for every category.
  static AssetLibrary builtin();
  // Directory with index.json: {"entries": [{"category", "file", "nominal_height"}]}
  // where file is an OBJ or GLB relative to the directory. Meshes are
  // recentred and uniformly scaled to nominal_height.
  static AssetLibrary load(const std::filesystem::path& dir);

  void add(AssetLibraryEntry entry);
  bool has(Category c) const { return entries_.count(c) != 0; }
  const AssetLibraryEntry& entry(Category c) const;  // throws Error(kConfig)
  std::vector<Category> categories() const;

 private:
  std::map<Category, AssetLibraryEntry> entries_;
};

struct FurniturePlacement {
  std::string id;
  Category category = Category::kStreetLamp;
  Vec2 position;
  double yaw = 0.0;
  double scale = 1.0;
  std::string source = "rule";  // "rule" or "vlm"
};

// Interval placements at s = spacing/2 + k * spacing (s <= length) on both
// sides, offset width/2 + lateral_offset along the local normal. Placements on
// the inside of a bend that end up nearer than that to another part of the
// centreline are dropped.
std::vector<FurniturePlacement> place_along_road(const geodata::RoadSegment& road, const PlacementRule& rule);

// Junction-approach placement: `spacing` metres before each road end that is
// a junction, on the right-hand side of the approaching traffic.
std::vector<FurniturePlacement> place_at_junctions(const geodata::RoadSegment& road, const PlacementRule& rule,
                                                   std::span<const roadnet::Junction> junctions);

// Drops placements inside or on a building footprint ("furniture_collision").
std::vector<FurniturePlacement> drop_collisions(std::vector<FurniturePlacement> placements,
                                                const geodata::RegionModel& region, Diagnostics& diag);

struct FurnishResult {
  std::vector<FurniturePlacement> placements;
  std::map<Category, std::size_t> counts;
};

// Applies every rule to every matching road in road order. Throws
// Error(kConfig) when the library lacks a rule's category.
FurnishResult furnish_region(const geodata::RegionModel& region, std::span<const PlacementRule> rules,
                             const AssetLibrary& library, std::span<const roadnet::Junction> junctions,
                             Diagnostics& diag);

struct VlmHints {
  std::vector<FurniturePlacement> placements;
  std::vector<std::pair<std::string, std::string>> adjacency;
};

// Asks the environment extractor about roadside objects seen in `views`.
// Tool failures and malformed answers are reported as diagnostics and yield
// no hints. Returned placements already passed the collision filter.
VlmHints vlm_assisted_placements(std::span<const RgbImage> views, const std::string& tags,
                                 const geodata::RegionModel& region, std::span<const roadnet::Junction> junctions,
                                 const AssetLibrary& library, tools::Toolbox& toolbox, const std::string& subject,
                                 Diagnostics& diag);

// Parses an extractor record into placements (no collision filtering).
// Throws Error(kProtocol).
VlmHints parse_env_record(const nlohmann::json& record, const geodata::RegionModel& region,
                          std::span<const roadnet::Junction> junctions, const AssetLibrary& library,
                          const std::string& subject);

nlohmann::json to_json(const FurniturePlacement& p);
FurniturePlacement placement_from_json(const nlohmann::json& j);

}  // namespace urbangen::furnish
