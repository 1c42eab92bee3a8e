#include <algorithm>

#include <fmt/format.h>

#include "urbangen/common/assets.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::furnish {

using geodata::LaneClass;
using nlohmann::json;

namespace {

std::string_view orientation_name(Orientation o) {
  switch (o) {
    case Orientation::kFaceRoad: return "face_road";
    case Orientation::kAlongRoad: return "along_road";
    case Orientation::kFixed: return "fixed";
  }
  return "?";
}

Orientation orientation_from(std::string_view s) {
  if (s == "face_road") return Orientation::kFaceRoad;
  if (s == "along_road") return Orientation::kAlongRoad;
  if (s == "fixed") return Orientation::kFixed;
  throw Error(ErrorCode::kConfig, fmt::format("unknown orientation '{}'", s));
}

double angle_of(const Vec2& d) { return normalize_angle(std::atan2(d.y, d.x)); }

double yaw_for(const PlacementRule& rule, const Vec2& tangent, const Vec2& toward_road) {
  switch (rule.orientation) {
    case Orientation::kFaceRoad: return angle_of(toward_road);
    case Orientation::kAlongRoad: return angle_of(tangent);
    case Orientation::kFixed: return normalize_angle(rule.fixed_yaw);
  }
  return 0.0;
}

}  // namespace

void PlacementRule::validate() const {
  if (!(spacing > 0)) throw Error(ErrorCode::kConfig, fmt::format("{} rule: spacing must be positive", to_string(category)));
  if (!(lateral_offset >= 0)) {
    throw Error(ErrorCode::kConfig, fmt::format("{} rule: lateral_offset must not be negative", to_string(category)));
  }
}

std::vector<PlacementRule> default_rules() {
  const std::set<LaneClass> main = {LaneClass::kPrimary, LaneClass::kSecondary};
  return {
      {Category::kStreetLamp, 30.0, 0.5, Orientation::kFaceRoad, main, false, 0.0},
      {Category::kTree, 10.0, 1.5, Orientation::kFixed, {LaneClass::kSecondary, LaneClass::kService}, false, 0.0},
      {Category::kTrashBin, 50.0, 0.8, Orientation::kAlongRoad, main, false, 0.0},
      {Category::kBench, 60.0, 1.0, Orientation::kFaceRoad, main, false, 0.0},
      {Category::kTrafficSign, 5.0, 0.5, Orientation::kAlongRoad, main, true, 0.0},
  };
}

json rules_to_json(std::span<const PlacementRule> rules) {
  json arr = json::array();
  for (const auto& r : rules) {
    json classes = json::array();
    for (auto c : r.lane_classes) classes.push_back(geodata::to_string(c));
    arr.push_back({{"category", to_string(r.category)},
                   {"spacing", r.spacing},
                   {"lateral_offset", r.lateral_offset},
                   {"orientation", orientation_name(r.orientation)},
                   {"lane_classes", classes},
                   {"junction_approach", r.junction_approach},
                   {"fixed_yaw", r.fixed_yaw}});
  }
  return {{"rules", arr}};
}

std::vector<PlacementRule> rules_from_json(const json& j) {
  std::vector<PlacementRule> out;
  try {
    for (const auto& r : j.at("rules")) {
      PlacementRule rule;
      rule.category = category_from_string(r.at("category").get<std::string>());
      rule.spacing = r.at("spacing").get<double>();
      rule.lateral_offset = r.value("lateral_offset", 0.5);
      rule.orientation = orientation_from(r.value("orientation", "face_road"));
      for (const auto& c : r.at("lane_classes")) rule.lane_classes.insert(geodata::lane_class_from_string(c.get<std::string>()));
      rule.junction_approach = r.value("junction_approach", false);
      rule.fixed_yaw = r.value("fixed_yaw", 0.0);
      rule.validate();
      out.push_back(rule);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed furniture rules: ") + e.what());
  }
  return out;
}

std::vector<FurniturePlacement> place_along_road(const geodata::RoadSegment& road, const PlacementRule& rule) {
  std::vector<FurniturePlacement> out;
  if (!rule.lane_classes.count(road.lane_class) || road.polyline.size() < 2) return out;
  const double len = polyline::length(road.polyline);
  const double d = road.width / 2.0 + rule.lateral_offset;
  for (int side : {+1, -1}) {
    int k = 0;
    for (double s = rule.spacing / 2.0; s <= len + 1e-9; s += rule.spacing, ++k) {
      const auto sample = polyline::at(road.polyline, std::min(s, len));
      const Vec2 n = left_normal(sample.tangent) * static_cast<double>(side);
      const Vec2 p = sample.point + n * d;
      if (polyline::distance_to(road.polyline, p) < d - 1e-6) continue;  // inside of a bend
      FurniturePlacement f;
      f.id = fmt::format("{}:{}:{}:{}", road.id, to_string(rule.category), side > 0 ? "L" : "R", k);
      f.category = rule.category;
      f.position = p;
      f.yaw = yaw_for(rule, sample.tangent, n * -1.0);
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<FurniturePlacement> place_at_junctions(const geodata::RoadSegment& road, const PlacementRule& rule,
                                                   std::span<const roadnet::Junction> junctions) {
  std::vector<FurniturePlacement> out;
  if (!rule.lane_classes.count(road.lane_class) || road.polyline.size() < 2) return out;
  const double len = polyline::length(road.polyline);
  const double d = road.width / 2.0 + rule.lateral_offset;
  for (bool at_start : {true, false}) {
    const bool is_junction = std::any_of(junctions.begin(), junctions.end(), [&](const roadnet::Junction& j) {
      return std::find(j.roads.begin(), j.roads.end(), roadnet::RoadEnd{road.id, at_start}) != j.roads.end();
    });
    if (!is_junction) continue;
    const double setback = std::min(rule.spacing, len / 2.0);
    const auto sample = polyline::at(road.polyline, at_start ? setback : len - setback);
    // Traffic approaching the start drives against the road direction; its right is our left.
    const Vec2 travel = at_start ? sample.tangent * -1.0 : sample.tangent;
    const Vec2 right = left_normal(travel) * -1.0;
    FurniturePlacement f;
    f.id = fmt::format("{}:{}:{}", road.id, to_string(rule.category), at_start ? "start" : "end");
    f.category = rule.category;
    f.position = sample.point + right * d;
    f.yaw = yaw_for(rule, travel * -1.0, right * -1.0);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FurniturePlacement> drop_collisions(std::vector<FurniturePlacement> placements,
                                                const geodata::RegionModel& region, Diagnostics& diag) {
  std::vector<FurniturePlacement> kept;
  for (auto& p : placements) {
    const geodata::BuildingFootprint* hit = nullptr;
    for (const auto& b : region.buildings) {
      if (polygon::contains(b.polygon, p.position)) {
        hit = &b;
        break;
      }
    }
    if (hit) {
      diag.info("furniture_collision", p.id, "placement falls inside building " + hit->id + "; dropped");
      continue;
    }
    kept.push_back(std::move(p));
  }
  return kept;
}

FurnishResult furnish_region(const geodata::RegionModel& region, std::span<const PlacementRule> rules,
                             const AssetLibrary& library, std::span<const roadnet::Junction> junctions,
                             Diagnostics& diag) {
  for (const auto& rule : rules) {
    rule.validate();
    library.entry(rule.category);
  }
  std::vector<FurniturePlacement> all;
  for (const auto& road : region.roads) {
    for (const auto& rule : rules) {
      auto placed = rule.junction_approach ? place_at_junctions(road, rule, junctions) : place_along_road(road, rule);
      all.insert(all.end(), std::make_move_iterator(placed.begin()), std::make_move_iterator(placed.end()));
    }
  }
  FurnishResult result;
  result.placements = drop_collisions(std::move(all), region, diag);
  for (const auto& p : result.placements) ++result.counts[p.category];
  return result;
}

namespace {

Vec2 tree_position(const geodata::BuildingFootprint& b, const geodata::RegionModel& region, double distance_m) {
  const Vec2 c = polygon::centroid(b.polygon);
  Vec2 u{1.0, 0.0};
  double best = 1e300;
  for (const auto& r : region.roads) {
    for (std::size_t i = 0; i + 1 < r.polyline.size(); ++i) {
      const Vec2 q = closest_point_on_segment(c, r.polyline[i], r.polyline[i + 1]);
      const double dist = distance(q, c);
      if (dist < best && dist > 1e-9) best = dist, u = (q - c) / dist;
    }
  }
  // Farthest crossing of the ray c + t*u with the footprint boundary.
  double exit = 0.0;
  const auto& ring = b.polygon;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2 a = ring[i], e = ring[(i + 1) % ring.size()] - ring[i];
    const double den = cross(u, e);
    if (std::abs(den) < 1e-12) continue;
    const double t = cross(a - c, e) / den;
    const double s = cross(a - c, u) / den;
    if (t >= 0 && s >= 0 && s <= 1) exit = std::max(exit, t);
  }
  return c + u * (exit + std::max(distance_m, 0.5));
}

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

}  // namespace

VlmHints parse_env_record(const json& record, const geodata::RegionModel& region,
                          std::span<const roadnet::Junction> junctions, const AssetLibrary& library,
                          const std::string& subject) {
  VlmHints hints;
  try {
    int k = 0;
    for (const auto& o : record.at("objects")) {
      FurniturePlacement f;
      try {
        f.category = category_from_string(o.at("category").get<std::string>());
      } catch (const Error& e) {
        throw Error(ErrorCode::kProtocol, e.what());
      }
      const auto& anchor = o.at("anchor");
      const auto type = anchor.at("type").get<std::string>();
      Vec2 base;
      if (type == "junction") {
        const auto id = anchor.at("id").get<std::string>();
        auto it = std::find_if(junctions.begin(), junctions.end(), [&](const auto& j) { return j.id == id; });
        if (it == junctions.end()) throw Error(ErrorCode::kProtocol, "extractor names unknown junction " + id);
        base = it->point;
      } else if (type == "building") {
        const auto id = anchor.at("id").get<std::string>();
        const auto* b = region.find_building(id);
        if (!b) throw Error(ErrorCode::kProtocol, "extractor names unknown building " + id);
        base = polygon::centroid(b->polygon);
      } else if (type == "point") {
        base = {anchor.at("x").get<double>(), anchor.at("y").get<double>()};
      } else {
        throw Error(ErrorCode::kProtocol, "unknown anchor type '" + type + "'");
      }
      Vec2 offset;
      if (o.contains("offset")) offset = {o["offset"].at(0).get<double>(), o["offset"].at(1).get<double>()};
      f.position = base + offset;
      f.id = fmt::format("vlm:{}:{}", subject, k++);
      f.source = "vlm";
      hints.placements.push_back(std::move(f));
    }
    for (const auto& t : record.value("trees", json::array())) {
      const auto id = t.at("building").get<std::string>();
      const auto* b = region.find_building(id);
      if (!b) throw Error(ErrorCode::kProtocol, "extractor names unknown building " + id);
      const double height = t.at("height_m").get<double>();
      if (!(height > 0)) throw Error(ErrorCode::kProtocol, "tree height must be positive");
      FurniturePlacement f;
      f.category = Category::kTree;
      f.position = tree_position(*b, region, t.at("distance_to_building_m").get<double>());
      f.scale = library.has(Category::kTree) ? height / library.entry(Category::kTree).nominal_height : 1.0;
      f.id = fmt::format("vlm:{}:{}", subject, k++);
      f.source = "vlm";
      hints.placements.push_back(std::move(f));
    }
    for (const auto& pair : record.value("adjacency", json::array())) {
      hints.adjacency.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("malformed extractor record: ") + e.what());
  }
  return hints;
}

VlmHints vlm_assisted_placements(std::span<const RgbImage> views, const std::string& tags,
                                 const geodata::RegionModel& region, std::span<const roadnet::Junction> junctions,
                                 const AssetLibrary& library, tools::Toolbox& toolbox, const std::string& subject,
                                 Diagnostics& diag) {
  if (views.empty()) return {};
  std::string junction_text;
  for (const auto& j : junctions) junction_text += fmt::format("{} ({:.1f}, {:.1f})\n", j.id, j.point.x, j.point.y);
  std::string prompt = std::string(assets::get("prompts/env_extractor.txt"));
  prompt = replace_all(prompt, "{tags}", tags);
  prompt = replace_all(prompt, "{junctions}", junction_text.empty() ? "(none)\n" : junction_text);

  tools::ToolRequest req;
  req.tool = tools::ToolKind::kEnvInfoExtractor;
  for (const auto& v : views) req.parts.push_back(tools::Part::make_image(v));
  req.parts.push_back(tools::Part::make_text(prompt));
  tools::ToolResponse resp;
  try {
    resp = toolbox.call(std::move(req));
  } catch (const Error& e) {
    diag.warn("env_extractor_unavailable", subject, e.what());
    return {};
  }
  VlmHints hints;
  try {
    hints = parse_env_record(resp.record, region, junctions, library, subject);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kProtocol) throw;
    diag.warn("env_extractor_protocol", subject, e.what());
    return {};
  }
  hints.placements = drop_collisions(std::move(hints.placements), region, diag);
  return hints;
}

json to_json(const FurniturePlacement& p) {
  return {{"id", p.id},
          {"category", to_string(p.category)},
          {"position", {p.position.x, p.position.y}},
          {"yaw", p.yaw},
          {"scale", p.scale},
          {"source", p.source}};
}

FurniturePlacement placement_from_json(const json& j) {
  FurniturePlacement p;
  p.id = j.at("id").get<std::string>();
  p.category = category_from_string(j.at("category").get<std::string>());
  p.position = {j.at("position").at(0).get<double>(), j.at("position").at(1).get<double>()};
  p.yaw = j.at("yaw").get<double>();
  p.scale = j.value("scale", 1.0);
  p.source = j.value("source", "rule");
  return p;
}

}  // namespace urbangen::furnish
