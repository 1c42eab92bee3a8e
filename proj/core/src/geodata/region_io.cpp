#include "urbangen/geodata/region_io.hpp"

#include <set>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"

namespace urbangen::geodata {

using json = nlohmann::json;

json points_to_json(std::span<const LocalPoint> points) {
  json arr = json::array();
  for (const auto& p : points) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<LocalPoint> points_from_json(const json& arr) {
  std::vector<LocalPoint> out;
  for (const auto& p : arr) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

namespace {

json coord_json(const GeoCoord& c) { return {{"lat", c.lat}, {"lon", c.lon}}; }
GeoCoord coord_from(const json& j) { return {j.at("lat").get<double>(), j.at("lon").get<double>()}; }

}  // namespace

json to_json(const RegionModel& region) {
  json doc;
  doc["schema_version"] = kRegionSchemaVersion;
  doc["bbox"] = {{"min", coord_json(region.bbox.min)}, {"max", coord_json(region.bbox.max)}};
  doc["origin"] = {{"lat", region.origin.origin.lat},
                   {"lon", region.origin.origin.lon},
                   {"earth_radius", region.origin.earth_radius}};
  doc["margin"] = region.margin;
  json buildings = json::array();
  for (const auto& b : region.buildings) {
    buildings.push_back({{"id", b.id}, {"height", b.height}, {"polygon", points_to_json(b.polygon)}, {"tags", b.tags}});
  }
  json roads = json::array();
  for (const auto& r : region.roads) {
    roads.push_back({{"id", r.id},
                     {"lane_class", to_string(r.lane_class)},
                     {"width", r.width},
                     {"polyline", points_to_json(r.polyline)},
                     {"tags", r.tags}});
  }
  json elements = json::array();
  for (const auto& e : region.elements) {
    elements.push_back({{"id", e.id}, {"kind", to_string(e.kind)}, {"polygon", points_to_json(e.polygon)}});
  }
  doc["buildings"] = std::move(buildings);
  doc["roads"] = std::move(roads);
  doc["elements"] = std::move(elements);
  return doc;
}

RegionModel region_from_json(const json& doc) {
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kRegionSchemaVersion) {
      throw Error(ErrorCode::kParse, "unsupported region schema_version " + std::to_string(version));
    }
    RegionModel region;
    region.bbox = {coord_from(doc.at("bbox").at("min")), coord_from(doc.at("bbox").at("max"))};
    const auto& o = doc.at("origin");
    region.origin = {{o.at("lat").get<double>(), o.at("lon").get<double>()}, o.at("earth_radius").get<double>()};
    region.margin = doc.at("margin").get<double>();
    std::set<std::string> ids;
    auto unique = [&](const std::string& id) {
      if (!ids.insert(id).second) throw Error(ErrorCode::kParse, "duplicate id " + id + " in region");
      return id;
    };
    for (const auto& b : doc.at("buildings")) {
      region.buildings.push_back({unique(b.at("id").get<std::string>()), points_from_json(b.at("polygon")),
                                  b.at("height").get<double>(), b.value("tags", Tags{})});
    }
    for (const auto& r : doc.at("roads")) {
      region.roads.push_back({unique(r.at("id").get<std::string>()), points_from_json(r.at("polyline")),
                              lane_class_from_string(r.at("lane_class").get<std::string>()),
                              r.at("width").get<double>(), r.value("tags", Tags{})});
    }
    for (const auto& e : doc.at("elements")) {
      region.elements.push_back({unique(e.at("id").get<std::string>()),
                                 land_kind_from_string(e.at("kind").get<std::string>()),
                                 points_from_json(e.at("polygon"))});
    }
    return region;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("region.json: ") + e.what());
  }
}

void save_region(const std::filesystem::path& path, const RegionModel& region) {
  write_file_atomic(path, to_json(region).dump(2) + "\n");
}

RegionModel load_region(const std::filesystem::path& path) {
  try {
    return region_from_json(json::parse(read_file_text(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("region.json: ") + e.what(), e.byte);
  }
}

}  // namespace urbangen::geodata
