#include "urbangen/geodata/types.hpp"

#include "urbangen/common/error.hpp"
#include "urbangen/geodata/projection.hpp"

namespace urbangen::geodata {

bool GeoCoord::valid() const {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 &&
         lon <= 180.0;
}

bool GeoBox::valid() const { return min.valid() && max.valid() && min.lat <= max.lat && min.lon <= max.lon; }

bool GeoBox::degenerate() const { return min.lat == max.lat || min.lon == max.lon; }

bool GeoBox::contains(const GeoCoord& c) const {
  return c.lat >= min.lat && c.lat <= max.lat && c.lon >= min.lon && c.lon <= max.lon;
}

GeoCoord GeoBox::center() const { return {(min.lat + max.lat) / 2.0, (min.lon + max.lon) / 2.0}; }

const char* to_string(LaneClass c) {
  switch (c) {
    case LaneClass::kPrimary: return "primary";
    case LaneClass::kSecondary: return "secondary";
    case LaneClass::kService: return "service";
    case LaneClass::kOther: return "other";
  }
  return "other";
}

LaneClass lane_class_from_string(const std::string& s) {
  if (s == "primary") return LaneClass::kPrimary;
  if (s == "secondary") return LaneClass::kSecondary;
  if (s == "service") return LaneClass::kService;
  if (s == "other") return LaneClass::kOther;
  throw Error(ErrorCode::kParse, "unknown lane class '" + s + "'");
}

const char* to_string(LandKind k) {
  switch (k) {
    case LandKind::kVegetation: return "vegetation";
    case LandKind::kWater: return "water";
    case LandKind::kGround: return "ground";
  }
  return "ground";
}

LandKind land_kind_from_string(const std::string& s) {
  if (s == "vegetation") return LandKind::kVegetation;
  if (s == "water") return LandKind::kWater;
  if (s == "ground") return LandKind::kGround;
  throw Error(ErrorCode::kParse, "unknown land element kind '" + s + "'");
}

Rect RegionModel::local_bounds() const {
  const LocalPoint a = project(bbox.min, origin);
  const LocalPoint b = project(bbox.max, origin);
  return {{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
}

const BuildingFootprint* RegionModel::find_building(const std::string& id) const {
  for (const auto& b : buildings) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

}  // namespace urbangen::geodata
