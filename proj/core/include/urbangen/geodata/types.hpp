#pragma once

#include <map>
#include <string>
#include <vector>

#include "urbangen/common/geometry.hpp"

namespace urbangen::geodata {

using Tags = std::map<std::string, std::string>;
using LocalPoint = Vec2;

struct GeoCoord {
  double lat = 0.0;  // degrees WGS84
  double lon = 0.0;

  bool valid() const;
  bool operator==(const GeoCoord&) const = default;
};

struct GeoBox {
  GeoCoord min;  // south-west
  GeoCoord max;  // north-east

  bool valid() const;       // ordered, in range
  bool degenerate() const;  // zero extent on either axis
  bool contains(const GeoCoord& c) const;
  GeoCoord center() const;
  bool operator==(const GeoBox&) const = default;
};

inline constexpr double kEarthRadius = 6378137.0;

struct ProjectionOrigin {
  GeoCoord origin;
  double earth_radius = kEarthRadius;
};

struct BuildingFootprint {
  std::string id;
  std::vector<LocalPoint> polygon;  // open ring, CCW
  double height = 0.0;
  Tags tags;
};

enum class LaneClass { kPrimary, kSecondary, kService, kOther };

const char* to_string(LaneClass c);
LaneClass lane_class_from_string(const std::string& s);

struct RoadSegment {
  std::string id;
  std::vector<LocalPoint> polyline;
  LaneClass lane_class = LaneClass::kOther;
  double width = 0.0;
  Tags tags;
};

enum class LandKind { kVegetation, kWater, kGround };

const char* to_string(LandKind k);
LandKind land_kind_from_string(const std::string& s);

struct LandElement {
  std::string id;
  LandKind kind = LandKind::kGround;
  std::vector<LocalPoint> polygon;
};

struct RegionModel {
  GeoBox bbox;
  ProjectionOrigin origin;
  double margin = 50.0;
  std::vector<BuildingFootprint> buildings;
  std::vector<RoadSegment> roads;
  std::vector<LandElement> elements;

  // Projected bbox rectangle (without margin).
  Rect local_bounds() const;
  const BuildingFootprint* find_building(const std::string& id) const;
};

}  // namespace urbangen::geodata
