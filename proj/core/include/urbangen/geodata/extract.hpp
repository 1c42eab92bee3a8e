#pragma once

#include <optional>
#include <span>
#include <vector>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/geodata/osm.hpp"
#include "urbangen/geodata/types.hpp"

namespace urbangen::geodata {

struct ExtractOptions {
  double meters_per_level = 3.0;
  double default_height = 9.0;
  double primary_width = 14.0;
  double secondary_width = 9.0;
  double service_width = 5.0;
  double other_width = 4.0;
  double margin = 50.0;  // region containment margin around the projected bbox
};

// Height priority: `height` tag (metres, optional unit suffix) >
// `building:levels` x meters_per_level > default_height.
double resolve_height(const Tags& tags, const ExtractOptions& options = {});

// OSM `highway` value -> lane class, or nullopt for ways that are not roads.
std::optional<LaneClass> lane_class_for_highway(const std::string& highway);
double default_road_width(LaneClass c, const ExtractOptions& options = {});

// Every closed way or multipolygon relation tagged building (or building:part)
// becomes a footprint: CCW, duplicate closing vertex removed. Self-intersecting
// or degenerate rings are skipped with a diagnostic; inner rings are dropped.
std::vector<BuildingFootprint> extract_buildings(const OsmEntities& entities, const ProjectionOrigin& origin,
                                                 Diagnostics& diagnostics, const ExtractOptions& options = {});

// Highway ways, split at nodes shared with other road ways so that
// connectivity shows up as shared endpoints.
std::vector<RoadSegment> extract_roads(const OsmEntities& entities, const ProjectionOrigin& origin,
                                       Diagnostics& diagnostics, const ExtractOptions& options = {});

std::vector<LandElement> extract_elements(const OsmEntities& entities, const ProjectionOrigin& origin,
                                          Diagnostics& diagnostics);

// Projects around the bbox centre, extracts all features and enforces the
// containment invariant: buildings leaving bbox+margin are dropped, roads and
// land polygons are clipped to it.
RegionModel build_region(const OsmEntities& entities, const GeoBox& bbox, Diagnostics& diagnostics,
                         const ExtractOptions& options = {});

// Shoelace area (positive for CCW). Throws Degenerate when |area| < 1e-6 m^2.
double footprint_area(std::span<const LocalPoint> polygon);
double footprint_volume(const BuildingFootprint& footprint);

}  // namespace urbangen::geodata
