#include "urbangen/geodata/extract.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/geodata/projection.hpp"

namespace urbangen::geodata {

namespace {

constexpr double kMinArea = 1e-6;

// Leading decimal number of an OSM value such as "12.5", "12 m" or "4;5".
std::optional<double> leading_number(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  const std::size_t start = i;
  bool digits = false;
  bool dot = false;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || (s[i] == '.' && !dot))) {
    if (s[i] == '.') dot = true;
    else digits = true;
    ++i;
  }
  if (!digits) return std::nullopt;
  const double v = std::strtod(s.substr(start, i - start).c_str(), nullptr);
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::string> tag(const Tags& tags, const std::string& key) {
  auto it = tags.find(key);
  if (it == tags.end()) return std::nullopt;
  return it->second;
}

bool is_building(const Tags& tags) {
  auto b = tag(tags, "building");
  if (b && *b != "no") return true;
  auto part = tag(tags, "building:part");
  return part && *part != "no";
}

std::vector<LocalPoint> project_refs(const OsmEntities& e, const std::vector<std::int64_t>& refs,
                                     const ProjectionOrigin& origin) {
  std::vector<LocalPoint> pts;
  pts.reserve(refs.size());
  for (auto ref : refs) pts.push_back(project(e.node(ref)->coord, origin));
  return pts;
}

// Validates and normalizes a ring; returns nullopt (with diagnostic) when unusable.
std::optional<std::vector<LocalPoint>> clean_ring(std::vector<LocalPoint> pts, const std::string& id,
                                                  Diagnostics& diagnostics) {
  auto ring = polygon::normalize_ring(pts);
  if (ring.size() < 3) {
    diagnostics.warn("degenerate_polygon", id, "fewer than 3 distinct vertices; skipped");
    return std::nullopt;
  }
  if (std::abs(polygon::signed_area(ring)) < kMinArea) {
    diagnostics.warn("degenerate_polygon", id, "zero-area ring; skipped");
    return std::nullopt;
  }
  if (!polygon::is_simple(ring)) {
    diagnostics.warn("self_intersecting", id, "self-intersecting ring; skipped");
    return std::nullopt;
  }
  polygon::make_ccw(ring);
  return ring;
}

// Joins member ways into closed rings by matching endpoint node ids.
std::vector<std::vector<std::int64_t>> assemble_rings(const OsmEntities& e, const OsmRelation& rel,
                                                      const std::string& role, Diagnostics& diagnostics,
                                                      const std::string& id) {
  std::vector<std::vector<std::int64_t>> open;
  std::vector<std::vector<std::int64_t>> rings;
  for (const auto& m : rel.members) {
    if (m.type != "way" || m.role != role) continue;
    const OsmWay* w = e.way(m.ref);
    if (!w) {
      diagnostics.warn("missing_member", id, fmt::format("member way {} not present", m.ref));
      continue;
    }
    if (w->closed()) rings.push_back(w->node_refs);
    else if (w->node_refs.size() >= 2) open.push_back(w->node_refs);
  }
  while (!open.empty()) {
    auto chain = open.back();
    open.pop_back();
    bool progress = true;
    while (chain.front() != chain.back() && progress) {
      progress = false;
      for (std::size_t i = 0; i < open.size(); ++i) {
        auto& cand = open[i];
        if (cand.front() == chain.back()) {
          chain.insert(chain.end(), cand.begin() + 1, cand.end());
        } else if (cand.back() == chain.back()) {
          chain.insert(chain.end(), cand.rbegin() + 1, cand.rend());
        } else {
          continue;
        }
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(i));
        progress = true;
        break;
      }
    }
    if (chain.front() == chain.back() && chain.size() >= 4) rings.push_back(std::move(chain));
    else diagnostics.warn("unclosed_ring", id, "could not close multipolygon ring; skipped");
  }
  return rings;
}

struct AreaSource {
  std::string id;
  std::vector<std::int64_t> refs;
  const Tags* tags;
};

// Closed ways and multipolygon outer rings matching `pred`.
template <typename Pred>
std::vector<AreaSource> area_sources(const OsmEntities& e, Pred pred, Diagnostics& diagnostics,
                                     bool warn_unclosed) {
  std::vector<AreaSource> out;
  for (const auto& w : e.ways) {
    if (!pred(w.tags)) continue;
    const std::string id = fmt::format("w{}", w.id);
    if (!w.closed()) {
      if (warn_unclosed) diagnostics.warn("unclosed_ring", id, "area way is not closed; skipped");
      continue;
    }
    out.push_back({id, w.node_refs, &w.tags});
  }
  for (const auto& r : e.relations) {
    auto type = tag(r.tags, "type");
    if (!type || *type != "multipolygon" || !pred(r.tags)) continue;
    const std::string id = fmt::format("r{}", r.id);
    auto outers = assemble_rings(e, r, "outer", diagnostics, id);
    const bool has_inner = std::any_of(r.members.begin(), r.members.end(),
                                       [](const OsmMember& m) { return m.role == "inner"; });
    if (has_inner) diagnostics.warn("inner_ring_dropped", id, "multipolygon inner rings are not supported");
    for (std::size_t k = 0; k < outers.size(); ++k) {
      out.push_back({outers.size() == 1 ? id : fmt::format("{}_{}", id, k), std::move(outers[k]), &r.tags});
    }
  }
  return out;
}

std::optional<LandKind> land_kind(const Tags& tags) {
  static const std::set<std::string> kVegLanduse{"grass", "forest", "meadow", "village_green", "recreation_ground",
                                                 "orchard", "allotments", "cemetery"};
  static const std::set<std::string> kVegLeisure{"park", "garden", "pitch", "playground"};
  static const std::set<std::string> kVegNatural{"wood", "scrub", "grassland", "heath", "tree_row"};
  static const std::set<std::string> kWaterLanduse{"reservoir", "basin"};
  static const std::set<std::string> kGroundLanduse{"brownfield", "construction", "greenfield"};
  auto v = [&](const char* k) { return tag(tags, k).value_or(""); };
  if (v("natural") == "water" || v("waterway") == "riverbank" || kWaterLanduse.count(v("landuse"))) {
    return LandKind::kWater;
  }
  if (kVegLanduse.count(v("landuse")) || kVegLeisure.count(v("leisure")) || kVegNatural.count(v("natural"))) {
    return LandKind::kVegetation;
  }
  if (kGroundLanduse.count(v("landuse")) || v("amenity") == "parking" || v("place") == "square") {
    return LandKind::kGround;
  }
  return std::nullopt;
}

}  // namespace

double resolve_height(const Tags& tags, const ExtractOptions& options) {
  if (auto h = tag(tags, "height")) {
    if (auto v = leading_number(*h); v && *v > 0) return *v;
  }
  if (auto l = tag(tags, "building:levels")) {
    if (auto v = leading_number(*l); v && *v > 0) return *v * options.meters_per_level;
  }
  return options.default_height;
}

std::optional<LaneClass> lane_class_for_highway(const std::string& highway) {
  if (highway.empty() || highway == "proposed" || highway == "construction" || highway == "platform" ||
      highway == "bus_stop" || highway == "street_lamp" || highway == "traffic_signals" ||
      highway == "crossing" || highway == "stop" || highway == "give_way") {
    return std::nullopt;
  }
  if (highway == "primary" || highway == "primary_link") return LaneClass::kPrimary;
  if (highway == "secondary" || highway == "tertiary" || highway == "residential") return LaneClass::kSecondary;
  if (highway == "service" || highway == "unclassified") return LaneClass::kService;
  return LaneClass::kOther;
}

double default_road_width(LaneClass c, const ExtractOptions& options) {
  switch (c) {
    case LaneClass::kPrimary: return options.primary_width;
    case LaneClass::kSecondary: return options.secondary_width;
    case LaneClass::kService: return options.service_width;
    case LaneClass::kOther: return options.other_width;
  }
  return options.other_width;
}

std::vector<BuildingFootprint> extract_buildings(const OsmEntities& entities, const ProjectionOrigin& origin,
                                                 Diagnostics& diagnostics, const ExtractOptions& options) {
  std::vector<BuildingFootprint> out;
  for (auto& src : area_sources(entities, is_building, diagnostics, true)) {
    auto ring = clean_ring(project_refs(entities, src.refs, origin), src.id, diagnostics);
    if (!ring) continue;
    out.push_back({src.id, std::move(*ring), resolve_height(*src.tags, options), *src.tags});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<RoadSegment> extract_roads(const OsmEntities& entities, const ProjectionOrigin& origin,
                                       Diagnostics& diagnostics, const ExtractOptions& options) {
  struct Candidate {
    const OsmWay* way;
    LaneClass lane_class;
  };
  std::vector<Candidate> candidates;
  std::map<std::int64_t, int> usage;
  for (const auto& w : entities.ways) {
    auto hw = tag(w.tags, "highway");
    if (!hw || tag(w.tags, "area").value_or("") == "yes") continue;
    auto cls = lane_class_for_highway(*hw);
    if (!cls || w.node_refs.size() < 2) continue;
    candidates.push_back({&w, *cls});
    for (auto ref : w.node_refs) ++usage[ref];
  }

  std::vector<RoadSegment> out;
  for (const auto& c : candidates) {
    const auto& refs = c.way->node_refs;
    std::vector<std::vector<std::int64_t>> pieces{{refs.front()}};
    for (std::size_t i = 1; i < refs.size(); ++i) {
      pieces.back().push_back(refs[i]);
      const bool interior = i + 1 < refs.size();
      if (interior && usage[refs[i]] > 1) pieces.push_back({refs[i]});
    }
    double width = default_road_width(c.lane_class, options);
    if (auto w = tag(c.way->tags, "width")) {
      if (auto v = leading_number(*w); v && *v > 0) width = *v;
    }
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const std::string id =
          pieces.size() == 1 ? fmt::format("w{}", c.way->id) : fmt::format("w{}_{}", c.way->id, k);
      std::vector<LocalPoint> line;
      for (const auto& p : project_refs(entities, pieces[k], origin)) {
        if (line.empty() || distance(line.back(), p) > 1e-9) line.push_back(p);
      }
      if (line.size() < 2) {
        diagnostics.warn("zero_length_road", id, "road segment has zero length; skipped");
        continue;
      }
      out.push_back({id, std::move(line), c.lane_class, width, c.way->tags});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<LandElement> extract_elements(const OsmEntities& entities, const ProjectionOrigin& origin,
                                          Diagnostics& diagnostics) {
  std::vector<LandElement> out;
  auto pred = [](const Tags& t) { return !is_building(t) && land_kind(t).has_value(); };
  for (auto& src : area_sources(entities, pred, diagnostics, false)) {
    auto ring = clean_ring(project_refs(entities, src.refs, origin), src.id, diagnostics);
    if (!ring) continue;
    out.push_back({src.id, *land_kind(*src.tags), std::move(*ring)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

RegionModel build_region(const OsmEntities& entities, const GeoBox& bbox, Diagnostics& diagnostics,
                         const ExtractOptions& options) {
  if (!bbox.valid() || bbox.degenerate()) throw Error(ErrorCode::kPrecondition, "invalid or degenerate bbox");
  RegionModel region;
  region.bbox = bbox;
  region.origin = ProjectionOrigin{bbox.center(), kEarthRadius};
  region.margin = options.margin;
  const Rect limit = region.local_bounds().expanded(options.margin);

  for (auto& b : extract_buildings(entities, region.origin, diagnostics, options)) {
    const bool inside = std::all_of(b.polygon.begin(), b.polygon.end(), [&](const Vec2& p) { return limit.contains(p); });
    if (!inside) {
      diagnostics.info("outside_region", b.id, "building leaves bbox + margin; dropped");
      continue;
    }
    region.buildings.push_back(std::move(b));
  }
  for (auto& r : extract_roads(entities, region.origin, diagnostics, options)) {
    auto pieces = polyline::clip_to_rect(r.polyline, limit);
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      RoadSegment piece = r;
      piece.polyline = std::move(pieces[k]);
      if (pieces.size() > 1) piece.id = fmt::format("{}_c{}", r.id, k);
      region.roads.push_back(std::move(piece));
    }
  }
  for (auto& el : extract_elements(entities, region.origin, diagnostics)) {
    auto clipped = polygon::clip_to_rect(el.polygon, limit);
    if (clipped.size() < 3 || std::abs(polygon::signed_area(clipped)) < kMinArea) {
      diagnostics.info("outside_region", el.id, "land element outside bbox + margin; dropped");
      continue;
    }
    polygon::make_ccw(clipped);
    el.polygon = std::move(clipped);
    region.elements.push_back(std::move(el));
  }
  return region;
}

double footprint_area(std::span<const LocalPoint> polygon) {
  const double a = polygon::signed_area(polygon);
  if (std::abs(a) < kMinArea) throw Error(ErrorCode::kDegenerate, "degenerate polygon (area < 1e-6 m^2)");
  return a;
}

double footprint_volume(const BuildingFootprint& footprint) {
  return std::abs(footprint_area(footprint.polygon)) * footprint.height;
}

}  // namespace urbangen::geodata
