#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/mesh/mesh.hpp"

namespace urbangen::roadnet {

enum class Direction { kForward, kBackward };

struct Lane {
  std::string id;
  std::vector<Vec2> centerline;  // in driving direction
  double width = 0.0;
  std::string parent;
  Direction direction = Direction::kForward;
  double offset = 0.0;  // signed distance from the road centerline, positive to the left of the road direction
};

// Total lane counts per class; an OSM "lanes" tag overrides them.
struct LaneCounts {
  int primary = 4;
  int secondary = 2;
  int service = 1;
  int other = 2;
};

int lane_count(const geodata::RoadSegment& road, const LaneCounts& counts = {});

// Lanes ordered by offset, right to left. Lane i sits at (i + 0.5) * w - W / 2
// with w = W / n; lanes right of the centreline (and a lone centre lane)
// drive forward.
std::vector<Lane> derive_lanes(const geodata::RoadSegment& road, const LaneCounts& counts = {});

// Offsets a polyline to the left by `d` with mitred joins (miter length capped
// at four times |d|).
std::vector<Vec2> offset_polyline(std::span<const Vec2> line, double d);

struct LaneEnd {
  std::string lane;
  bool at_start = true;
  bool operator==(const LaneEnd&) const = default;
};

struct RoadEnd {
  std::string road;
  bool at_start = true;
  bool operator==(const RoadEnd&) const = default;
};

struct Junction {
  std::string id;
  Vec2 point;
  std::vector<RoadEnd> roads;     // sorted
  std::vector<LaneEnd> incident;  // sorted
};

// Clusters road endpoints closer than `tolerance` (inclusive, transitively).
// Clusters with at least two endpoints become junctions. Ids and order do not
// depend on the input order.
std::vector<Junction> connect_junctions(std::span<const geodata::RoadSegment> roads, std::span<const Lane> lanes,
                                        double tolerance = 0.5);

struct RoadMeshes {
  mesh::Mesh surface;
  mesh::Mesh markings;
};

inline constexpr double kRoadSurfaceZ = 0.02;
inline constexpr double kMarkingZ = 0.03;
inline constexpr double kMarkingWidth = 0.15;

// One strip per lane (a quad per segment, mitred joins) at z = 0.02, plus
// marking strips on the boundaries between neighbouring lanes of a road.
RoadMeshes build_road_mesh(std::span<const Lane> lanes);

enum class AgentKind { kVehicle, kPedestrian };

struct TrafficAgent {
  AgentKind kind = AgentKind::kVehicle;
  std::string lane;
  double s = 0.0;
  std::string asset;  // library category
  Vec2 position;
  double yaw = 0.0;
};

struct TrafficOptions {
  double vehicle_density = 10.0;     // per km of lane
  double pedestrian_density = 20.0;  // per km of service lane
  double vehicle_headway = 7.0;
  double pedestrian_headway = 1.5;
  std::uint64_t seed = 0;
};

// Seeded static placement. Each lane draws from its own generator keyed by
// (seed, lane id), so the result does not depend on lane order.
std::vector<TrafficAgent> traffic_snapshot(std::span<const Lane> lanes, std::span<const geodata::RoadSegment> roads,
                                           const TrafficOptions& options, Diagnostics& diag);

std::string_view to_string(AgentKind kind);

struct RoadNetwork {
  std::vector<Lane> lanes;
  std::vector<Junction> junctions;
  std::vector<TrafficAgent> agents;
};

RoadNetwork build_network(const geodata::RegionModel& region, const LaneCounts& counts, const TrafficOptions& traffic,
                          Diagnostics& diag);

nlohmann::json to_json(const RoadNetwork& network);
RoadNetwork network_from_json(const nlohmann::json& j);

}  // namespace urbangen::roadnet
