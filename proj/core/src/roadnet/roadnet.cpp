#include "urbangen/roadnet/roadnet.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/common/random.hpp"

namespace urbangen::roadnet {

using nlohmann::json;

int lane_count(const geodata::RoadSegment& road, const LaneCounts& counts) {
  if (auto it = road.tags.find("lanes"); it != road.tags.end()) {
    char* end = nullptr;
    const long n = std::strtol(it->second.c_str(), &end, 10);
    if (end != it->second.c_str() && n >= 1 && n <= 16) return static_cast<int>(n);
  }
  switch (road.lane_class) {
    case geodata::LaneClass::kPrimary: return counts.primary;
    case geodata::LaneClass::kSecondary: return counts.secondary;
    case geodata::LaneClass::kService: return counts.service;
    case geodata::LaneClass::kOther: return counts.other;
  }
  return counts.other;
}

std::vector<Vec2> offset_polyline(std::span<const Vec2> line_in, double d) {
  std::vector<Vec2> line;
  for (const auto& p : line_in) {
    if (line.empty() || distance(line.back(), p) > 1e-9) line.push_back(p);
  }
  if (line.size() < 2) throw Error(ErrorCode::kPrecondition, "cannot offset a polyline shorter than two points");
  std::vector<Vec2> out(line.size());
  const std::size_t n = line.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      out[i] = line[0] + left_normal(line[1] - line[0]) * d;
    } else if (i == n - 1) {
      out[i] = line[i] + left_normal(line[i] - line[i - 1]) * d;
    } else {
      const Vec2 n1 = left_normal(line[i] - line[i - 1]);
      const Vec2 n2 = left_normal(line[i + 1] - line[i]);
      Vec2 m = n1 + n2;
      const double len = norm(m);
      if (len < 1e-9) {
        out[i] = line[i] + n1 * d;
        continue;
      }
      m = m / len;
      const double scale = std::min(1.0 / dot(m, n1), 4.0);
      out[i] = line[i] + m * (d * scale);
    }
  }
  return out;
}

std::vector<Lane> derive_lanes(const geodata::RoadSegment& road, const LaneCounts& counts) {
  const int n = lane_count(road, counts);
  if (!(road.width > 0.0)) throw Error(ErrorCode::kPrecondition, "road " + road.id + " has no width");
  const double w = road.width / n;
  std::vector<Lane> lanes;
  for (int i = 0; i < n; ++i) {
    Lane lane;
    lane.id = fmt::format("{}:L{}", road.id, i);
    lane.parent = road.id;
    lane.width = w;
    lane.offset = (i + 0.5) * w - road.width / 2.0;
    lane.direction = lane.offset <= 1e-12 ? Direction::kForward : Direction::kBackward;
    lane.centerline = std::abs(lane.offset) < 1e-12 ? std::vector<Vec2>(road.polyline.begin(), road.polyline.end())
                                                    : offset_polyline(road.polyline, lane.offset);
    if (lane.direction == Direction::kBackward) std::reverse(lane.centerline.begin(), lane.centerline.end());
    lanes.push_back(std::move(lane));
  }
  return lanes;
}

std::vector<Junction> connect_junctions(std::span<const geodata::RoadSegment> roads, std::span<const Lane> lanes,
                                        double tolerance) {
  struct Endpoint {
    RoadEnd end;
    Vec2 point;
  };
  std::vector<Endpoint> ends;
  for (const auto& r : roads) {
    if (r.polyline.size() < 2) continue;
    ends.push_back({{r.id, true}, r.polyline.front()});
    ends.push_back({{r.id, false}, r.polyline.back()});
  }
  // Canonical order makes the clustering and ids independent of input order.
  std::sort(ends.begin(), ends.end(), [](const Endpoint& a, const Endpoint& b) {
    return std::tie(a.end.road, b.end.at_start) < std::tie(b.end.road, a.end.at_start);
  });
  std::vector<std::size_t> parent(ends.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < ends.size(); ++i) {
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      if (distance(ends[i].point, ends[j].point) <= tolerance) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < ends.size(); ++i) clusters[find(i)].push_back(i);

  std::map<std::string, std::vector<const Lane*>> lanes_by_road;
  for (const auto& l : lanes) lanes_by_road[l.parent].push_back(&l);

  std::vector<Junction> out;
  for (const auto& [root, members] : clusters) {
    if (members.size() < 2) continue;
    Junction j;
    Vec2 sum;
    for (auto m : members) {
      sum = sum + ends[m].point;
      j.roads.push_back(ends[m].end);
      for (const Lane* l : lanes_by_road[ends[m].end.road]) {
        // Forward lanes start where the road starts; backward lanes end there.
        const bool lane_start = (l->direction == Direction::kForward) == ends[m].end.at_start;
        j.incident.push_back({l->id, lane_start});
      }
    }
    j.point = sum / static_cast<double>(members.size());
    std::sort(j.roads.begin(), j.roads.end(),
              [](const RoadEnd& a, const RoadEnd& b) { return std::tie(a.road, b.at_start) < std::tie(b.road, a.at_start); });
    std::sort(j.incident.begin(), j.incident.end(),
              [](const LaneEnd& a, const LaneEnd& b) { return std::tie(a.lane, b.at_start) < std::tie(b.lane, a.at_start); });
    out.push_back(std::move(j));
  }
  std::sort(out.begin(), out.end(), [](const Junction& a, const Junction& b) {
    return std::tie(a.roads.front().road, b.roads.front().at_start) < std::tie(b.roads.front().road, a.roads.front().at_start);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = fmt::format("J{}", i);
  return out;
}

namespace {

void add_strip(mesh::Mesh& m, std::span<const Vec2> center, double lo, double hi, double z) {
  const auto right = offset_polyline(center, lo);
  const auto left = offset_polyline(center, hi);
  const auto base = static_cast<std::uint32_t>(m.vertices.size());
  const auto n = static_cast<std::uint32_t>(right.size());
  for (const auto& p : right) m.vertices.push_back({p.x, p.y, z});
  for (const auto& p : left) m.vertices.push_back({p.x, p.y, z});
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    const std::uint32_t r0 = base + i, r1 = base + i + 1, l0 = base + n + i, l1 = base + n + i + 1;
    m.faces.push_back({r0, r1, l1});
    m.faces.push_back({r0, l1, l0});
  }
}

}  // namespace

RoadMeshes build_road_mesh(std::span<const Lane> lanes) {
  RoadMeshes out;
  out.surface.color = {64, 64, 66};
  out.markings.color = {225, 225, 215};
  std::map<std::string, double> max_offset;
  for (const auto& l : lanes) {
    auto [it, inserted] = max_offset.try_emplace(l.parent, l.offset);
    if (!inserted) it->second = std::max(it->second, l.offset);
  }
  for (const auto& l : lanes) {
    add_strip(out.surface, l.centerline, -l.width / 2, l.width / 2, kRoadSurfaceZ);
    if (l.offset < max_offset[l.parent] - 1e-9) {
      // Boundary on the side of increasing road offset.
      const double edge = l.direction == Direction::kForward ? l.width / 2 : -l.width / 2;
      add_strip(out.markings, l.centerline, edge - kMarkingWidth / 2, edge + kMarkingWidth / 2, kMarkingZ);
    }
  }
  return out;
}

std::string_view to_string(AgentKind kind) { return kind == AgentKind::kVehicle ? "vehicle" : "pedestrian"; }

std::vector<TrafficAgent> traffic_snapshot(std::span<const Lane> lanes, std::span<const geodata::RoadSegment> roads,
                                           const TrafficOptions& options, Diagnostics& diag) {
  if (options.vehicle_density < 0 || options.pedestrian_density < 0) {
    throw Error(ErrorCode::kPrecondition, "traffic density must not be negative");
  }
  std::map<std::string, geodata::LaneClass> road_class;
  for (const auto& r : roads) road_class[r.id] = r.lane_class;

  std::vector<TrafficAgent> out;
  auto place = [&](const Lane& lane, AgentKind kind, double density, double headway) {
    const double len = polyline::length(lane.centerline);
    auto count = static_cast<long long>(std::llround(density * len / 1000.0));
    if (count <= 0) return;
    const auto feasible = static_cast<long long>(std::floor(len / headway)) + 1;
    if (count > feasible) {
      diag.warn("traffic_density_infeasible", lane.id,
                fmt::format("{} {}s requested, {} fit under the headway", count, to_string(kind), feasible));
      count = feasible;
    }
    DeterministicRng rng(hash64(fmt::format("{}:{}:{}", options.seed, lane.id, to_string(kind))));
    const double slack = std::max(0.0, len - static_cast<double>(count - 1) * headway);
    std::vector<double> u(static_cast<std::size_t>(count));
    for (auto& x : u) x = rng.uniform(0.0, slack);
    std::sort(u.begin(), u.end());
    for (std::size_t i = 0; i < u.size(); ++i) {
      TrafficAgent a;
      a.kind = kind;
      a.lane = lane.id;
      a.s = std::min(len, u[i] + static_cast<double>(i) * headway);
      a.asset = std::string(to_string(kind));
      const auto sample = polyline::at(lane.centerline, a.s);
      a.position = sample.point;
      a.yaw = normalize_angle(std::atan2(sample.tangent.y, sample.tangent.x));
      out.push_back(std::move(a));
    }
  };
  for (const auto& lane : lanes) {
    place(lane, AgentKind::kVehicle, options.vehicle_density, options.vehicle_headway);
    auto it = road_class.find(lane.parent);
    if (it != road_class.end() && it->second == geodata::LaneClass::kService) {
      place(lane, AgentKind::kPedestrian, options.pedestrian_density, options.pedestrian_headway);
    }
  }
  return out;
}

RoadNetwork build_network(const geodata::RegionModel& region, const LaneCounts& counts, const TrafficOptions& traffic,
                          Diagnostics& diag) {
  RoadNetwork net;
  for (const auto& r : region.roads) {
    auto lanes = derive_lanes(r, counts);
    net.lanes.insert(net.lanes.end(), lanes.begin(), lanes.end());
  }
  net.junctions = connect_junctions(region.roads, net.lanes);
  net.agents = traffic_snapshot(net.lanes, region.roads, traffic, diag);
  return net;
}

namespace {

json points_json(std::span<const Vec2> pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

std::vector<Vec2> points_from(const json& a) {
  std::vector<Vec2> out;
  for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

}  // namespace

json to_json(const RoadNetwork& net) {
  json lanes = json::array(), junctions = json::array(), agents = json::array();
  for (const auto& l : net.lanes) {
    lanes.push_back({{"id", l.id},
                     {"parent", l.parent},
                     {"width", l.width},
                     {"offset", l.offset},
                     {"direction", l.direction == Direction::kForward ? "forward" : "backward"},
                     {"centerline", points_json(l.centerline)}});
  }
  for (const auto& j : net.junctions) {
    json roads = json::array(), incident = json::array();
    for (const auto& r : j.roads) roads.push_back({{"road", r.road}, {"end", r.at_start ? "start" : "end"}});
    for (const auto& e : j.incident) incident.push_back({{"lane", e.lane}, {"end", e.at_start ? "start" : "end"}});
    junctions.push_back({{"id", j.id}, {"point", {j.point.x, j.point.y}}, {"roads", roads}, {"incident", incident}});
  }
  for (const auto& a : net.agents) {
    agents.push_back({{"kind", to_string(a.kind)},
                      {"lane", a.lane},
                      {"s", a.s},
                      {"asset", a.asset},
                      {"position", {a.position.x, a.position.y}},
                      {"yaw", a.yaw}});
  }
  return {{"schema_version", 1}, {"lanes", lanes}, {"junctions", junctions}, {"traffic", agents}};
}

RoadNetwork network_from_json(const json& j) {
  try {
    RoadNetwork net;
    for (const auto& l : j.at("lanes")) {
      Lane lane;
      lane.id = l.at("id").get<std::string>();
      lane.parent = l.at("parent").get<std::string>();
      lane.width = l.at("width").get<double>();
      lane.offset = l.at("offset").get<double>();
      lane.direction = l.at("direction").get<std::string>() == "forward" ? Direction::kForward : Direction::kBackward;
      lane.centerline = points_from(l.at("centerline"));
      net.lanes.push_back(std::move(lane));
    }
    for (const auto& jj : j.at("junctions")) {
      Junction jn;
      jn.id = jj.at("id").get<std::string>();
      jn.point = {jj.at("point").at(0).get<double>(), jj.at("point").at(1).get<double>()};
      for (const auto& r : jj.at("roads")) jn.roads.push_back({r.at("road").get<std::string>(), r.at("end") == "start"});
      for (const auto& e : jj.at("incident")) jn.incident.push_back({e.at("lane").get<std::string>(), e.at("end") == "start"});
      net.junctions.push_back(std::move(jn));
    }
    for (const auto& a : j.at("traffic")) {
      TrafficAgent ag;
      ag.kind = a.at("kind") == "vehicle" ? AgentKind::kVehicle : AgentKind::kPedestrian;
      ag.lane = a.at("lane").get<std::string>();
      ag.s = a.at("s").get<double>();
      ag.asset = a.at("asset").get<std::string>();
      ag.position = {a.at("position").at(0).get<double>(), a.at("position").at(1).get<double>()};
      ag.yaw = a.at("yaw").get<double>();
      net.agents.push_back(std::move(ag));
    }
    return net;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed road network: ") + e.what());
  }
}

}  // namespace urbangen::roadnet
