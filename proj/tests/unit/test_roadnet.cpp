#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/mesh/mesh.hpp"
#include "urbangen/roadnet/roadnet.hpp"

namespace urbangen::roadnet {
namespace {

namespace ut = urbangen::testing;
using geodata::LaneClass;

geodata::RoadSegment road(std::string id, std::vector<Vec2> line, LaneClass c, double width) {
  geodata::RoadSegment r;
  r.id = std::move(id);
  r.polyline = std::move(line);
  r.lane_class = c;
  r.width = width;
  return r;
}

TEST(Lanes, CountsFollowClassAndTag) {
  auto r = road("r", {{0, 0}, {10, 0}}, LaneClass::kPrimary, 12);
  EXPECT_EQ(lane_count(r), 4);
  r.tags["lanes"] = "3";
  EXPECT_EQ(lane_count(r), 3);
  r.tags["lanes"] = "many";
  EXPECT_EQ(lane_count(r), 4);
  EXPECT_EQ(lane_count(road("s", {}, LaneClass::kService, 3)), 1);
  EXPECT_EQ(lane_count(road("o", {}, LaneClass::kOther, 3)), 2);
}

TEST(Lanes, OffsetsAndDirections) {
  const auto lanes = derive_lanes(road("r", {{0, 0}, {20, 0}}, LaneClass::kPrimary, 12));
  ASSERT_EQ(lanes.size(), 4u);
  const double expected[] = {-4.5, -1.5, 1.5, 4.5};
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(lanes[i].offset, expected[i]);
    EXPECT_DOUBLE_EQ(lanes[i].width, 3.0);
    EXPECT_EQ(lanes[i].parent, "r");
  }
  EXPECT_EQ(lanes[0].direction, Direction::kForward);
  EXPECT_EQ(lanes[3].direction, Direction::kBackward);
  // Forward lanes run with the road on its right; backward lanes are reversed.
  EXPECT_EQ(lanes[0].centerline.front(), (Vec2{0, -4.5}));
  EXPECT_EQ(lanes[3].centerline.front(), (Vec2{20, 4.5}));

  const auto single = derive_lanes(road("s", {{0, 0}, {5, 5}}, LaneClass::kService, 3));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].direction, Direction::kForward);
  EXPECT_EQ(single[0].centerline.back(), (Vec2{5, 5}));
  EXPECT_THROW(derive_lanes(road("z", {{0, 0}, {1, 0}}, LaneClass::kService, 0)), Error);
}

TEST(Offset, StraightAndMitredCorner) {
  const std::vector<Vec2> straight{{0, 0}, {10, 0}};
  EXPECT_EQ(offset_polyline(straight, 2), (std::vector<Vec2>{{0, 2}, {10, 2}}));
  const std::vector<Vec2> corner{{0, 0}, {10, 0}, {10, 10}};
  const auto out = offset_polyline(corner, 1);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_NEAR(out[1].x, 9.0, 1e-12);
  EXPECT_NEAR(out[1].y, 1.0, 1e-12);
  // A hairpin caps the mitre at four times the offset.
  const std::vector<Vec2> hairpin{{0, 0}, {10, 0}, {0, 0.1}};
  EXPECT_LE(distance(offset_polyline(hairpin, 1)[1], hairpin[1]), 4.0 + 1e-9);
  EXPECT_THROW(offset_polyline(std::vector<Vec2>{{1, 1}, {1, 1}}, 1), Error);
}

std::vector<geodata::RoadSegment> crossing() {
  return {road("a", {{-50, 0}, {0, 0}}, LaneClass::kSecondary, 6), road("b", {{0, 0}, {50, 0}}, LaneClass::kSecondary, 6),
          road("c", {{0, 0.3}, {0, 50}}, LaneClass::kService, 3), road("d", {{100, 100}, {120, 100}}, LaneClass::kService, 3),
          road("e", {{50, 0.4}, {50, -40}}, LaneClass::kPrimary, 12)};
}

TEST(Junctions, ClusteringWithTolerance) {
  const auto roads = crossing();
  const auto j = connect_junctions(roads, {});
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0].id, "J0");
  EXPECT_EQ(j[0].roads, (std::vector<RoadEnd>{{"a", false}, {"b", true}, {"c", true}}));
  EXPECT_NEAR(j[0].point.y, 0.1, 1e-12);
  EXPECT_EQ(j[1].roads, (std::vector<RoadEnd>{{"b", false}, {"e", true}}));
  EXPECT_EQ(connect_junctions(roads, {}, 0.35).size(), 1u);
}

TEST(Junctions, IndependentOfInputOrder) {
  auto roads = crossing();
  std::vector<Lane> lanes;
  for (const auto& r : roads) {
    auto l = derive_lanes(r);
    lanes.insert(lanes.end(), l.begin(), l.end());
  }
  const auto ref = connect_junctions(roads, lanes);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(roads.begin(), roads.end(), rng);
    std::shuffle(lanes.begin(), lanes.end(), rng);
    const auto got = connect_junctions(roads, lanes);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, ref[i].id);
      EXPECT_EQ(got[i].roads, ref[i].roads);
      EXPECT_EQ(got[i].incident, ref[i].incident);
      EXPECT_EQ(got[i].point, ref[i].point);
    }
  }
}

TEST(Junctions, IncidentLaneEnds) {
  const auto roads = crossing();
  const auto lanes = derive_lanes(roads[0]);  // a: forward L0, backward L1
  const auto j = connect_junctions(roads, lanes);
  // Road a ends at J0: its forward lane ends there and its backward lane starts.
  EXPECT_EQ(j[0].incident, (std::vector<LaneEnd>{{"a:L0", false}, {"a:L1", true}}));
}

TEST(Meshes, SurfaceAndMarkingAreas) {
  const auto lanes = derive_lanes(road("r", {{0, 0}, {10, 0}}, LaneClass::kSecondary, 6));
  const auto m = build_road_mesh(lanes);
  EXPECT_NEAR(mesh::surface_area(m.surface), 60.0, 1e-9);
  EXPECT_NEAR(mesh::surface_area(m.markings), 10.0 * kMarkingWidth, 1e-9);
  const auto b = mesh::bounds(m.markings);
  EXPECT_NEAR(b.min.y, -kMarkingWidth / 2, 1e-12);  // on the centreline between the two lanes
  EXPECT_DOUBLE_EQ(b.min.z, kMarkingZ);
  EXPECT_DOUBLE_EQ(mesh::bounds(m.surface).max.z, kRoadSurfaceZ);
  for (const auto& f : m.surface.faces) EXPECT_GT(mesh::face_normal(m.surface, f).z, 0.99);
  EXPECT_TRUE(build_road_mesh(derive_lanes(road("s", {{0, 0}, {5, 0}}, LaneClass::kService, 3))).markings.empty());
}

TEST(Traffic, SeededAndOrderIndependent) {
  const auto region = ut::block_region();
  Diagnostics diag;
  TrafficOptions opt;
  opt.seed = 42;
  const auto a = build_network(region, {}, opt, diag);
  ASSERT_FALSE(a.agents.empty());
  auto lanes = a.lanes;
  std::reverse(lanes.begin(), lanes.end());
  auto b = traffic_snapshot(lanes, region.roads, opt, diag);
  auto key = [](const TrafficAgent& t) { return std::tie(t.lane, t.s); };
  auto sorted = a.agents;
  std::sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  std::sort(b.begin(), b.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  ASSERT_EQ(sorted.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(sorted[i].s, b[i].s);
    EXPECT_EQ(sorted[i].position, b[i].position);
  }
  opt.seed = 43;
  const auto c = build_network(region, {}, opt, diag);
  EXPECT_NE(to_json(c), to_json(a));
}

TEST(Traffic, HeadwayAndInfeasibleDensity) {
  const auto lanes = derive_lanes(road("r", {{0, 0}, {100, 0}}, LaneClass::kService, 3));
  const std::vector<geodata::RoadSegment> roads{road("r", {{0, 0}, {100, 0}}, LaneClass::kService, 3)};
  TrafficOptions opt;
  opt.vehicle_density = 1000;  // 100 requested on 100 m
  Diagnostics diag;
  const auto agents = traffic_snapshot(lanes, roads, opt, diag);
  std::vector<double> s;
  for (const auto& a : agents)
    if (a.kind == AgentKind::kVehicle) s.push_back(a.s);
  EXPECT_EQ(s.size(), 15u);  // floor(100 / 7) + 1
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i] - s[i - 1], opt.vehicle_headway - 1e-9);
  EXPECT_EQ(diag.count("traffic_density_infeasible"), 1u);
  EXPECT_EQ(agents.size() - s.size(), 2u);  // 20 per km of service lane
  opt.vehicle_density = -1;
  EXPECT_THROW(traffic_snapshot(lanes, roads, opt, diag), Error);
}

TEST(Network, JsonRoundTrip) {
  const auto region = ut::block_region();
  Diagnostics diag;
  const auto net = build_network(region, {}, {}, diag);
  const auto j = to_json(net);
  EXPECT_EQ(to_json(network_from_json(j)), j);
  EXPECT_EQ(net.lanes.size(), 3u * 4 + 8u * 2 + 2u * 1);
}

}  // namespace
}  // namespace urbangen::roadnet
