#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/mesh/io.hpp"
#include "urbangen/tools/backend.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::furnish {
namespace {

namespace ut = urbangen::testing;
using geodata::LaneClass;
using nlohmann::json;

geodata::RoadSegment road(std::string id, std::vector<Vec2> line, LaneClass c, double width) {
  geodata::RoadSegment r;
  r.id = std::move(id);
  r.polyline = std::move(line);
  r.lane_class = c;
  r.width = width;
  return r;
}

PlacementRule lamp_rule() { return {Category::kStreetLamp, 30.0, 0.5, Orientation::kFaceRoad, {LaneClass::kPrimary}}; }

TEST(Rules, JsonRoundTripAndErrors) {
  const auto rules = default_rules();
  const auto j = rules_to_json(rules);
  const auto back = rules_from_json(j);
  ASSERT_EQ(back.size(), rules.size());
  EXPECT_EQ(rules_to_json(back), j);
  json bad = j;
  bad["rules"][0]["spacing"] = 0;
  EXPECT_THROW(rules_from_json(bad), Error);
  bad = j;
  bad["rules"][0]["category"] = "fountain";
  EXPECT_THROW(rules_from_json(bad), Error);
  bad = j;
  bad["rules"][0]["orientation"] = "upside_down";
  EXPECT_THROW(rules_from_json(bad), Error);
  EXPECT_THROW(rules_from_json(json{{"rules", {{{"category", "bench"}}}}}), Error);
}

// Length 100, spacing 30: s = 15, 45, 75 on both sides.
TEST(Placement, IntervalsOnBothSides) {
  const auto r = road("r", {{0, 0}, {100, 0}}, LaneClass::kPrimary, 12);
  const auto p = place_along_road(r, lamp_rule());
  ASSERT_EQ(p.size(), 6u);
  EXPECT_EQ(p[0].position, (Vec2{15, 6.5}));
  EXPECT_EQ(p[2].position, (Vec2{75, 6.5}));
  EXPECT_EQ(p[3].position, (Vec2{15, -6.5}));
  EXPECT_EQ(p[0].id, "r:street_lamp:L:0");
  // Facing the road.
  EXPECT_NEAR(p[0].yaw, 1.5 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(p[3].yaw, 0.5 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(place_along_road(road("s", {{0, 0}, {100, 0}}, LaneClass::kService, 3), lamp_rule()).empty());
}

TEST(Placement, InsideOfTightBendIsDropped) {
  // U-turn with a 2 m gap: the inner offset points land near the other leg.
  const auto r = road("u", {{0, 0}, {40, 0}, {40, 2}, {0, 2}}, LaneClass::kPrimary, 6);
  auto rule = lamp_rule();
  rule.spacing = 10;
  const auto p = place_along_road(r, rule);
  for (const auto& f : p) EXPECT_GE(polyline::distance_to(r.polyline, f.position), 3.5 - 1e-6) << f.id;
  EXPECT_LT(p.size(), 2 * 9u);
}

TEST(Placement, JunctionApproachOnTheRight) {
  const std::vector<geodata::RoadSegment> roads{road("a", {{-50, 0}, {0, 0}}, LaneClass::kPrimary, 12),
                                                road("b", {{0, 0}, {0, 60}}, LaneClass::kPrimary, 12)};
  const auto junctions = roadnet::connect_junctions(roads, {});
  ASSERT_EQ(junctions.size(), 1u);
  PlacementRule sign{Category::kTrafficSign, 5.0, 0.5, Orientation::kAlongRoad, {LaneClass::kPrimary}, true};
  // Traffic on a drives east into the junction; its right is south.
  const auto pa = place_at_junctions(roads[0], sign, junctions);
  ASSERT_EQ(pa.size(), 1u);
  EXPECT_EQ(pa[0].position, (Vec2{-5, -6.5}));
  EXPECT_EQ(pa[0].id, "a:traffic_sign:end");
  // Traffic on b drives south into the junction; its right is west.
  const auto pb = place_at_junctions(roads[1], sign, junctions);
  ASSERT_EQ(pb.size(), 1u);
  EXPECT_NEAR(pb[0].position.x, -6.5, 1e-12);
  EXPECT_NEAR(pb[0].position.y, 5.0, 1e-12);
}

TEST(Placement, CollisionsWithBuildingsAreDropped) {
  geodata::RegionModel region;
  geodata::BuildingFootprint b;
  b.id = "w1";
  b.polygon = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  region.buildings.push_back(b);
  std::vector<FurniturePlacement> p{{"in", Category::kBench, {5, 5}}, {"edge", Category::kBench, {10, 5}},
                                    {"out", Category::kBench, {15, 5}}};
  Diagnostics diag;
  const auto kept = drop_collisions(p, region, diag);
  ASSERT_EQ(kept.size(), 1u + (polygon::contains(b.polygon, {10, 5}) ? 0u : 1u));
  EXPECT_EQ(kept.back().id, "out");
  EXPECT_EQ(diag.count("furniture_collision"), p.size() - kept.size());
}

TEST(Region, FixtureBlockCountsAndLibraryCheck) {
  const auto region = ut::block_region();
  Diagnostics diag;
  const auto net = roadnet::build_network(region, {}, {}, diag);
  const auto library = AssetLibrary::builtin();
  const auto r = furnish_region(region, default_rules(), library, net.junctions, diag);
  EXPECT_GT(r.counts.at(Category::kStreetLamp), 0u);
  EXPECT_GT(r.counts.at(Category::kTree), 0u);
  std::size_t total = 0;
  for (const auto& [c, n] : r.counts) total += n;
  EXPECT_EQ(total, r.placements.size());
  for (const auto& p : r.placements)
    for (const auto& b : region.buildings) EXPECT_FALSE(polygon::contains(b.polygon, p.position)) << p.id;
  // Identical inputs, identical output.
  const auto again = furnish_region(region, default_rules(), library, net.junctions, diag);
  ASSERT_EQ(again.placements.size(), r.placements.size());
  for (std::size_t i = 0; i < r.placements.size(); ++i) EXPECT_EQ(to_json(again.placements[i]), to_json(r.placements[i]));

  AssetLibrary partial;
  EXPECT_THROW(furnish_region(region, default_rules(), partial, net.junctions, diag), Error);
}

TEST(Library, BuiltinCoversEveryCategory) {
  const auto lib = AssetLibrary::builtin();
  for (auto c : all_categories()) {
    ASSERT_TRUE(lib.has(c)) << to_string(c);
    const auto& e = lib.entry(c);
    const auto b = mesh::bounds(*e.mesh);
    EXPECT_NEAR(b.min.z, 0.0, 1e-12) << to_string(c);
    EXPECT_NEAR(b.max.z, e.nominal_height, 1e-9) << to_string(c);
    EXPECT_EQ(category_from_string(to_string(c)), c);
  }
}

TEST(Library, LoadsIndexedDirectory) {
  ut::TempDir dir("lib");
  const std::vector<Vec2> ring{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  mesh::export_obj(mesh::extrude_ring(ring, 5, 9), dir / "lamp.obj");
  write_file_atomic(dir / "index.json",
                    json{{"entries", {{{"category", "street_lamp"}, {"file", "lamp.obj"}, {"nominal_height", 6.0}}}}}.dump());
  const auto lib = AssetLibrary::load(dir.path());
  ASSERT_TRUE(lib.has(Category::kStreetLamp));
  EXPECT_FALSE(lib.has(Category::kBench));
  const auto b = mesh::bounds(*lib.entry(Category::kStreetLamp).mesh);
  EXPECT_NEAR(b.min.z, 0.0, 1e-9);
  EXPECT_NEAR(b.max.z, 6.0, 1e-9);
  EXPECT_NEAR(b.min.x + b.max.x, 0.0, 1e-9);
  EXPECT_THROW(lib.entry(Category::kBench), Error);
  write_file_atomic(dir / "index.json", std::string("{\"entries\": [{\"category\": \"bench\"}]}"));
  EXPECT_THROW(AssetLibrary::load(dir.path()), Error);
}

class EnvRecord : public ::testing::Test {
 protected:
  geodata::RegionModel region = ut::block_region();
  AssetLibrary library = AssetLibrary::builtin();
  std::vector<roadnet::Junction> junctions;
  void SetUp() override {
    Diagnostics diag;
    junctions = roadnet::build_network(region, {}, {}, diag).junctions;
    ASSERT_FALSE(junctions.empty());
  }
};

TEST_F(EnvRecord, AnchorsAndTrees) {
  const json rec = {
      {"objects",
       {{{"category", "bench"}, {"anchor", {{"type", "junction"}, {"id", junctions[0].id}}}, {"offset", {1, 2}}},
        {{"category", "street_lamp"}, {"anchor", {{"type", "point"}, {"x", 3}, {"y", 4}}}}}},
      {"trees", {{{"building", "w100"}, {"height_m", 12.0}, {"distance_to_building_m", 2.0}}}},
      {"adjacency", json::array({json::array({"w100", "w101"})})}};
  const auto hints = parse_env_record(rec, region, junctions, library, "w100");
  ASSERT_EQ(hints.placements.size(), 3u);
  EXPECT_EQ(hints.placements[0].position, (junctions[0].point + Vec2{1, 2}));
  EXPECT_EQ(hints.placements[1].position, (Vec2{3, 4}));
  EXPECT_EQ(hints.placements[2].id, "vlm:w100:2");
  EXPECT_EQ(hints.placements[2].source, "vlm");
  EXPECT_NEAR(hints.placements[2].scale, 12.0 / library.entry(Category::kTree).nominal_height, 1e-12);
  EXPECT_FALSE(polygon::contains(region.find_building("w100")->polygon, hints.placements[2].position));
  EXPECT_EQ(hints.adjacency.size(), 1u);
}

TEST_F(EnvRecord, MalformedRecordsAreProtocolErrors) {
  const std::vector<json> bad{
      json{{"objects", 5}},
      json{{"objects", {{{"category", "unicorn"}, {"anchor", {{"type", "point"}, {"x", 0}, {"y", 0}}}}}}},
      json{{"objects", {{{"category", "bench"}, {"anchor", {{"type", "junction"}, {"id", "J999"}}}}}}},
      json{{"objects", {{{"category", "bench"}, {"anchor", {{"type", "building"}, {"id", "w1"}}}}}}},
      json{{"objects", {{{"category", "bench"}, {"anchor", {{"type", "roof"}}}}}}},
      json{{"objects", json::array()}, {"trees", {{{"building", "w100"}, {"height_m", -1}, {"distance_to_building_m", 1}}}}},
  };
  for (const auto& rec : bad) {
    try {
      parse_env_record(rec, region, junctions, library, "w100");
      FAIL() << rec.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProtocol) << rec.dump();
    }
  }
}

TEST_F(EnvRecord, ToolOutagesBecomeDiagnostics) {
  tools::Toolbox box;
  box.set_backend(tools::ToolKind::kEnvInfoExtractor,
                  std::make_shared<tools::MockBackend>([](const tools::ToolRequest&, const tools::CacheKey&, tools::MeshStore&) {
                    return tools::ToolResponse::make_record({{"objects", "nope"}});
                  }));
  Diagnostics diag;
  const std::vector<RgbImage> views{RgbImage(8, 8)};
  const auto hints = vlm_assisted_placements(views, "", region, junctions, library, box, "w100", diag);
  EXPECT_TRUE(hints.placements.empty());
  EXPECT_EQ(diag.count("env_extractor_protocol"), 1u);
}

}  // namespace
}  // namespace urbangen::furnish
