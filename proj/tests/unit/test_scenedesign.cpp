#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/geodata/extract.hpp"
#include "urbangen/mesh/footprint.hpp"
#include "urbangen/mesh/io.hpp"
#include "urbangen/roadnet/roadnet.hpp"
#include "urbangen/scenedesign/align.hpp"
#include "urbangen/scenedesign/scene.hpp"
#include "urbangen/tools/backend.hpp"

namespace urbangen::scenedesign {
namespace {

namespace ut = urbangen::testing;
using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

geodata::BuildingFootprint l_shape() {
  geodata::BuildingFootprint fp;
  fp.id = "w1";
  fp.polygon = {{0, 0}, {10, 0}, {10, 4}, {4, 4}, {4, 10}, {0, 10}};
  fp.height = 10;
  return fp;
}

// The L splits into [0,10]x[0,4] and [0,4]x[4,10].
TEST(Align, PositionMatchesRectangleDecomposition) {
  const Vec2 c = align_position(l_shape());
  const double a1 = 40, a2 = 24;
  EXPECT_NEAR(c.x, (a1 * 5 + a2 * 2) / (a1 + a2), 1e-12);
  EXPECT_NEAR(c.y, (a1 * 2 + a2 * 7) / (a1 + a2), 1e-12);
  auto flat = l_shape();
  flat.polygon = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_THROW(align_position(flat), Error);
}

TEST(Align, ScaleIsCubeRootOfVolumeRatio) {
  const auto ring = l_shape().polygon;
  const auto small = mesh::extrude_ring(ring, 0, 10);
  EXPECT_NEAR(align_scale(mesh::transformed(small, 0.25, 0, {}), l_shape()), 4.0, 1e-9);
  mesh::Mesh open = small;
  open.faces.pop_back();
  EXPECT_THROW(align_scale(open, l_shape()), Error);
}

TEST(Align, RecoversRotationTranslationAndScale) {
  const auto ring = l_shape().polygon;
  // Generator output: a tenth of the size, turned by 30 degrees, off centre.
  const auto generated = mesh::transformed(mesh::extrude_ring(ring, 0, 10), 0.1, 30 * kDeg, {100, 50, 3});
  Diagnostics diag;
  const auto a = align_asset(generated, l_shape(), {1.0, 0.1}, diag);
  EXPECT_NEAR(a.scale, 10.0, 1e-9);
  EXPECT_NEAR(a.yaw / kDeg, 330.0, 1e-9);
  EXPECT_TRUE(diag.empty());
  // With 0.25 m cells a one-degree turn moves no edge by a full cell, so
  // neighbouring angles tie and the smallest wins.
  const auto coarse = align_asset(generated, l_shape(), {1.0, 0.25}, diag);
  EXPECT_NEAR(coarse.yaw / kDeg, 330.0, 1.0 + 1e-9);

  const auto placed = apply(generated, a);
  const auto b = mesh::bounds(placed);
  EXPECT_NEAR(b.min.z, 0.0, 1e-9);
  EXPECT_NEAR(b.max.z, 10.0, 1e-9);
  const auto ref = mesh::rasterize_polygon(ring, 0.25);
  const auto got = mesh::project_footprint_placed(placed, 0, {0, 0}, {0, 0}, 0.25);
  EXPECT_GT(mesh::intersection_over_union(ref, got), 0.95);
}

TEST(Align, YawSweepPrefersSmallestAngleOnTies) {
  // A square matches at 0, 90, 180 and 270 degrees.
  geodata::BuildingFootprint sq;
  sq.id = "sq";
  sq.polygon = {{0, 0}, {6, 0}, {6, 6}, {0, 6}};
  sq.height = 3;
  Diagnostics diag;
  const auto r = align_yaw(mesh::extrude_ring(sq.polygon, 0, 3), sq, {1.0, 0.25}, diag);
  EXPECT_EQ(r.yaw, 0.0);
  ASSERT_EQ(r.scores.size(), 360u);
  EXPECT_EQ(r.scores[0], r.scores[90]);
  EXPECT_EQ(r.score, r.scores[0]);
}

struct Fixture {
  geodata::RegionModel region = ut::block_region();
  tools::MeshStore store;
  roadnet::RoadNetwork net;
  roadnet::RoadMeshes roads;
  furnish::AssetLibrary library = furnish::AssetLibrary::builtin();
  std::vector<furnish::FurniturePlacement> furniture;
  Diagnostics diag;

  Fixture() {
    net = roadnet::build_network(region, {}, {}, diag);
    roads = roadnet::build_road_mesh(net.lanes);
    furniture = furnish::furnish_region(region, furnish::default_rules(), library, net.junctions, diag).placements;
  }

  std::vector<PlacedAsset> place_all() {
    std::vector<PlacedAsset> out;
    for (const auto& b : region.buildings) {
      const auto generated = mesh::extrude_ring(b.polygon, 0, b.height);
      const auto a = align_asset(generated, b, {}, diag);
      out.push_back(make_placed(b.id, store.put(generated), a));
    }
    return out;
  }

  SceneGraph scene(std::vector<PlacedAsset> placed) {
    return assemble_scene(region, std::move(placed), furniture, roads, net.agents, BackdropAssets::builtin(), diag);
  }
};

TEST(Assemble, RejectsDuplicateAndUnknownBuildings) {
  Fixture f;
  auto placed = f.place_all();
  auto twice = placed;
  twice.push_back(placed.front());
  EXPECT_THROW(f.scene(twice), Error);
  auto unknown = placed;
  unknown.back().building = "w999";
  EXPECT_THROW(f.scene(unknown), Error);
}

TEST(Assemble, NodeOrderAndManifest) {
  Fixture f;
  auto placed = f.place_all();
  std::reverse(placed.begin(), placed.end());
  const auto scene = f.scene(placed);
  ASSERT_EQ(scene.placed.size(), ut::kBlockBuildings);
  EXPECT_TRUE(std::is_sorted(scene.placed.begin(), scene.placed.end(),
                             [](const auto& a, const auto& b) { return a.building < b.building; }));

  const auto exported = export_scene(scene, f.store, f.library);
  const auto& nodes = exported.manifest.nodes;
  ASSERT_FALSE(nodes.empty());
  EXPECT_EQ(nodes.front().kind, "ground");
  EXPECT_EQ(nodes.back().kind, "sky");
  static const std::vector<std::string> kOrder{"ground", "building", "element", "road", "furniture", "traffic", "sky"};
  auto rank = [&](const std::string& k) { return std::find(kOrder.begin(), kOrder.end(), k) - kOrder.begin(); };
  for (std::size_t i = 1; i < nodes.size(); ++i) EXPECT_LE(rank(nodes[i - 1].kind), rank(nodes[i].kind)) << i;
  EXPECT_EQ(nodes[1].name, "building:w100");

  const auto imported = mesh::import_glb(exported.glb);
  ASSERT_EQ(imported.size(), nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) EXPECT_EQ(imported[i].name, nodes[i].name);

  // Export is a pure function of the scene.
  EXPECT_EQ(export_scene(scene, f.store, f.library).glb, exported.glb);
}

TEST(Manifest, RoundTripAndValidation) {
  Fixture f;
  const auto exported = export_scene(f.scene(f.place_all()), f.store, f.library);
  const json j = to_json(exported.manifest);
  EXPECT_TRUE(validate_manifest(j).empty());
  EXPECT_EQ(manifest_from_json(j), exported.manifest);

  json bad = j;
  bad["nodes"][0]["kind"] = "spaceship";
  bad["buildings"].push_back(bad["buildings"][0]);
  const auto problems = validate_manifest(bad);
  EXPECT_GE(problems.size(), 2u);
  EXPECT_THROW(manifest_from_json(bad), Error);
  json old = j;
  old["schema_version"] = 99;
  EXPECT_FALSE(validate_manifest(old).empty());
}

TEST(Manifest, PlacedAssetJson) {
  PlacedAsset p{"w3", {std::string(64, 'f')}, {1, 2, 0}, 2.5, 1.25, {3, 4, 0.5}, true};
  EXPECT_EQ(placed_from_json(to_json(p)), p);
  EXPECT_THROW(placed_from_json(json{{"building", "w3"}}), Error);
}

}  // namespace
}  // namespace urbangen::scenedesign
