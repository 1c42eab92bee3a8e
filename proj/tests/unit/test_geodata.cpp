#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/geodata/extract.hpp"
#include "urbangen/geodata/osm.hpp"
#include "urbangen/geodata/projection.hpp"
#include "urbangen/geodata/region_io.hpp"
#include "urbangen/geodata/source.hpp"

namespace urbangen::geodata {
namespace {

namespace ut = urbangen::testing;

RawDocument load(const std::string& name) { return {DocumentFormat::kXml, read_file_text(ut::fixture(name))}; }

RegionModel block_region(Diagnostics& diag) {
  return build_region(parse_osm(load("block.osm"), diag), ut::block_bbox(), diag);
}

TEST(Osm, ParsesFixtureEntities) {
  Diagnostics diag;
  const auto e = parse_osm(load("block.osm"), diag);
  EXPECT_EQ(e.ways.size(), 12u + 5u + 2u);
  EXPECT_TRUE(diag.empty());
  ASSERT_NE(e.way(100), nullptr);
  EXPECT_EQ(e.way(100)->tags.at("name"), "b01");
  EXPECT_TRUE(e.way(100)->closed());
}

TEST(Osm, TruncatedDocumentReportsByteOffset) {
  Diagnostics diag;
  try {
    parse_osm(load("truncated.osm"), diag);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.byte_offset(), 0u);
    EXPECT_LE(e.byte_offset(), 700u);
  }
}

TEST(Osm, NonNumericCoordinateIsAParseError) {
  Diagnostics diag;
  EXPECT_THROW(parse_osm(load("bad_coordinate.osm"), diag), ParseError);
}

TEST(Osm, DanglingWayIsDroppedWithDiagnostic) {
  Diagnostics diag;
  const auto e = parse_osm(load("dangling.osm"), diag);
  EXPECT_TRUE(e.ways.empty());
  EXPECT_EQ(diag.count("dangling_node"), 1u);
}

TEST(Osm, JsonAndXmlAgree) {
  const std::string json = R"({"elements": [
    {"type": "node", "id": 1, "lat": 40.7, "lon": -74.0},
    {"type": "node", "id": 2, "lat": 40.7001, "lon": -74.0, "tags": {"highway": "crossing"}},
    {"type": "way", "id": 5, "nodes": [1, 2], "tags": {"highway": "service"}}]})";
  Diagnostics diag;
  const auto from_json = parse_osm({DocumentFormat::kJson, json}, diag);
  const auto xml = serialize_osm_xml(from_json);
  const auto from_xml = parse_osm({DocumentFormat::kXml, xml}, diag);
  ASSERT_EQ(from_xml.ways.size(), 1u);
  EXPECT_EQ(from_xml.ways[0].node_refs, (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(from_xml.nodes[1].tags.at("highway"), "crossing");
  EXPECT_EQ(detect_format(json), DocumentFormat::kJson);
  EXPECT_EQ(detect_format(xml), DocumentFormat::kXml);
}

TEST(Projection, RoundTripsAndMatchesMetres) {
  const ProjectionOrigin o{{40.7, -74.0}};
  const GeoCoord c{40.7009, -73.9988};
  const auto p = project(c, o);
  const auto back = unproject(p, o);
  EXPECT_NEAR(back.lat, c.lat, 1e-12);
  EXPECT_NEAR(back.lon, c.lon, 1e-12);
  // One arc-second of latitude is R * pi / 648000 metres.
  const auto q = project({40.7 + 1.0 / 3600, -74.0}, o);
  EXPECT_NEAR(q.y, kEarthRadius * M_PI / 648000.0, 1e-9);
  EXPECT_NEAR(q.x, 0.0, 1e-12);
}

TEST(Extract, HeightPriority) {
  EXPECT_DOUBLE_EQ(resolve_height({{"height", "12"}, {"building:levels", "9"}}), 12.0);
  EXPECT_DOUBLE_EQ(resolve_height({{"height", "18 m"}}), 18.0);
  EXPECT_DOUBLE_EQ(resolve_height({{"building:levels", "5"}}), 15.0);
  EXPECT_DOUBLE_EQ(resolve_height({}), 9.0);
}

TEST(Extract, FixtureRegionContents) {
  Diagnostics diag;
  const auto region = block_region(diag);
  ASSERT_EQ(region.buildings.size(), ut::kBlockBuildings);
  EXPECT_EQ(region.elements.size(), 2u);
  EXPECT_EQ(region.buildings.front().id, "w100");
  EXPECT_DOUBLE_EQ(region.find_building("w101")->height, 15.0);
  EXPECT_DOUBLE_EQ(region.find_building("w109")->height, 9.0);
  // b01 is a 24 m x 18 m rectangle authored in metres around the bbox centre;
  // coordinates carry 8 decimals (about a millimetre).
  EXPECT_NEAR(footprint_area(region.find_building("w100")->polygon), 24.0 * 18.0, 432 * 1e-4);
  EXPECT_NEAR(footprint_volume(*region.find_building("w100")), 24.0 * 18.0 * 12.0, 5184 * 1e-4);
  int primary = 0, secondary = 0, service = 0;
  for (const auto& r : region.roads) {
    primary += r.lane_class == LaneClass::kPrimary;
    secondary += r.lane_class == LaneClass::kSecondary;
    service += r.lane_class == LaneClass::kService;
  }
  // Ways are split at interior nodes shared with other roads; the service
  // lanes only touch the avenues at their ends.
  EXPECT_EQ(primary, 3);
  EXPECT_EQ(secondary, 8);
  EXPECT_EQ(service, 2);
  for (const auto& b : region.buildings) EXPECT_GT(polygon::signed_area(b.polygon), 0.0) << b.id;
}

TEST(Extract, LShapeAreaMatchesShoelaceOracle) {
  Diagnostics diag;
  const auto region = block_region(diag);
  // b05: 40 x 15 bar plus 20 x 17 wing.
  EXPECT_NEAR(footprint_area(region.find_building("w104")->polygon), 40.0 * 15.0 + 20.0 * 17.0, 940 * 1e-4);
}

TEST(Extract, DegenerateAreaThrows) {
  const std::vector<LocalPoint> line{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_THROW(footprint_area(line), Error);
}

TEST(Extract, BuildingsOutsideMarginAreDropped) {
  Diagnostics diag;
  const auto entities = parse_osm(load("block.osm"), diag);
  // Shrink the box to the west half: eastern buildings fall outside box + margin.
  auto box = ut::block_bbox();
  box.max.lon = box.center().lon - 0.0009;
  const auto region = build_region(entities, box, diag);
  EXPECT_LT(region.buildings.size(), ut::kBlockBuildings);
  const auto bounds = region.local_bounds().expanded(region.margin);
  for (const auto& b : region.buildings)
    for (const auto& p : b.polygon) EXPECT_TRUE(bounds.contains(p)) << b.id;
}

TEST(RegionIo, RoundTrip) {
  Diagnostics diag;
  const auto region = block_region(diag);
  const auto back = region_from_json(to_json(region));
  EXPECT_EQ(to_json(back), to_json(region));
  auto bad = to_json(region);
  bad["schema_version"] = 99;
  EXPECT_THROW(region_from_json(bad), Error);
}

TEST(Source, CacheHitSkipsSource) {
  ut::TempDir dir("geo-cache");
  FileSource source(ut::fixture("block.osm"));
  const auto first = fetch_region(ut::block_bbox(), source, dir.path());
  // A second fetch must not touch the source: point it at a missing file.
  FileSource missing(dir / "missing.osm");
  const auto second = fetch_region(ut::block_bbox(), missing, dir.path());
  EXPECT_EQ(first.bytes, second.bytes);
  EXPECT_THROW(fetch_region({{1, 1}, {1, 1}}, source, dir.path()), Error);
}

}  // namespace
}  // namespace urbangen::geodata
