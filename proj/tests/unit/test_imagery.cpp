#include <gtest/gtest.h>

#include "test_support.hpp"
#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/geodata/projection.hpp"
#include "urbangen/imagery/curate.hpp"
#include "urbangen/imagery/streetview.hpp"
#include "urbangen/tools/mocks.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::imagery {
namespace {

namespace ut = urbangen::testing;
using nlohmann::json;

geodata::BuildingFootprint square(const std::string& id, Vec2 c, double half) {
  geodata::BuildingFootprint fp;
  fp.id = id;
  fp.polygon = {c + Vec2{-half, -half}, c + Vec2{half, -half}, c + Vec2{half, half}, c + Vec2{-half, half}};
  fp.height = 10;
  return fp;
}

const geodata::ProjectionOrigin kOrigin{{40.7, -74.0}};

TEST(Capture, BearingIsClockwiseFromNorth) {
  EXPECT_DOUBLE_EQ(bearing_deg({0, 0}, {0, 5}), 0.0);
  EXPECT_DOUBLE_EQ(bearing_deg({0, 0}, {5, 0}), 90.0);
  EXPECT_DOUBLE_EQ(bearing_deg({0, 0}, {0, -5}), 180.0);
  EXPECT_DOUBLE_EQ(bearing_deg({0, 0}, {-5, 0}), 270.0);
}

TEST(Capture, PointsLieOnTheRoadAndFaceTheBuilding) {
  const auto fp = square("w1", {0, 0}, 5);
  geodata::RoadSegment road;
  road.id = "r1";
  road.polyline = {{-80, -20}, {80, -20}};
  Diagnostics diag;
  CaptureOptions opt;
  const auto pts = plan_capture_points(fp, std::span(&road, 1), kOrigin, opt, diag);
  ASSERT_EQ(pts.size(), 4u);
  // The nearest point comes first and looks due north.
  EXPECT_EQ(pts[0].local, (Vec2{0, -20}));
  EXPECT_NEAR(pts[0].heading, 0.0, 1e-9);
  for (const auto& p : pts) {
    EXPECT_NEAR(p.local.y, -20.0, 1e-9);
    EXPECT_LE(norm(p.local), opt.radius + 1e-9);
    EXPECT_NEAR(p.heading, bearing_deg(p.local, {0, 0}), 1e-9);
    const auto back = geodata::project(p.coord, kOrigin);
    EXPECT_NEAR(back.x, p.local.x, 1e-6);
  }
  // Farthest-point spreading reaches both ends of the reachable stretch.
  EXPECT_LT(pts[1].local.x * pts[2].local.x, 0.0);
  EXPECT_TRUE(diag.empty());
}

TEST(Capture, CompassFallbackWithoutRoads) {
  const auto fp = square("w2", {10, 10}, 4);
  Diagnostics diag;
  const auto pts = plan_capture_points(fp, {}, kOrigin, {}, diag);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[0].local, (Vec2{10, 40}));
  EXPECT_DOUBLE_EQ(pts[0].heading, 180.0);
  EXPECT_DOUBLE_EQ(pts[1].heading, 270.0);
  EXPECT_EQ(diag.count("capture_fallback"), 1u);
}

TEST(StreetView, FixtureFilenameRoundsHeading) {
  EXPECT_EQ(fixture_filename({40.7, -74.0}, 359.6), "40.700000_-74.000000_0.png");
  EXPECT_EQ(fixture_filename({40.7123456, -73.9}, 90.4), "40.712346_-73.900000_90.png");
}

TEST(StreetView, DirectoryClientReadsNamedFiles) {
  ut::TempDir dir("sv");
  CapturePoint p{{40.7, -74.0}, {0, 0}, 45.0};
  write_png(dir / fixture_filename(p.coord, p.heading), RgbImage(8, 6, {1, 2, 3}));
  DirectoryClient client(dir.path());
  const auto img = client.fetch(p);
  ASSERT_TRUE(img.has_value());
  EXPECT_EQ(img->pixels.width(), 8);
  EXPECT_DOUBLE_EQ(img->heading, 45.0);
  p.heading = 46.0;
  EXPECT_FALSE(client.fetch(p).has_value());
}

class GapClient : public StreetViewClient {
 public:
  explicit GapClient(bool any) : any_(any) {}
  std::optional<StreetViewImage> fetch(const CapturePoint& p) override {
    if (!any_ || p.heading > 100) return std::nullopt;
    return StreetViewImage{RgbImage(4, 4), p.coord, p.heading, "img"};
  }

 private:
  bool any_;
};

TEST(StreetView, GapsAreReportedAndTotalLossThrows) {
  const std::vector<CapturePoint> pts{{{}, {}, 10}, {{}, {}, 200}};
  Diagnostics diag;
  GapClient some(true), none(false);
  EXPECT_EQ(fetch_street_views(pts, some, "w1", diag).size(), 1u);
  EXPECT_EQ(diag.count("streetview_missing"), 1u);
  try {
    fetch_street_views(pts, none, "w1", diag);
    FAIL() << "expected PerceptionUnavailable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPerceptionUnavailable);
  }
}

TEST(Curate, DetectionsAreClippedAndValidated) {
  const json rec = {{"detections",
                     {{{"label", "building"}, {"confidence", 0.8}, {"bbox", {-5, 10, 20, 20}}},
                      {{"label", "car"}, {"confidence", 0.2}, {"bbox", {200, 200, 5, 5}}}}}};
  const auto boxes = parse_detections(rec, 100, 100);
  ASSERT_EQ(boxes.size(), 1u);  // the car box lies outside and vanishes
  EXPECT_EQ(boxes[0].bbox, (PixelRect{0, 10, 15, 20}));

  json bad = rec;
  bad["detections"][0]["confidence"] = 1.5;
  EXPECT_THROW(parse_detections(bad, 100, 100), Error);
  EXPECT_THROW(parse_detections(json{{"detections", 3}}, 100, 100), Error);
  EXPECT_THROW(parse_detections(json{{"detections", {{{"label", "x"}}}}}, 100, 100), Error);
}

TEST(Curate, ThresholdLabelAndGlobalTopK) {
  auto box = [](std::string label, double c) { return DetectionBox{std::move(label), c, {0, 0, 4, 4}}; };
  const std::vector<std::vector<DetectionBox>> per_image{
      {box("Building", 0.5), box("car", 0.99), box("building", 0.005)},
      {box("building", 0.7), box("building", 0.5)},
      {box("building", 0.2)},
  };
  CurationOptions opt;
  const auto sel = select_detections(per_image, opt);
  ASSERT_EQ(sel.size(), 3u);
  EXPECT_EQ(sel[0].first, 1u);
  EXPECT_DOUBLE_EQ(sel[0].second.confidence, 0.7);
  // Ties keep input order.
  EXPECT_EQ(sel[1].first, 0u);
  EXPECT_EQ(sel[2].first, 1u);
  opt.threshold = 0.6;
  EXPECT_EQ(select_detections(per_image, opt).size(), 1u);
}

TEST(Curate, MockDetectorCropsTheCentre) {
  tools::Toolbox box;
  box.set_backend(tools::ToolKind::kDetector, std::make_shared<tools::MockBackend>(tools::mocks::detector()));
  std::vector<StreetViewImage> images{{RgbImage(100, 50, {5, 5, 5}), {}, 0, "a"}};
  const auto views = curate_views(images, box, "w7");
  ASSERT_EQ(views.size(), 1u);
  EXPECT_EQ(views[0].parent, "a");
  EXPECT_EQ(views[0].building, "w7");
  EXPECT_EQ(views[0].crop.width(), views[0].bbox.w);
  EXPECT_GE(views[0].confidence, 0.30);
  EXPECT_LE(views[0].confidence, 0.95);
}

}  // namespace
}  // namespace urbangen::imagery
