#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/mesh/cleanup.hpp"
#include "urbangen/mesh/footprint.hpp"
#include "urbangen/mesh/io.hpp"
#include "urbangen/mesh/mesh.hpp"
#include "urbangen/mesh/scaffold.hpp"

namespace urbangen::mesh {
namespace {

namespace ut = urbangen::testing;

Mesh box(double x0, double y0, double x1, double y1, double z0, double z1) {
  const std::vector<Vec2> ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return extrude_ring(ring, z0, z1);
}

Mesh quad(double x0, double y0, double x1, double y1, double z) {
  Mesh m;
  m.vertices = {{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

TEST(Mesh, BoxIsWatertightWithExactVolume) {
  const auto b = box(1, 2, 4, 6, 0.5, 2.5);
  EXPECT_TRUE(is_watertight(b));
  EXPECT_NEAR(mesh_volume(b), 3 * 4 * 2, 1e-12);
  EXPECT_NEAR(surface_area(b), 2 * (12 + 6 + 8), 1e-12);
  // Faces 8.. are the top cap and point up.
  EXPECT_GT(face_normal(b, b.faces[8]).z, 0.5);
}

TEST(Mesh, OpenSurfaceHasNoVolume) {
  EXPECT_FALSE(is_watertight(quad(0, 0, 1, 1, 0)));
  EXPECT_THROW(mesh_volume(quad(0, 0, 1, 1, 0)), Error);
}

TEST(Mesh, ValidateRejectsBrokenInvariants) {
  Mesh m = quad(0, 0, 1, 1, 0);
  m.faces.push_back({0, 0, 1});
  EXPECT_THROW(m.validate(), Error);
  m.faces.back() = {0, 1, 9};
  EXPECT_THROW(m.validate(), Error);
}

TEST(Mesh, FilterFacesKeepsVertexOrder) {
  const auto b = box(0, 0, 1, 1, 0, 1);
  std::vector<bool> keep(b.faces.size(), false);
  keep[2] = keep[3] = true;
  const auto f = filter_faces(b, keep);
  ASSERT_EQ(f.faces.size(), 2u);
  for (std::size_t i = 1; i < f.vertices.size(); ++i) {
    const auto a = std::find(b.vertices.begin(), b.vertices.end(), f.vertices[i - 1]);
    const auto c = std::find(b.vertices.begin(), b.vertices.end(), f.vertices[i]);
    EXPECT_LT(a, c);
  }
}

TEST(Mesh, ComponentsAreLabelledInOrder) {
  const std::array<Mesh, 2> parts{box(0, 0, 1, 1, 0, 1), box(5, 5, 6, 6, 0, 1)};
  std::uint32_t n = 0;
  const auto labels = face_components(merge(parts), &n);
  EXPECT_EQ(n, 2u);
  EXPECT_EQ(labels.front(), 0u);
  EXPECT_EQ(labels.back(), 1u);
}

// Triangle areas must sum to the shoelace area and every triangle must be
// positively oriented.
TEST(Triangulate, RandomStarPolygonsMatchShoelaceArea) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ring = ut::random_star(rng);
    const auto tris = triangulate(ring);
    EXPECT_EQ(tris.size(), ring.size() - 2);
    double sum = 0.0;
    for (const auto& f : tris) {
      const double a = 0.5 * cross(ring[f[1]] - ring[f[0]], ring[f[2]] - ring[f[0]]);
      EXPECT_GT(a, 0.0);
      sum += a;
    }
    EXPECT_NEAR(sum, polygon::signed_area(ring), 1e-9 * std::abs(sum));
  }
}

TEST(Triangulate, DegenerateRingsAreRejected) {
  const std::vector<Vec2> collinear{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  EXPECT_THROW(triangulate(collinear), Error);
  const std::vector<Vec2> two{{0, 0}, {1, 1}};
  EXPECT_THROW(triangulate(two), Error);
}

// Raster area against a Monte Carlo estimate of the true area. The error
// bound is one perimeter band of half a cell plus sampling noise.
TEST(Footprint, RasterAreaMatchesMonteCarlo) {
  std::mt19937_64 rng(3);
  const double cell = 0.25;
  for (int trial = 0; trial < 30; ++trial) {
    auto ring = ut::random_convex(rng);
    for (auto& p : ring) p = p * 10.0;
    const double mc = ut::monte_carlo_area(ring, 200000, rng);
    double perimeter = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) perimeter += norm(ring[(i + 1) % ring.size()] - ring[i]);
    const double raster = rasterize_polygon(ring, cell).area();
    EXPECT_NEAR(raster, mc, 0.5 * cell * perimeter + 0.02 * mc) << "trial " << trial;
  }
}

TEST(Footprint, AxisAlignedSquareIsExact) {
  const std::vector<Vec2> sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  const auto r = rasterize_polygon(sq, 0.5);
  EXPECT_EQ(r.count(), 64u);  // boundary centres never coincide with the edges
  EXPECT_DOUBLE_EQ(r.area(), 16.0);
  EXPECT_EQ(r.centroid(), (Vec2{2, 2}));
}

TEST(Footprint, IouOfShiftedSquares) {
  const std::vector<Vec2> a{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  const std::vector<Vec2> b{{2, 0}, {6, 0}, {6, 4}, {2, 4}};
  const auto ra = rasterize_polygon(a, 0.5), rb = rasterize_polygon(b, 0.5);
  EXPECT_EQ(overlap_cells(ra, rb), 32u);
  EXPECT_DOUBLE_EQ(intersection_over_union(ra, rb), 32.0 / 96.0);
  EXPECT_DOUBLE_EQ(intersection_over_union(ra, ra), 1.0);
}

TEST(Footprint, ProjectionRotatesAboutCentroid) {
  const auto b = box(0, 0, 8, 2, 0, 3);
  const auto r0 = project_footprint(b, 0.0, 0.25);
  const auto r90 = project_footprint(b, std::numbers::pi / 2, 0.25);
  EXPECT_EQ(r0.count(), r90.count());
  EXPECT_GT(r90.rows(), r90.cols());
  EXPECT_NEAR(r90.centroid().x, 4.0, 1e-9);
  EXPECT_NEAR(r90.centroid().y, 1.0, 1e-9);
}

TEST(GroundPlane, SlabUnderBuildingIsRemoved) {
  const std::array<Mesh, 2> parts{box(0, 0, 10, 10, 0, 10), quad(-5, -5, 15, 15, 0)};
  Diagnostics diag;
  const auto cleaned = remove_ground_plane(merge(parts), {}, diag);
  const auto bb = bounds(cleaned);
  EXPECT_DOUBLE_EQ(bb.min.x, 0.0);
  EXPECT_DOUBLE_EQ(bb.max.y, 10.0);
  EXPECT_EQ(diag.count("ground_plane_refused"), 0u);
}

TEST(GroundPlane, RefusesToDeleteMostOfTheMesh) {
  const auto flat = quad(0, 0, 10, 10, 0);
  Diagnostics diag;
  const auto out = remove_ground_plane(flat, {}, diag);
  EXPECT_EQ(out, flat);
  EXPECT_EQ(diag.count("ground_plane_refused"), 1u);
}

TEST(Io, ObjRoundTripIsExactForDecimalCoordinates) {
  auto b = box(0, 0, 2.5, 1.25, 0, 3);
  const auto back = parse_obj(to_obj(b));
  EXPECT_EQ(back.vertices, b.vertices);
  EXPECT_EQ(back.faces, b.faces);
}

TEST(Io, ObjTextureTravelsWithTheFile) {
  ut::TempDir dir("obj");
  auto q = quad(0, 0, 1, 1, 0);
  q.uvs = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
  q.texture = RgbImage(4, 4, {9, 8, 7});
  export_obj(q, dir / "asset.obj");
  const auto back = import_obj(dir / "asset.obj");
  ASSERT_TRUE(back.texture.has_value());
  EXPECT_EQ(*back.texture, *q.texture);
  EXPECT_EQ(back.uvs, q.uvs);
}

TEST(Io, ObjMalformedRecordsThrow) {
  EXPECT_THROW(parse_obj("v 1 2\nf 1 2 3\n"), Error);
  EXPECT_THROW(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n"), Error);
}

TEST(Io, GlbRoundTripPreservesNodesAndSharing) {
  auto shared = std::make_shared<const Mesh>(box(0, 0, 2, 3, 0, 4));
  const std::vector<SceneNode> nodes{
      {"a", shared, {10, 20, 0}, 1.5, 0.5},
      {"b", shared, {-3, 1, 0}, 1.0, -1.0},
  };
  const auto bytes = export_glb(nodes);
  const auto back = import_glb(bytes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "a");
  EXPECT_NEAR(back[0].yaw, 0.5, 1e-12);
  EXPECT_NEAR(back[1].yaw, -1.0, 1e-12);
  EXPECT_EQ(back[0].translation, (Vec3{10, 20, 0}));
  EXPECT_EQ(back[0].scale[2], 1.5);
  ASSERT_EQ(back[1].mesh.vertices.size(), shared->vertices.size());
  for (std::size_t i = 0; i < shared->vertices.size(); ++i)
    EXPECT_LT(norm(back[1].mesh.vertices[i] - shared->vertices[i]), 1e-6);
  EXPECT_EQ(back[1].mesh.faces, shared->faces);
  // The mesh is stored once.
  const std::string text(bytes.begin(), bytes.end());
  EXPECT_EQ(text.find("\"meshes\":[{"), text.rfind("\"meshes\":[{"));
  EXPECT_THROW(import_glb(std::vector<std::uint8_t>(16, 0)), Error);
}

// Exit status of the external validator on `path`, or -1 when it is not installed.
int gltf_validator_status(const std::filesystem::path& path, std::string* out) {
  std::string cmd = URBANGEN_GLTF_VALIDATOR;
  if (cmd.empty()) return -1;
  cmd.replace(cmd.find("{file}"), 6, path.string());
  FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return -1;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) *out += buf;
  const int status = ::pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Io, GlbPassesTheReferenceValidator) {
  ut::TempDir dir("gltf");
  auto textured = quad(0, 0, 4, 4, 0);
  textured.uvs = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
  textured.texture = RgbImage(8, 8, {200, 40, 10});
  auto plain = std::make_shared<const Mesh>(box(0, 0, 2, 3, 0, 4));
  const std::vector<SceneNode> nodes{
      {"ground", std::make_shared<const Mesh>(textured), {0, 0, 0}, 1.0, 0.0},
      {"a", plain, {10, 20, 0}, 1.5, 0.5},
      {"b", plain, {-3, 1, 0}, 1.0, -1.0},
  };
  write_glb(dir / "scene.glb", nodes);
  std::string report;
  const int status = gltf_validator_status(dir / "scene.glb", &report);
  if (status < 0) GTEST_SKIP() << "glTF validator not installed";
  EXPECT_EQ(status, 0) << report;
  EXPECT_EQ(report.rfind("errors=0", 0), 0u) << report;

  // A damaged chunk length must be caught.
  auto bytes = read_file_bytes(dir / "scene.glb");
  bytes[12] ^= 0x40;
  write_file_atomic(dir / "broken.glb", bytes);
  report.clear();
  EXPECT_EQ(gltf_validator_status(dir / "broken.glb", &report), 1) << report;
}

TEST(Scaffold, PrismAndRenderAreDeterministic) {
  geodata::BuildingFootprint fp;
  fp.id = "w1";
  fp.polygon = {{0, 0}, {6, 0}, {6, 4}, {0, 4}};
  fp.height = 9;
  const auto prism = extrude_prism(fp);
  EXPECT_NEAR(mesh_volume(prism), 6 * 4 * 9, 1e-9);

  ViewParams view;
  view.width = view.height = 64;
  const auto img = render_scaffold(prism, view);
  EXPECT_EQ(img.width(), 64);
  EXPECT_EQ(img, render_scaffold(prism, view));
  int covered = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) covered += img.at(x, y) != view.background;
  EXPECT_GT(covered, 64 * 64 / 10);
  // The frame margin stays empty.
  for (int x = 0; x < 64; ++x) EXPECT_EQ(img.at(x, 0), view.background);
}

}  // namespace
}  // namespace urbangen::mesh
