#include <gtest/gtest.h>

#include <array>

#include "urbangen/mesh/cleanup.hpp"
#include "urbangen/mesh/mesh.hpp"

namespace urbangen::mesh {
namespace {

Mesh box(double x0, double y0, double x1, double y1, double z0, double z1) {
  const std::vector<Vec2> ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return extrude_ring(ring, z0, z1);
}

TEST(Outliers, SmallFragmentIsRemoved) {
  const auto main = box(0, 0, 10, 10, 0, 10);
  const double side = std::cbrt(5.0);  // 0.5% of the main bounding box
  const auto fragment = box(20, 20, 20 + side, 20 + side, 0, side);
  const std::array<Mesh, 2> parts{main, fragment};
  const auto merged = merge(parts);
  const auto cleaned = remove_outliers(merged);
  EXPECT_EQ(cleaned.faces.size(), main.faces.size());
  EXPECT_EQ(cleaned.vertices, main.vertices);
  EXPECT_EQ(cleaned.faces, main.faces);
  EXPECT_EQ(cleaned.uvs, main.uvs);
  EXPECT_EQ(cleaned.color, main.color);
  EXPECT_EQ(cleaned, main);
}

}  // namespace
}  // namespace urbangen::mesh
