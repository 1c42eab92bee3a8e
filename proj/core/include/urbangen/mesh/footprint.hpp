#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "urbangen/common/geometry.hpp"
#include "urbangen/mesh/mesh.hpp"

namespace urbangen::mesh {

// Occupancy grid on z=0. Cells are anchored to a global lattice of pitch
// `cell` so rasters built independently can be compared cell by cell. Cell
// (c, r) covers [origin.x + c*cell, +cell) x [origin.y + r*cell, +cell).
class FootprintRaster {
 public:
  FootprintRaster(double cell, std::int64_t i0, std::int64_t j0, int cols, int rows);

  double cell() const { return cell_; }
  Vec2 origin() const { return {static_cast<double>(i0_) * cell_, static_cast<double>(j0_) * cell_}; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }
  std::int64_t i0() const { return i0_; }
  std::int64_t j0() const { return j0_; }

  bool at(int c, int r) const { return grid_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
  void set(int c, int r) { grid_[static_cast<std::size_t>(r) * cols_ + c] = 1; }
  // Lookup by global lattice index; false outside the grid.
  bool occupied(std::int64_t i, std::int64_t j) const;

  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * cell_ * cell_; }
  // Mean of occupied cell centres; origin when the raster is empty.
  Vec2 centroid() const;

 private:
  double cell_;
  std::int64_t i0_, j0_;
  int cols_, rows_;
  std::vector<std::uint8_t> grid_;
};

using Triangle2 = std::array<Vec2, 3>;

// A cell is occupied when its centre lies inside or on the boundary of any
// non-degenerate triangle.
FootprintRaster rasterize_triangles(std::span<const Triangle2> triangles, double cell);
FootprintRaster rasterize_polygon(std::span<const Vec2> ring, double cell);

// Centroid of the yaw-0 footprint raster.
Vec2 footprint_centroid(const Mesh& mesh, double cell = 0.25);

// Rotates the mesh by `yaw` about its footprint centroid and rasterizes the
// projection of every face onto z=0.
FootprintRaster project_footprint(const Mesh& mesh, double yaw, double cell = 0.25);

// Rotates about `pivot`, then moves `pivot` to `target` before rasterizing.
FootprintRaster project_footprint_placed(const Mesh& mesh, double yaw, const Vec2& pivot, const Vec2& target,
                                         double cell = 0.25);

std::size_t overlap_cells(const FootprintRaster& a, const FootprintRaster& b);
double intersection_over_union(const FootprintRaster& a, const FootprintRaster& b);

}  // namespace urbangen::mesh
