#include "urbangen/mesh/footprint.hpp"

#include <algorithm>
#include <numeric>

#include "urbangen/common/error.hpp"

namespace urbangen::mesh {

FootprintRaster::FootprintRaster(double cell, std::int64_t i0, std::int64_t j0, int cols, int rows)
    : cell_(cell), i0_(i0), j0_(j0), cols_(cols), rows_(rows) {
  if (!(cell > 0)) throw Error(ErrorCode::kPrecondition, "raster cell size must be positive");
  if (cols <= 0 || rows <= 0) throw Error(ErrorCode::kPrecondition, "raster must have at least one cell");
  grid_.assign(static_cast<std::size_t>(cols) * rows, 0);
}

bool FootprintRaster::occupied(std::int64_t i, std::int64_t j) const {
  const std::int64_t c = i - i0_, r = j - j0_;
  if (c < 0 || r < 0 || c >= cols_ || r >= rows_) return false;
  return at(static_cast<int>(c), static_cast<int>(r));
}

std::size_t FootprintRaster::count() const {
  return static_cast<std::size_t>(std::count(grid_.begin(), grid_.end(), std::uint8_t{1}));
}

Vec2 FootprintRaster::centroid() const {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      if (!at(c, r)) continue;
      sx += static_cast<double>(i0_ + c) + 0.5;
      sy += static_cast<double>(j0_ + r) + 0.5;
      ++n;
    }
  }
  if (n == 0) return origin();
  return {sx / static_cast<double>(n) * cell_, sy / static_cast<double>(n) * cell_};
}

FootprintRaster rasterize_triangles(std::span<const Triangle2> triangles, double cell) {
  if (!(cell > 0)) throw Error(ErrorCode::kPrecondition, "raster cell size must be positive");
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& t : triangles) {
    for (const auto& p : t) x0 = std::min(x0, p.x), y0 = std::min(y0, p.y), x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
  }
  if (x0 > x1) return FootprintRaster(cell, 0, 0, 1, 1);
  const auto i0 = static_cast<std::int64_t>(std::floor(x0 / cell));
  const auto j0 = static_cast<std::int64_t>(std::floor(y0 / cell));
  const auto i1 = static_cast<std::int64_t>(std::floor(x1 / cell));
  const auto j1 = static_cast<std::int64_t>(std::floor(y1 / cell));
  FootprintRaster raster(cell, i0, j0, static_cast<int>(i1 - i0 + 1), static_cast<int>(j1 - j0 + 1));

  for (const auto& t : triangles) {
    const Vec2 &a = t[0], &b = t[1], &c = t[2];
    double area = cross(b - a, c - a);
    if (std::abs(area) < 1e-12) continue;
    const double sign = area > 0 ? 1.0 : -1.0;
    // Tolerance scaled to the edge so centres on a shared edge count for both faces.
    const double tol = 1e-9 * std::max({norm(b - a), norm(c - b), norm(a - c)});
    // Signed distance to edge k: e = nx * (px - ox) + ny * (py - oy).
    struct Edge {
      double nx, ny, ox, oy;
    };
    auto make_edge = [&](const Vec2& from, const Vec2& to) {
      const Vec2 d = to - from;
      const double len = norm(d);
      return Edge{-sign * d.y / len, sign * d.x / len, from.x, from.y};
    };
    const Edge edges[3] = {make_edge(a, b), make_edge(b, c), make_edge(c, a)};
    auto inside = [&](double px, double py) {
      for (const auto& e : edges)
        if (e.nx * (px - e.ox) + e.ny * (py - e.oy) < -tol) return false;
      return true;
    };
    const double tx0 = std::min({a.x, b.x, c.x}), tx1 = std::max({a.x, b.x, c.x});
    const double ty0 = std::min({a.y, b.y, c.y}), ty1 = std::max({a.y, b.y, c.y});
    const auto ci0 = static_cast<std::int64_t>(std::ceil(tx0 / cell - 0.5));
    const auto ci1 = static_cast<std::int64_t>(std::floor(tx1 / cell - 0.5));
    const auto cj0 = static_cast<std::int64_t>(std::ceil(ty0 / cell - 0.5));
    const auto cj1 = static_cast<std::int64_t>(std::floor(ty1 / cell - 0.5));
    for (auto j = cj0; j <= cj1; ++j) {
      const double py = (static_cast<double>(j) + 0.5) * cell;
      // Analytic span of the row, padded by a cell; the exact test decides the ends.
      double lo = tx0, hi = tx1;
      for (const auto& e : edges) {
        if (std::abs(e.nx) < 1e-12) continue;
        const double x = e.ox - e.ny * (py - e.oy) / e.nx;
        if (e.nx > 0) lo = std::max(lo, x);
        else hi = std::min(hi, x);
      }
      auto i = std::max(ci0, static_cast<std::int64_t>(std::floor(lo / cell - 0.5)) - 1);
      auto k = std::min(ci1, static_cast<std::int64_t>(std::ceil(hi / cell - 0.5)) + 1);
      auto px = [&](std::int64_t n) { return (static_cast<double>(n) + 0.5) * cell; };
      while (i <= k && !inside(px(i), py)) ++i;
      while (k >= i && !inside(px(k), py)) --k;
      // Inside cells of a row are contiguous: the test is an intersection of half-planes.
      for (auto n = i; n <= k; ++n) raster.set(static_cast<int>(n - i0), static_cast<int>(j - j0));
    }
  }
  return raster;
}

FootprintRaster rasterize_polygon(std::span<const Vec2> ring, double cell) {
  std::vector<Vec2> ccw(ring.begin(), ring.end());
  polygon::make_ccw(ccw);
  std::vector<Triangle2> tris;
  for (const auto& f : triangulate(ccw)) tris.push_back({ccw[f[0]], ccw[f[1]], ccw[f[2]]});
  return rasterize_triangles(tris, cell);
}

namespace {

std::vector<Triangle2> projected(const Mesh& mesh, double yaw, const Vec2& pivot, const Vec2& target) {
  std::vector<Vec2> pts(mesh.vertices.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 p{mesh.vertices[i].x, mesh.vertices[i].y};
    pts[i] = rotate(p - pivot, yaw) + target;
  }
  std::vector<Triangle2> tris;
  tris.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) tris.push_back({pts[f[0]], pts[f[1]], pts[f[2]]});
  return tris;
}

}  // namespace

Vec2 footprint_centroid(const Mesh& mesh, double cell) {
  const auto tris = projected(mesh, 0.0, {}, {});
  return rasterize_triangles(tris, cell).centroid();
}

FootprintRaster project_footprint(const Mesh& mesh, double yaw, double cell) {
  if (mesh.empty()) throw Error(ErrorCode::kPrecondition, "cannot project an empty mesh");
  const Vec2 c = footprint_centroid(mesh, cell);
  return rasterize_triangles(projected(mesh, yaw, c, c), cell);
}

FootprintRaster project_footprint_placed(const Mesh& mesh, double yaw, const Vec2& pivot, const Vec2& target,
                                         double cell) {
  if (mesh.empty()) throw Error(ErrorCode::kPrecondition, "cannot project an empty mesh");
  return rasterize_triangles(projected(mesh, yaw, pivot, target), cell);
}

std::size_t overlap_cells(const FootprintRaster& a, const FootprintRaster& b) {
  if (a.cell() != b.cell()) throw Error(ErrorCode::kPrecondition, "rasters use different cell sizes");
  std::size_t n = 0;
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      if (a.at(c, r) && b.occupied(a.i0() + c, a.j0() + r)) ++n;
    }
  }
  return n;
}

double intersection_over_union(const FootprintRaster& a, const FootprintRaster& b) {
  const auto inter = overlap_cells(a, b);
  const auto uni = a.count() + b.count() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace urbangen::mesh
