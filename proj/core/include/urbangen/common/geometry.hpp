#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace urbangen {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
// Left-hand unit normal of a direction (rotated +90 degrees).
inline Vec2 left_normal(const Vec2& d) {
  const double n = norm(d);
  return {-d.y / n, d.x / n};
}
inline Vec2 rotate(const Vec2& p, double radians) {
  const double c = std::cos(radians), s = std::sin(radians);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3&) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Axis-aligned rectangle in local metric coordinates.
struct Rect {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  Rect expanded(double margin) const {
    return {{min.x - margin, min.y - margin}, {max.x + margin, max.y + margin}};
  }
};

// Polygon helpers. Rings are stored open (no repeated closing vertex).
namespace polygon {

double signed_area(std::span<const Vec2> ring);
// Area centroid; throws Degenerate when |area| < 1e-12.
Vec2 centroid(std::span<const Vec2> ring);
bool contains(std::span<const Vec2> ring, const Vec2& p);
// True when no two non-adjacent edges touch or cross.
bool is_simple(std::span<const Vec2> ring);
// Drops consecutive duplicates and a repeated closing vertex.
std::vector<Vec2> normalize_ring(std::span<const Vec2> ring, double eps = 1e-9);
void make_ccw(std::vector<Vec2>& ring);
Rect bounds(std::span<const Vec2> ring);
// Sutherland-Hodgman clip against an axis-aligned rectangle.
std::vector<Vec2> clip_to_rect(std::span<const Vec2> ring, const Rect& rect);

}  // namespace polygon

namespace polyline {

double length(std::span<const Vec2> line);
double distance_to(std::span<const Vec2> line, const Vec2& p);
// Point and unit tangent at arc-length s (clamped to [0, length]).
struct Sample {
  Vec2 point;
  Vec2 tangent;
  std::size_t segment = 0;
};
Sample at(std::span<const Vec2> line, double s);
// Pieces of `line` inside `rect` (Liang-Barsky per segment).
std::vector<std::vector<Vec2>> clip_to_rect(std::span<const Vec2> line, const Rect& rect);

}  // namespace polyline

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b);
// Proper or touching intersection of closed segments ab and cd.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Wraps an angle to [0, 2*pi).
double normalize_angle(double radians);
constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace urbangen
