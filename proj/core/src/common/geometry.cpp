#include "urbangen/common/geometry.hpp"

#include <algorithm>

#include "urbangen/common/error.hpp"

namespace urbangen {

namespace polygon {

double signed_area(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

Vec2 centroid(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) throw Error(ErrorCode::kDegenerate, "centroid of fewer than 3 vertices");
  // Shift to the first vertex for numerical stability far from the origin.
  const Vec2 o = ring[0];
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = ring[i] - o;
    const Vec2 q = ring[(i + 1) % n] - o;
    const double c = p.x * q.y - q.x * p.y;
    a2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a2) < 2e-12) throw Error(ErrorCode::kDegenerate, "centroid of zero-area polygon");
  return {o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

bool contains(std::span<const Vec2> ring, const Vec2& p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool is_simple(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  // Adjacent edges folding back onto each other also count as self-intersection.
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = ring[(i + n - 1) % n];
    const Vec2& cur = ring[i];
    const Vec2& next = ring[(i + 1) % n];
    const Vec2 d1 = cur - prev, d2 = next - cur;
    if (std::abs(cross(d1, d2)) < 1e-12 * norm(d1) * norm(d2) && dot(d1, d2) < 0) return false;
  }
  return true;
}

std::vector<Vec2> normalize_ring(std::span<const Vec2> ring, double eps) {
  std::vector<Vec2> out;
  out.reserve(ring.size());
  for (const Vec2& p : ring) {
    if (!out.empty() && distance(out.back(), p) <= eps) continue;
    out.push_back(p);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= eps) out.pop_back();
  return out;
}

void make_ccw(std::vector<Vec2>& ring) {
  if (signed_area(ring) < 0) std::reverse(ring.begin(), ring.end());
}

Rect bounds(std::span<const Vec2> ring) {
  Rect r{{1e300, 1e300}, {-1e300, -1e300}};
  for (const Vec2& p : ring) {
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
  }
  return r;
}

std::vector<Vec2> clip_to_rect(std::span<const Vec2> ring, const Rect& rect) {
  std::vector<Vec2> poly(ring.begin(), ring.end());
  // Each clip edge: inside test and intersection against a vertical/horizontal line.
  auto clip = [&](auto inside, auto intersect) {
    std::vector<Vec2> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& cur = poly[i];
      const Vec2& prev = poly[(i + n - 1) % n];
      const bool ci = inside(cur), pi = inside(prev);
      if (ci) {
        if (!pi) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (pi) {
        out.push_back(intersect(prev, cur));
      }
    }
    poly = std::move(out);
  };
  auto at_x = [](double x) {
    return [x](const Vec2& a, const Vec2& b) {
      const double t = (x - a.x) / (b.x - a.x);
      return Vec2{x, a.y + t * (b.y - a.y)};
    };
  };
  auto at_y = [](double y) {
    return [y](const Vec2& a, const Vec2& b) {
      const double t = (y - a.y) / (b.y - a.y);
      return Vec2{a.x + t * (b.x - a.x), y};
    };
  };
  clip([&](const Vec2& p) { return p.x >= rect.min.x; }, at_x(rect.min.x));
  if (!poly.empty()) clip([&](const Vec2& p) { return p.x <= rect.max.x; }, at_x(rect.max.x));
  if (!poly.empty()) clip([&](const Vec2& p) { return p.y >= rect.min.y; }, at_y(rect.min.y));
  if (!poly.empty()) clip([&](const Vec2& p) { return p.y <= rect.max.y; }, at_y(rect.max.y));
  return normalize_ring(poly);
}

}  // namespace polygon

namespace polyline {

double length(std::span<const Vec2> line) {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) total += distance(line[i - 1], line[i]);
  return total;
}

double distance_to(std::span<const Vec2> line, const Vec2& p) {
  if (line.size() == 1) return distance(line[0], p);
  double best = 1e300;
  for (std::size_t i = 1; i < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i - 1], line[i]));
  }
  return best;
}

Sample at(std::span<const Vec2> line, double s) {
  s = std::max(0.0, s);
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 d = line[i] - line[i - 1];
    const double len = norm(d);
    if (len <= 0.0) continue;
    const bool last = (i + 1 == line.size());
    if (s < len || last) {
      const double t = std::min(s, len);
      return {line[i - 1] + d * (t / len), d / len, i - 1};
    }
    s -= len;
  }
  throw Error(ErrorCode::kDegenerate, "arc-length sample on zero-length polyline");
}

std::vector<std::vector<Vec2>> clip_to_rect(std::span<const Vec2> line, const Rect& rect) {
  std::vector<std::vector<Vec2>> pieces;
  std::vector<Vec2> current;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1], b = line[i];
    const Vec2 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    bool visible = true;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x - rect.min.x, rect.max.x - a.x, a.y - rect.min.y, rect.max.y - a.y};
    for (int k = 0; k < 4 && visible; ++k) {
      if (p[k] == 0.0) {
        if (q[k] < 0.0) visible = false;
      } else {
        const double r = q[k] / p[k];
        if (p[k] < 0.0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) visible = false;
      }
    }
    if (!visible) {
      if (current.size() >= 2) pieces.push_back(std::move(current));
      current.clear();
      continue;
    }
    const Vec2 ca = a + d * t0, cb = a + d * t1;
    if (current.empty() || distance(current.back(), ca) > 1e-9) {
      if (current.size() >= 2) pieces.push_back(std::move(current));
      current.clear();
      current.push_back(ca);
    }
    if (distance(current.back(), cb) > 1e-9) current.push_back(cb);
    if (t1 < 1.0) {
      if (current.size() >= 2) pieces.push_back(std::move(current));
      current.clear();
    }
  }
  if (current.size() >= 2) pieces.push_back(std::move(current));
  return pieces;
}

}  // namespace polyline

Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return a + d * t;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return distance(p, closest_point_on_segment(p, a, b));
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = cross(q - p, r - p);
    const double scale = std::max({std::abs(q.x - p.x), std::abs(q.y - p.y), std::abs(r.x - p.x),
                                   std::abs(r.y - p.y), 1.0});
    if (std::abs(v) <= 1e-12 * scale * scale) return 0;
    return v > 0 ? 1 : -1;
  };
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, r.x) - 1e-12 <= q.x && q.x <= std::max(p.x, r.x) + 1e-12 &&
           std::min(p.y, r.y) - 1e-12 <= q.y && q.y <= std::max(p.y, r.y) + 1e-12;
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(a, c, b)) return true;
  if (o2 == 0 && on_segment(a, d, b)) return true;
  if (o3 == 0 && on_segment(c, a, d)) return true;
  if (o4 == 0 && on_segment(c, b, d)) return true;
  return o1 * o2 < 0 && o3 * o4 < 0;
}

double normalize_angle(double radians) {
  constexpr double kTwoPi = 2.0 * kPi;
  double r = std::fmod(radians, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace urbangen
