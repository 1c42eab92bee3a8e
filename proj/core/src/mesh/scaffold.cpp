#include "urbangen/mesh/scaffold.hpp"

#include <algorithm>
#include <limits>

#include "urbangen/common/error.hpp"

namespace urbangen::mesh {

Mesh extrude_prism(const geodata::BuildingFootprint& footprint) {
  if (footprint.polygon.size() < 3 || !(footprint.height > 0.0)) {
    throw Error(ErrorCode::kPrecondition, "footprint " + footprint.id + " is not a valid prism base");
  }
  return extrude_ring(footprint.polygon, 0.0, footprint.height);
}

namespace {

struct Camera {
  Vec3 right, up, toward;  // toward: unit vector from the target to the eye
  double scale = 1.0;
  double cx = 0.0, cy = 0.0;  // projected centre
  int width = 0, height = 0;

  // Screen x right, y down, depth grows towards the camera.
  Vec3 project(const Vec3& p) const {
    return {(dot(p, right) - cx) * scale + width * 0.5, height * 0.5 - (dot(p, up) - cy) * scale, dot(p, toward)};
  }
};

Camera fit_camera(std::span<const Mesh> meshes, const ViewParams& view) {
  Camera cam;
  const double el = deg2rad(view.elevation_deg), az = deg2rad(view.azimuth_deg);
  cam.toward = {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  const Vec3 fwd = cam.toward * -1.0;
  cam.right = cross(fwd, Vec3{0, 0, 1});
  cam.right = cam.right * (1.0 / norm(cam.right));
  cam.up = cross(cam.right, fwd);
  cam.width = view.width;
  cam.height = view.height;

  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  if (view.frame) {
    const auto& b = *view.frame;
    for (int k = 0; k < 8; ++k) {
      const Vec3 p{k & 1 ? b.max.x : b.min.x, k & 2 ? b.max.y : b.min.y, k & 4 ? b.max.z : b.min.z};
      const double px = dot(p, cam.right), py = dot(p, cam.up);
      x0 = std::min(x0, px), x1 = std::max(x1, px), y0 = std::min(y0, py), y1 = std::max(y1, py);
    }
  }
  for (const auto& m : meshes) {
    if (view.frame) break;
    for (const auto& f : m.faces) {
      for (auto vi : f) {
        const double px = dot(m.vertices[vi], cam.right), py = dot(m.vertices[vi], cam.up);
        x0 = std::min(x0, px), x1 = std::max(x1, px), y0 = std::min(y0, py), y1 = std::max(y1, py);
      }
    }
  }
  if (x0 > x1) return cam;
  const double usable = 1.0 - 2.0 * view.margin;
  const double sx = view.width * usable / std::max(x1 - x0, 1e-9);
  const double sy = view.height * usable / std::max(y1 - y0, 1e-9);
  cam.scale = std::min(sx, sy);
  cam.cx = 0.5 * (x0 + x1);
  cam.cy = 0.5 * (y0 + y1);
  return cam;
}

const Vec3 kLight = [] {
  const Vec3 l{-0.35, -0.55, 0.76};
  return l * (1.0 / norm(l));
}();

}  // namespace

RgbImage render_meshes(std::span<const Mesh> meshes, const ViewParams& view) {
  if (view.width <= 0 || view.height <= 0) throw Error(ErrorCode::kPrecondition, "render size must be positive");
  RgbImage img(view.width, view.height, view.background);
  std::vector<double> depth(static_cast<std::size_t>(view.width) * view.height,
                            -std::numeric_limits<double>::infinity());
  const Camera cam = fit_camera(meshes, view);

  for (const auto& m : meshes) {
    const bool textured = m.texture && !m.texture->empty() && m.uvs.size() == m.vertices.size();
    std::vector<Vec3> screen(m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) screen[i] = cam.project(m.vertices[i]);

    for (const auto& f : m.faces) {
      Vec3 n = face_normal(m, f);
      if (dot(n, cam.toward) < 0) n = n * -1.0;  // two-sided lighting
      const double shade = 0.35 + 0.65 * std::max(0.0, dot(n, kLight));

      const Vec3 &a = screen[f[0]], &b = screen[f[1]], &c = screen[f[2]];
      const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
      if (std::abs(area) < 1e-12) continue;
      const int xmin = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
      const int xmax = std::min(view.width - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
      const int ymin = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
      const int ymax = std::min(view.height - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
      for (int y = ymin; y <= ymax; ++y) {
        for (int x = xmin; x <= xmax; ++x) {
          const double px = x + 0.5, py = y + 0.5;
          double w0 = (b.x - px) * (c.y - py) - (b.y - py) * (c.x - px);
          double w1 = (c.x - px) * (a.y - py) - (c.y - py) * (a.x - px);
          double w2 = (a.x - px) * (b.y - py) - (a.y - py) * (b.x - px);
          if (area < 0) w0 = -w0, w1 = -w1, w2 = -w2;
          if (w0 < 0 || w1 < 0 || w2 < 0) continue;
          const double inv = 1.0 / std::abs(area);
          w0 *= inv, w1 *= inv, w2 *= inv;
          const double z = w0 * a.z + w1 * b.z + w2 * c.z;
          double& slot = depth[static_cast<std::size_t>(y) * view.width + x];
          if (z <= slot) continue;
          slot = z;
          Rgb base = m.color;
          if (textured) {
            const Vec2 uv = m.uvs[f[0]] * w0 + m.uvs[f[1]] * w1 + m.uvs[f[2]] * w2;
            const auto& tex = *m.texture;
            const int tx = std::clamp(static_cast<int>(uv.x * tex.width()), 0, tex.width() - 1);
            const int ty = std::clamp(static_cast<int>(uv.y * tex.height()), 0, tex.height() - 1);
            base = tex.at(tx, ty);
          }
          Rgb out;
          for (int k = 0; k < 3; ++k) out[k] = static_cast<std::uint8_t>(std::lround(std::min(255.0, base[k] * shade)));
          img.set(x, y, out);
        }
      }
    }
  }
  return img;
}

RgbImage render_scaffold(const Mesh& mesh, const ViewParams& view) {
  return render_meshes(std::span<const Mesh>(&mesh, 1), view);
}

}  // namespace urbangen::mesh
