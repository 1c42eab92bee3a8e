#include "urbangen/mesh/mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"

namespace urbangen::mesh {

void Mesh::validate() const {
  const auto n = static_cast<std::uint32_t>(vertices.size());
  for (const auto& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw Error(ErrorCode::kData, "mesh has a non-finite vertex");
    }
  }
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    if (f[0] >= n || f[1] >= n || f[2] >= n) throw Error(ErrorCode::kData, fmt::format("face {} index out of range", i));
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw Error(ErrorCode::kData, fmt::format("face {} is degenerate (repeated index)", i));
    }
  }
  if (!uvs.empty() && uvs.size() != vertices.size()) throw Error(ErrorCode::kData, "uv count differs from vertex count");
}

Bounds3 bounds(const Mesh& mesh) {
  Bounds3 b{{1e300, 1e300, 1e300}, {-1e300, -1e300, -1e300}};
  for (const auto& v : mesh.vertices) {
    b.min = {std::min(b.min.x, v.x), std::min(b.min.y, v.y), std::min(b.min.z, v.z)};
    b.max = {std::max(b.max.x, v.x), std::max(b.max.y, v.y), std::max(b.max.z, v.z)};
  }
  return b;
}

Bounds3 bounds(const Mesh& mesh, std::span<const std::uint32_t> faces) {
  Bounds3 b{{1e300, 1e300, 1e300}, {-1e300, -1e300, -1e300}};
  for (auto fi : faces) {
    for (auto vi : mesh.faces[fi]) {
      const Vec3& v = mesh.vertices[vi];
      b.min = {std::min(b.min.x, v.x), std::min(b.min.y, v.y), std::min(b.min.z, v.z)};
      b.max = {std::max(b.max.x, v.x), std::max(b.max.y, v.y), std::max(b.max.z, v.z)};
    }
  }
  return b;
}

Vec3 face_normal(const Mesh& mesh, const Face& f) {
  const Vec3 n = cross(mesh.vertices[f[1]] - mesh.vertices[f[0]], mesh.vertices[f[2]] - mesh.vertices[f[0]]);
  const double len = norm(n);
  return len > 0 ? n * (1.0 / len) : Vec3{};
}

double face_area(const Mesh& mesh, const Face& f) {
  return 0.5 * norm(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]], mesh.vertices[f[2]] - mesh.vertices[f[0]]));
}

double surface_area(const Mesh& mesh) {
  double total = 0.0;
  for (const auto& f : mesh.faces) total += face_area(mesh, f);
  return total;
}

Vec3 transform_point(const Vec3& p, double scale, double yaw, const Vec3& translation) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 q = p * scale;
  return {c * q.x - s * q.y + translation.x, s * q.x + c * q.y + translation.y, q.z + translation.z};
}

Mesh transformed(const Mesh& mesh, double scale, double yaw, const Vec3& translation) {
  Mesh out = mesh;
  for (auto& v : out.vertices) v = transform_point(v, scale, yaw, translation);
  return out;
}

Mesh merge(std::span<const Mesh> meshes) {
  Mesh out;
  if (meshes.empty()) return out;
  out.color = meshes.front().color;
  out.texture = meshes.front().texture;
  const bool with_uv = std::all_of(meshes.begin(), meshes.end(), [](const Mesh& m) { return !m.uvs.empty(); });
  for (const auto& m : meshes) {
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
    if (with_uv) out.uvs.insert(out.uvs.end(), m.uvs.begin(), m.uvs.end());
    for (const auto& f : m.faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  if (!with_uv) out.texture.reset();
  return out;
}

Mesh filter_faces(const Mesh& mesh, const std::vector<bool>& keep) {
  Mesh out;
  out.color = mesh.color;
  out.texture = mesh.texture;
  // Surviving vertices keep their relative order.
  std::vector<bool> used(mesh.vertices.size(), false);
  for (std::size_t i = 0; i < mesh.faces.size(); ++i)
    if (keep[i])
      for (auto vi : mesh.faces[i]) used[vi] = true;
  std::vector<std::uint32_t> remap(mesh.vertices.size(), 0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!used[v]) continue;
    remap[v] = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[v]);
    if (!mesh.uvs.empty()) out.uvs.push_back(mesh.uvs[v]);
  }
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    if (!keep[i]) continue;
    const auto& f = mesh.faces[i];
    out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return out;
}

bool is_watertight(const Mesh& mesh) {
  if (mesh.faces.empty()) return false;
  // directed edge -> count
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    auto twin = directed.find({edge.second, edge.first});
    if (twin == directed.end() || twin->second != 1) return false;
  }
  return true;
}

double mesh_volume(const Mesh& mesh) {
  if (!is_watertight(mesh)) throw Error(ErrorCode::kNotClosed, "mesh is not watertight");
  // Shift to the first vertex to reduce cancellation for meshes far from the origin.
  const Vec3 o = mesh.vertices.front();
  double six_v = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3 a = mesh.vertices[f[0]] - o, b = mesh.vertices[f[1]] - o, c = mesh.vertices[f[2]] - o;
    six_v += dot(a, cross(b, c));
  }
  return std::abs(six_v) / 6.0;
}

std::vector<std::uint32_t> face_components(const Mesh& mesh, std::uint32_t* count) {
  std::vector<std::uint32_t> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& f : mesh.faces) {
    const auto a = find(f[0]);
    parent[find(f[1])] = a;
    parent[find(f[2])] = a;
  }
  std::map<std::uint32_t, std::uint32_t> dense;
  std::vector<std::uint32_t> labels(mesh.faces.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto root = find(mesh.faces[i][0]);
    auto [it, inserted] = dense.try_emplace(root, static_cast<std::uint32_t>(dense.size()));
    labels[i] = it->second;
  }
  if (count) *count = static_cast<std::uint32_t>(dense.size());
  return labels;
}

std::vector<Face> triangulate(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) throw Error(ErrorCode::kTriangulation, "ring has fewer than 3 vertices");
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  if (polygon::signed_area(ring) < 0) std::reverse(idx.begin(), idx.end());

  const double scale = [&] {
    const Rect r = polygon::bounds(ring);
    return std::max({r.max.x - r.min.x, r.max.y - r.min.y, 1e-9});
  }();
  const double eps = 1e-12 * scale * scale;

  auto point_in_tri = [](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
    return d1 >= 0 && d2 >= 0 && d3 >= 0;
  };

  std::vector<Face> out;
  out.reserve(n - 2);
  while (idx.size() > 3) {
    const std::size_t m = idx.size();
    bool clipped = false;
    for (std::size_t i = 0; i < m; ++i) {
      const auto ip = idx[(i + m - 1) % m], ic = idx[i], in = idx[(i + 1) % m];
      const Vec2 &a = ring[ip], &b = ring[ic], &c = ring[in];
      if (cross(b - a, c - b) <= eps) continue;  // reflex or collinear
      bool blocked = false;
      for (std::size_t j = 0; j < m && !blocked; ++j) {
        const auto q = idx[j];
        if (q == ip || q == ic || q == in) continue;
        const Vec2& p = ring[q];
        if (p == a || p == b || p == c) continue;
        blocked = point_in_tri(p, a, b, c);
      }
      if (blocked) continue;
      out.push_back({ip, ic, in});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (clipped) continue;
    // Drop a collinear vertex if one exists; otherwise the ring is not simple.
    bool dropped = false;
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2 &a = ring[idx[(i + m - 1) % m]], &b = ring[idx[i]], &c = ring[idx[(i + 1) % m]];
      if (std::abs(cross(b - a, c - b)) <= eps) {
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
        dropped = true;
        break;
      }
    }
    if (!dropped) throw Error(ErrorCode::kTriangulation, "no ear found; polygon is not simple");
  }
  const Vec2 &a = ring[idx[0]], &b = ring[idx[1]], &c = ring[idx[2]];
  if (std::abs(cross(b - a, c - b)) > eps) out.push_back({idx[0], idx[1], idx[2]});
  if (out.empty()) throw Error(ErrorCode::kTriangulation, "polygon has zero area");
  return out;
}

Mesh extrude_ring(std::span<const Vec2> ring_in, double z0, double z1) {
  std::vector<Vec2> ring(ring_in.begin(), ring_in.end());
  polygon::make_ccw(ring);
  const auto n = static_cast<std::uint32_t>(ring.size());
  const auto caps = triangulate(ring);
  Mesh m;
  m.vertices.reserve(2 * n);
  for (const auto& p : ring) m.vertices.push_back({p.x, p.y, z0});
  for (const auto& p : ring) m.vertices.push_back({p.x, p.y, z1});
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    m.faces.push_back({i, j, n + j});
    m.faces.push_back({i, n + j, n + i});
  }
  for (const auto& f : caps) {
    m.faces.push_back({n + f[0], n + f[1], n + f[2]});
    m.faces.push_back({f[0], f[2], f[1]});
  }
  return m;
}

}  // namespace urbangen::mesh
