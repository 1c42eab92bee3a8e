#include "urbangen/mesh/cleanup.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace urbangen::mesh {

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

Mesh remove_ground_plane(const Mesh& mesh, const GroundPlaneParams& params, Diagnostics& diag) {
  if (mesh.empty()) return mesh;
  const Bounds3 b = bounds(mesh);
  const double band_top = b.min.z + params.height_band * (b.max.z - b.min.z) + 1e-9;
  const double cos_cone = std::cos(deg2rad(params.normal_cone_deg));
  const std::size_t nf = mesh.faces.size();

  auto in_band = [&](const Face& f) {
    return mesh.vertices[f[0]].z <= band_top && mesh.vertices[f[1]].z <= band_top && mesh.vertices[f[2]].z <= band_top;
  };

  std::vector<bool> candidate(nf, false);
  double total_area = 0.0;
  std::vector<double> area(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    area[i] = face_area(mesh, mesh.faces[i]);
    total_area += area[i];
    const Vec3 n = face_normal(mesh, mesh.faces[i]);
    candidate[i] = std::abs(n.z) >= cos_cone && in_band(mesh.faces[i]);
  }
  if (total_area <= 0) return mesh;

  // Candidate clusters through shared vertices.
  UnionFind uf(mesh.vertices.size());
  for (std::size_t i = 0; i < nf; ++i) {
    if (!candidate[i]) continue;
    uf.unite(mesh.faces[i][0], mesh.faces[i][1]);
    uf.unite(mesh.faces[i][0], mesh.faces[i][2]);
  }
  std::vector<double> cluster_area(mesh.vertices.size(), 0.0);
  for (std::size_t i = 0; i < nf; ++i) {
    if (candidate[i]) cluster_area[uf.find(mesh.faces[i][0])] += area[i];
  }
  std::vector<bool> remove(nf, false);
  std::vector<bool> touched(mesh.vertices.size(), false);
  bool any = false;
  for (std::size_t i = 0; i < nf; ++i) {
    if (candidate[i] && cluster_area[uf.find(mesh.faces[i][0])] > params.min_area_fraction * total_area) {
      remove[i] = true;
      any = true;
      for (auto v : mesh.faces[i]) touched[v] = true;
    }
  }
  if (!any) return mesh;

  // Remaining components that lie wholly in the band and touch a removed cluster.
  std::vector<bool> kept(nf);
  for (std::size_t i = 0; i < nf; ++i) kept[i] = !remove[i];
  UnionFind rest(mesh.vertices.size());
  for (std::size_t i = 0; i < nf; ++i) {
    if (!kept[i]) continue;
    rest.unite(mesh.faces[i][0], mesh.faces[i][1]);
    rest.unite(mesh.faces[i][0], mesh.faces[i][2]);
  }
  std::vector<char> comp_in_band(mesh.vertices.size(), 1), comp_touch(mesh.vertices.size(), 0);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!kept[i]) continue;
    const auto r = rest.find(mesh.faces[i][0]);
    if (!in_band(mesh.faces[i])) comp_in_band[r] = 0;
    for (auto v : mesh.faces[i]) {
      if (touched[v]) comp_touch[r] = 1;
    }
  }
  for (std::size_t i = 0; i < nf; ++i) {
    if (!kept[i]) continue;
    const auto r = rest.find(mesh.faces[i][0]);
    if (comp_in_band[r] && comp_touch[r]) remove[i] = true;
  }

  const auto removed = static_cast<std::size_t>(std::count(remove.begin(), remove.end(), true));
  if (static_cast<double>(removed) > params.max_removed_fraction * static_cast<double>(nf)) {
    diag.warn("ground_plane_refused", "",
              fmt::format("ground-plane removal would delete {} of {} faces; mesh left unchanged", removed, nf));
    return mesh;
  }
  std::vector<bool> keep(nf);
  for (std::size_t i = 0; i < nf; ++i) keep[i] = !remove[i];
  return filter_faces(mesh, keep);
}

Mesh remove_ground_plane(const Mesh& mesh, const GroundPlaneParams& params) {
  Diagnostics sink;
  return remove_ground_plane(mesh, params, sink);
}

Mesh remove_outliers(const Mesh& mesh, double min_fraction) {
  if (mesh.empty()) return mesh;
  std::uint32_t count = 0;
  const auto labels = face_components(mesh, &count);
  if (count <= 1) return mesh;
  std::vector<std::vector<std::uint32_t>> members(count);
  for (std::uint32_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::vector<double> volume(count);
  std::uint32_t largest = 0;
  for (std::uint32_t c = 0; c < count; ++c) {
    volume[c] = bounds(mesh, members[c]).volume();
    const bool bigger = volume[c] > volume[largest] ||
                        (volume[c] == volume[largest] && members[c].size() > members[largest].size());
    if (bigger) largest = c;
  }
  std::vector<bool> keep(mesh.faces.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = labels[i];
    keep[i] = c == largest || volume[c] >= min_fraction * volume[largest];
  }
  return filter_faces(mesh, keep);
}

}  // namespace urbangen::mesh
