#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "urbangen/common/geometry.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/evalkit/edges.hpp"
#include "urbangen/geodata/types.hpp"
#include "urbangen/imagery/streetview.hpp"
#include "urbangen/mesh/mesh.hpp"
#include "urbangen/run/config.hpp"

namespace urbangen::testing {

std::filesystem::path fixture(const std::string& name);

// Fresh directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// The checked-in 12-building block (tests/fixtures/block.osm).
geodata::GeoBox block_bbox();
inline constexpr std::size_t kBlockBuildings = 12;
geodata::RegionModel block_region();

// Mock backends everywhere, parallelism 2, seed 7.
run::RunConfig block_config(const std::filesystem::path& artifact_dir);

// Rows of ten rectangular buildings separated by secondary roads; written as
// OSM XML so runs go through the same parser as real extracts.
struct SyntheticBlock {
  std::string osm_xml;
  geodata::GeoBox bbox;
};
SyntheticBlock synthetic_block(int buildings, std::uint64_t seed = 1);

// Returns a deterministic facade-like picture for every capture point.
class SyntheticStreetView : public imagery::StreetViewClient {
 public:
  std::optional<imagery::StreetViewImage> fetch(const imagery::CapturePoint& point) override;
};

// --- oracles ---------------------------------------------------------------

// |A ∩ B| / |A ∪ B| over sets of edge pixel coordinates.
double set_count_edge_iou(const evalkit::EdgeMap& a, const evalkit::EdgeMap& b);

// Area of a convex polygon by uniform sampling of its bounding box.
double monte_carlo_area(const std::vector<Vec2>& convex, std::size_t samples, std::mt19937_64& rng);

// Random convex polygon: sorted random angles on an ellipse.
std::vector<Vec2> random_convex(std::mt19937_64& rng, int min_vertices = 3, int max_vertices = 9);

// Random simple (star-shaped) polygon around the origin, CCW.
std::vector<Vec2> random_star(std::mt19937_64& rng, int min_vertices = 5, int max_vertices = 10);

// Least-squares fit y = a + b x; returns R^2.
double linear_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace urbangen::testing
