#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "test_support.hpp"
#include "urbangen/common/diagnostics.hpp"
#include "urbangen/mesh/footprint.hpp"
#include "urbangen/mesh/mesh.hpp"
#include "urbangen/scenedesign/align.hpp"

namespace {

namespace ut = urbangen::testing;
using namespace urbangen;

// Footprint of a 20 m building, cell size from the argument (cm).
void BM_RasterizePolygon(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto ring = ut::random_star(rng, 8, 12);
  for (auto& p : ring) p = p * 10.0;
  const double cell = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(mesh::rasterize_polygon(ring, cell));
  state.SetLabel(fmt::format("cell {} m", cell));
}
BENCHMARK(BM_RasterizePolygon)->Arg(50)->Arg(25)->Arg(10);

void BM_ProjectFootprint(benchmark::State& state) {
  std::mt19937_64 rng(5);
  auto ring = ut::random_convex(rng, 6, 9);
  for (auto& p : ring) p = p * 12.0;
  const auto prism = mesh::extrude_ring(ring, 0, 15);
  for (auto _ : state) benchmark::DoNotOptimize(mesh::project_footprint(prism, 0.3));
}
BENCHMARK(BM_ProjectFootprint);

// Full 360-step yaw sweep against a rotated L-shaped reference.
void BM_AlignYaw(benchmark::State& state) {
  const std::vector<Vec2> l_shape{{0, 0}, {20, 0}, {20, 8}, {8, 8}, {8, 16}, {0, 16}};
  const auto generated = mesh::extrude_ring(l_shape, 0, 10);
  geodata::BuildingFootprint ref;
  ref.id = "ref";
  ref.height = 10;
  const double yaw = 30.0 * std::numbers::pi / 180.0;
  for (const auto& p : l_shape) ref.polygon.push_back({std::cos(yaw) * p.x - std::sin(yaw) * p.y + 50,
                                                       std::sin(yaw) * p.x + std::cos(yaw) * p.y - 20});
  scenedesign::AlignOptions options;
  options.cell = static_cast<double>(state.range(0)) / 100.0;
  Diagnostics diag;
  for (auto _ : state) benchmark::DoNotOptimize(scenedesign::align_yaw(generated, ref, options, diag));
}
BENCHMARK(BM_AlignYaw)->Arg(50)->Arg(25)->Unit(benchmark::kMillisecond);

}  // namespace
