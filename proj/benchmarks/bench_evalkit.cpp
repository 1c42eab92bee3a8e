#include <benchmark/benchmark.h>

#include <random>

#include "urbangen/evalkit/edges.hpp"

namespace {

using namespace urbangen;

// Blocky facade-like picture with some noise.
RgbImage facade(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RgbImage img(size, size, {180, 170, 160});
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool window = (x / 8) % 3 == 1 && (y / 10) % 2 == 1;
      const auto n = static_cast<std::uint8_t>(rng() % 12);
      img.set(x, y, window ? Rgb{static_cast<std::uint8_t>(40 + n), 50, 70} : Rgb{static_cast<std::uint8_t>(180 + n), 170, 160});
    }
  return img;
}

void BM_DetectEdges(benchmark::State& state) {
  const auto img = facade(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(evalkit::detect_edges(img));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_DetectEdges)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EdgeIou(benchmark::State& state) {
  const auto size = static_cast<int>(state.range(0));
  const auto a = evalkit::detect_edges(facade(size, 1));
  const auto b = evalkit::detect_edges(facade(size, 2));
  for (auto _ : state) benchmark::DoNotOptimize(evalkit::edge_iou(a, b));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_EdgeIou)->Arg(256)->Arg(512);

}  // namespace
