#include <benchmark/benchmark.h>

#include <fmt/format.h>

#include "test_support.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/run/pipeline.hpp"

namespace {

namespace ut = urbangen::testing;
using namespace urbangen;

// End-to-end run with mock tools over a synthetic block of n buildings.
void BM_PipelineMock(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  ut::TempDir dir("bench_pipeline");
  const auto block = ut::synthetic_block(n);
  const auto osm = dir / "block.osm";
  write_file_atomic(osm, block.osm_xml);
  int rep = 0;
  for (auto _ : state) {
    auto cfg = ut::block_config(dir / fmt::format("run{}", rep++));
    cfg.bbox = block.bbox;
    cfg.paths.osm_file = osm;
    cfg.pipeline.parallelism = 1;
    run::Pipeline p(cfg);
    const auto s = p.run();
    if (s.done != static_cast<std::size_t>(n)) state.SkipWithError("pipeline did not finish every building");
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PipelineMock)->Arg(10)->Arg(30)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
