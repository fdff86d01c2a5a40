#include <benchmark/benchmark.h>

#include "upscaler/degrade/degrade.hpp"
#include "upscaler/degrade/fixture.hpp"

using namespace upscaler;

namespace {

void BM_JpegArtifacts(benchmark::State& state) {
  const auto img = degrade::synthetic_ground_truth(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(degrade::jpeg_artifacts(img, 30));
}
BENCHMARK(BM_JpegArtifacts)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_SecondOrderFixture(benchmark::State& state) {
  const auto gt = degrade::synthetic_ground_truth(1024, 5);
  const auto spec = degrade::second_order_spec(5);
  for (auto _ : state) benchmark::DoNotOptimize(degrade::synthesize_fixture(gt, spec));
}
BENCHMARK(BM_SecondOrderFixture)->Unit(benchmark::kMillisecond);

}  // namespace
