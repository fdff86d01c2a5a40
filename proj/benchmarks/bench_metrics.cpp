#include <benchmark/benchmark.h>

#include "upscaler/degrade/degrade.hpp"
#include "upscaler/degrade/fixture.hpp"
#include "upscaler/metrics/metrics.hpp"

using namespace upscaler;

namespace {

void BM_Ssim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto a = degrade::synthetic_ground_truth(side, 3);
  const auto b = degrade::gaussian_blur(a, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Psnr(benchmark::State& state) {
  const auto a = degrade::synthetic_ground_truth(1024, 3);
  const auto b = degrade::gaussian_blur(a, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::psnr(a, b));
}
BENCHMARK(BM_Psnr)->Unit(benchmark::kMillisecond);

void BM_Sharpness(benchmark::State& state) {
  const auto a = degrade::synthetic_ground_truth(1024, 3);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::sharpness(a));
}
BENCHMARK(BM_Sharpness)->Unit(benchmark::kMillisecond);

}  // namespace
