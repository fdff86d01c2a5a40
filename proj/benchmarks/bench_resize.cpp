#include <benchmark/benchmark.h>

#include "upscaler/imaging/lanczos.hpp"
#include "upscaler/rng.hpp"

using namespace upscaler;

namespace {

imaging::ImageBuffer noise(int side) {
  Rng rng(1);
  imaging::ImageBuffer img(side, side);
  for (auto& v : img.pixels()) v = static_cast<float>(rng.uniform());
  return img;
}

// 64 -> 1024 is the stage-1 preprocessing case.
void BM_LanczosUpscale(benchmark::State& state) {
  const auto src = noise(static_cast<int>(state.range(0)));
  const imaging::ResampleSpec spec{imaging::Kernel::lanczos, 3, 1024, 1024};
  for (auto _ : state) benchmark::DoNotOptimize(imaging::resize(src, spec));
}
BENCHMARK(BM_LanczosUpscale)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_LanczosDownscale(benchmark::State& state) {
  const auto src = noise(1024);
  const int side = static_cast<int>(state.range(0));
  const imaging::ResampleSpec spec{imaging::Kernel::lanczos, 3, side, side};
  for (auto _ : state) benchmark::DoNotOptimize(imaging::resize(src, spec));
}
BENCHMARK(BM_LanczosDownscale)->Arg(256)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
