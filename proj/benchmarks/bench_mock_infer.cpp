#include <benchmark/benchmark.h>

#include "upscaler/degrade/fixture.hpp"
#include "upscaler/gateway/mock_backend.hpp"
#include "upscaler/imaging/codec.hpp"

using namespace upscaler;

namespace {

// One img2img call at the model resolution, three images as in stage 1.
void BM_MockInfer(benchmark::State& state) {
  gateway::InferenceRequest r;
  r.model_id = "black-forest-labs/FLUX.1-dev";
  r.prompt = "a football player";
  r.image = imaging::save_png(degrade::synthetic_ground_truth(1024, 2));
  r.strength = 0.75;
  r.num_inference_steps = 80;
  r.guidance_scale = 3.5;
  r.num_images = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gateway::mock_infer(r));
}
BENCHMARK(BM_MockInfer)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
