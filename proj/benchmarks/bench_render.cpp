#include <benchmark/benchmark.h>

#include "posekit/render.hpp"
#include "posekit/synthetic.hpp"

using namespace posekit;

static void BM_RenderFrame(benchmark::State& state) {
  StickFigureOptions o;
  o.frames = 1;
  o.hands = state.range(0) != 0;
  o.face = state.range(0) != 0;
  const PoseFrame f = make_stick_figure(o).frames[0];
  const CanvasSpec c;
  for (auto _ : state) benchmark::DoNotOptimize(render_frame(f, c));
}
BENCHMARK(BM_RenderFrame)->Arg(0)->Arg(1);

static void BM_EncodePpm(benchmark::State& state) {
  const ImageBuffer img(512, 512, {1, 2, 3});
  for (auto _ : state) benchmark::DoNotOptimize(encode_ppm(img));
}
BENCHMARK(BM_EncodePpm);
