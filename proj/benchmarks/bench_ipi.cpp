#include <benchmark/benchmark.h>

#include "posekit/ipi.hpp"
#include "posekit/synthetic.hpp"

using namespace posekit;

static void BM_IpiForward(benchmark::State& state) {
  const IpiConfig cfg;
  const IpiParams params = IpiParams::init(cfg, 1);
  StickFigureOptions o;
  o.frames = static_cast<std::size_t>(state.range(0));
  const PoseSequence pose = make_stick_figure(o);
  const Matrix clip = synthetic_clip_features(pose, 16, cfg.d_model, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ipi_forward(clip, pose, params, cfg));
}
BENCHMARK(BM_IpiForward)->Arg(8)->Arg(32);

static void BM_IpiBackward(benchmark::State& state) {
  const IpiConfig cfg;
  const IpiParams params = IpiParams::init(cfg, 1);
  StickFigureOptions o;
  o.frames = 8;
  const PoseSequence pose = make_stick_figure(o);
  const Matrix clip = synthetic_clip_features(pose, 16, cfg.d_model, 2);
  const Matrix tokens = keypoint_tokens(pose);
  for (auto _ : state) {
    Tape tape;
    const IpiVars vars = IpiVars::bind(tape, params, true);
    tape.backward(ops::sum_squares(ipi_forward(tape, vars, tape.constant(clip), tokens, cfg)));
    benchmark::DoNotOptimize(vars.learnable_query.grad());
  }
}
BENCHMARK(BM_IpiBackward);
