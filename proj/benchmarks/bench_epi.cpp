#include <benchmark/benchmark.h>

#include "posekit/epi.hpp"
#include "posekit/synthetic.hpp"

using namespace posekit;

static void BM_Realign(benchmark::State& state) {
  StickFigureOptions o;
  o.frames = static_cast<std::size_t>(state.range(0));
  o.jitter = 0.2;
  const PoseSequence driving = make_stick_figure(o);
  const SyntheticPool pool = make_anchor_pool(1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(realign(driving, pool.anchors[0], EpiConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Realign)->Arg(16)->Arg(128);

static void BM_EpiTransform(benchmark::State& state) {
  StickFigureOptions o;
  o.hands = true;
  o.face = true;
  const PoseSequence driving = make_stick_figure(o);
  const AnchorPool pool(make_anchor_pool(32, 3).anchors);
  EpiConfig cfg;
  cfg.lambda = 1.0;
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(epi_transform(driving, pool, cfg, rng));
}
BENCHMARK(BM_EpiTransform);
