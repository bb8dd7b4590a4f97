#include <benchmark/benchmark.h>

#include "posekit/synthetic.hpp"
#include "posekit/trainsim.hpp"

using namespace posekit;

static void BM_TrainStep(benchmark::State& state) {
  SimConfig cfg;
  cfg.seed = 1;
  const AnchorPool pool(make_anchor_pool(8, 1).anchors);
  SimState sim = make_state(cfg, 1);
  const Task task = state.range(0) ? Task::kTi2v : Task::kAnimation;
  Rng rng(2);
  const SimBatch batch = make_batch(cfg, rng);
  const ConditionDraw draw = draw_condition(task, batch, cfg, &pool, rng);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(sim, batch, draw));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1);
