#include <gtest/gtest.h>

#include <json.hpp>

#include "posekit/autograd.hpp"
#include "posekit/error.hpp"
#include "posekit/grad_check.hpp"
#include "posekit/ipi.hpp"
#include "posekit/rng.hpp"
#include "posekit/synthetic.hpp"

using namespace posekit;

TEST(GradCheck, LinearProbeIsExact) {
  Rng rng(4);
  Matrix a = Matrix::random_normal(5, 3, rng, 1.0);
  Matrix bias = Matrix::random_normal(1, 3, rng, 1.0);
  const Matrix x = Matrix::random_normal(4, 5, rng, 1.0);
  const Matrix c = Matrix::random_normal(4, 3, rng, 1.0);
  const std::vector<ParamRef> refs{{"a", &a}, {"bias", &bias}};
  auto loss = [&](Tape& tape, std::span<const Var> v) {
    const Var y = ops::add_row(ops::matmul(tape.constant(x), v[0]), v[1]);
    return ops::matmul(ops::mean_rows(ops::mul(y, tape.constant(c))), tape.constant(Matrix(3, 1, 1.0)));
  };
  const GradCheckReport r = grad_check(refs, loss);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.max_rel_error, 1e-9);
  ASSERT_EQ(r.blocks.size(), 2u);
  EXPECT_EQ(r.blocks[0].checked, 15u);
}

TEST(GradCheck, DetectsWrongGradient) {
  Matrix a(2, 2, 0.5);
  const std::vector<ParamRef> refs{{"a", &a}};
  auto loss = [](Tape& tape, std::span<const Var> v) {
    const Var a = v[0];
    const Var y = tape.record(a.value(), {a}, [a](Tape& t, std::size_t self) {
      Matrix g = t.grad(self);
      for (double& x : g.values()) x *= 1.5;
      t.accumulate(a.id, g);
    });
    return ops::sum_squares(y);
  };
  const GradCheckReport r = grad_check(refs, loss);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_rel_error, 1.0 / 3.0, 1e-6);
}

TEST(GradCheck, NonFiniteGradientNamesBlock) {
  Matrix a(1, 3, 1.0);
  const std::vector<ParamRef> refs{{"encoder.0.w_q", &a}};
  auto loss = [](Tape& tape, std::span<const Var> v) {
    const Var a = v[0];
    const Var y = tape.record(a.value(), {a}, [a](Tape& t, std::size_t) {
      t.accumulate(a.id, Matrix(1, 3, std::nan("")));
    });
    return ops::sum_squares(y);
  };
  try {
    grad_check(refs, loss);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.0.w_q"), std::string::npos);
  }
}

TEST(GradCheck, ZeroModelHasZeroGradients) {
  const IpiConfig cfg;
  IpiParams params = IpiParams::zeros(cfg);
  PoseSequence pose = make_stick_figure(StickFigureOptions{});
  for (auto& f : pose.frames) {
    for (auto& k : f.body) k = {};
  }
  const Matrix clip(16, cfg.d_model);
  GradCheckOptions opts;
  opts.max_entries_per_block = 8;
  const GradCheckReport r = ipi_grad_check(params, cfg, clip, pose, opts);
  EXPECT_TRUE(r.passed);
  for (const BlockGradReport& b : r.blocks) EXPECT_EQ(b.analytic_norm, 0.0) << b.name;
}

TEST(GradCheck, FullDefaultConfig) {
  const IpiConfig cfg;
  IpiParams params = IpiParams::init(cfg, 5);
  StickFigureOptions fig;
  fig.frames = 8;
  const PoseSequence pose = make_stick_figure(fig);
  const Matrix clip = synthetic_clip_features(pose, 16, cfg.d_model, 6);
  GradCheckOptions opts;
  opts.max_entries_per_block = 16;
  const GradCheckReport r = ipi_grad_check(params, cfg, clip, pose, opts);
  EXPECT_LE(r.max_rel_error, 1e-4);
  EXPECT_EQ(r.blocks.size(), params.blocks().size());
  const auto doc = nlohmann::json::parse(grad_check_json(r));
  EXPECT_EQ(doc["passed"], true);
  EXPECT_EQ(doc["blocks"].size(), r.blocks.size());
  EXPECT_DOUBLE_EQ(doc["max_rel_error"].get<double>(), r.max_rel_error);
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1.0, 0.5), 0.5);
}
