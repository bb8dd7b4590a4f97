#include "criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <cstdio>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "posekit/constants.hpp"
#include "posekit/diffusion.hpp"
#include "posekit/epi.hpp"
#include "posekit/ipi.hpp"
#include "posekit/pose_json.hpp"
#include "posekit/ratio_stats.hpp"
#include "posekit/render.hpp"
#include "posekit/synthetic.hpp"
#include "posekit/trainsim.hpp"
#include "posekit_cli/cli.hpp"

namespace acceptance {
namespace {

using namespace posekit;

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double max_coordinate_diff(const PoseSequence& a, const PoseSequence& b) {
  double d = 0.0;
  auto cmp = [&d](const Keypoint2D& p, const Keypoint2D& q) {
    d = std::max({d, std::fabs(p.x - q.x), std::fabs(p.y - q.y), std::fabs(p.confidence - q.confidence)});
  };
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    for (std::size_t j = 0; j < kJointCount; ++j) cmp(a.frames[f].body[j], b.frames[f].body[j]);
    if (a.frames[f].left_hand) {
      for (std::size_t i = 0; i < kHandKeypointCount; ++i) {
        cmp((*a.frames[f].left_hand)[i], (*b.frames[f].left_hand)[i]);
        cmp((*a.frames[f].right_hand)[i], (*b.frames[f].right_hand)[i]);
      }
    }
    if (a.frames[f].face) {
      for (std::size_t i = 0; i < kFaceKeypointCount; ++i) cmp((*a.frames[f].face)[i], (*b.frames[f].face)[i]);
    }
  }
  return d;
}

/// Largest direction change of a visible, non-degenerate bone.
double max_direction_change(const PoseSequence& before, const PoseSequence& after) {
  double d = 0.0;
  for (std::size_t f = 0; f < before.frames.size(); ++f) {
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      const PoseFrame& x = before.frames[f];
      const PoseFrame& y = after.frames[f];
      if (oracle::bone_length(x, b) < 1e-6 || oracle::bone_length(y, b) < 1e-6) continue;
      const double delta = std::remainder(oracle::bone_angle(y, b) - oracle::bone_angle(x, b), 2.0 * M_PI);
      d = std::max(d, std::fabs(delta));
    }
  }
  return d;
}

/// Joint angles: the angle between every pair of bones meeting at a joint.
std::vector<double> joint_angles(const PoseFrame& f) {
  std::vector<double> out;
  for (std::size_t a = 0; a < kBoneCount; ++a) {
    for (std::size_t b = a + 1; b < kBoneCount; ++b) {
      const bool share = kBones[a].child == kBones[b].parent || kBones[a].parent == kBones[b].parent;
      if (share) out.push_back(std::remainder(oracle::bone_angle(f, b) - oracle::bone_angle(f, a), 2.0 * M_PI));
    }
  }
  return out;
}

double max_joint_angle_delta_change(const PoseSequence& before, const PoseSequence& after) {
  double d = 0.0;
  for (std::size_t f = 0; f + 1 < before.frames.size(); ++f) {
    const auto a0 = joint_angles(before.frames[f]), a1 = joint_angles(before.frames[f + 1]);
    const auto b0 = joint_angles(after.frames[f]), b1 = joint_angles(after.frames[f + 1]);
    for (std::size_t i = 0; i < a0.size(); ++i) {
      const double da = std::remainder(a1[i] - a0[i], 2.0 * M_PI);
      const double db = std::remainder(b1[i] - b0[i], 2.0 * M_PI);
      d = std::max(d, std::fabs(std::remainder(db - da, 2.0 * M_PI)));
    }
  }
  return d;
}

PoseSequence driving_figure(std::uint64_t seed, std::size_t frames, double jitter) {
  StickFigureOptions o;
  o.frames = frames;
  o.jitter = jitter;
  o.hands = true;
  o.face = true;
  o.seed = seed;
  return make_stick_figure(o);
}

SimConfig sim_config() {
  SimConfig cfg;
  cfg.seed = 7;
  return cfg;
}

bool same_blocks(const SimParams& a, const SimParams& b, Partition p) {
  const auto x = a.blocks(p);
  const auto y = b.blocks(p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(*x[i].value == *y[i].value)) return false;
  }
  return true;
}

}  // namespace

Outcome epi_geometry() {
  Outcome o;
  EpiConfig first;
  first.ref_frame_policy = RefFramePolicy::kFirst;
  EpiConfig median;

  double identity = 0.0;
  double direction = 0.0;
  double motion = 0.0;
  double length = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    const PoseSequence seq = driving_figure(s, 12, 0.15);
    identity = std::max(identity, max_coordinate_diff(seq, realign(seq, seq.frames.front(), first)));

    const SyntheticPool pool = make_anchor_pool(4, 100 + s, 0.3, 3.0);
    for (const PoseFrame& anchor : pool.anchors) {
      for (const EpiConfig& cfg : {first, median}) {
        const BoneRatios r = compute_bone_ratios(seq, anchor, cfg);
        const PoseSequence out = realign_with_ratios(seq, anchor, r, cfg);
        direction = std::max(direction, max_direction_change(seq, out));
        motion = std::max(motion, max_joint_angle_delta_change(seq, out));
        for (std::size_t f = 0; f < seq.frames.size(); ++f) {
          for (std::size_t b = 0; b < kBoneCount; ++b) {
            const double before = oracle::bone_length(seq.frames[f], b);
            const double after = oracle::bone_length(out.frames[f], b);
            length = std::max(length, std::fabs(after - r.ratio[b] * before) / std::max(1.0, r.ratio[b] * before));
          }
        }
      }
    }

    RescalePlan plan;
    for (std::size_t g = 0; g < kPartGroupCount; ++g) {
      plan.ops.push_back(ScaleGroup{static_cast<PartGroup>(g), g % 2 ? 2.5 : 0.4});
    }
    const PoseSequence scaled = apply_rescale(seq, plan).sequence;
    direction = std::max(direction, max_direction_change(seq, scaled));
    motion = std::max(motion, max_joint_angle_delta_change(seq, scaled));
  }
  o.expect(identity <= 1e-9, "realign-to-self moved a coordinate by " + fmt("%.3e", identity));
  o.expect(direction <= 1e-9, "bone direction changed by " + fmt("%.3e", direction) + " rad");
  o.expect(motion <= 1e-9, "inter-frame joint-angle delta changed by " + fmt("%.3e", motion) + " rad");
  o.expect(length <= 1e-9, "realigned length deviates from ratio x original by " + fmt("%.3e", length));

  o.expect(median.ratio_min == 0.001 && median.ratio_max == 10.0, "default ratio range is not [0.001, 10]");
  const PoseSequence seq = driving_figure(1, 4, 0.0);
  for (double scale : {1e4, 1e-5}) {
    StickFigureOptions a;
    a.frames = 1;
    a.torso = 110.0 * scale;
    a.neck = {256.0 * scale, 150.0 * scale};
    const BoneRatios r = compute_bone_ratios(seq, make_stick_figure(a).frames.front(), median);
    const double want = scale > 1.0 ? 10.0 : 0.001;
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      o.expect(r.ratio[b] == want, bone_name(b) + " ratio " + fmt("%.17g", r.ratio[b]) + " not clamped to " +
                                       fmt("%g", want));
    }
  }
  std::size_t recorded = 0;
  const SyntheticPool wild = make_anchor_pool(32, 9, 1e-4, 1e4);
  for (const PoseFrame& anchor : wild.anchors) {
    const BoneRatios r = compute_bone_ratios(seq, anchor, median);
    for (double v : r.ratio) {
      ++recorded;
      o.expect(v >= 0.001 && v <= 10.0, "recorded ratio " + fmt("%.17g", v) + " outside [0.001, 10]");
    }
  }
  o.summary = "identity " + fmt("%.1e", identity) + ", direction " + fmt("%.1e", direction) + " rad, motion " +
              fmt("%.1e", motion) + " rad, " + std::to_string(recorded) + " extreme ratios clamped";
  return o;
}

Outcome lambda_contract() {
  Outcome o;
  StickFigureOptions fig;
  fig.frames = 2;
  const PoseSequence seq = make_stick_figure(fig);
  const AnchorPool pool(make_anchor_pool(16, 3).anchors);
  constexpr std::size_t kTrials = 10000;

  auto fraction = [&](double lambda, bool* identity_when_skipped) {
    EpiConfig cfg;
    cfg.lambda = lambda;
    std::size_t applied = 0;
    for (std::size_t i = 0; i < kTrials; ++i) {
      Rng rng(derive_seed(2024, i));
      const EpiResult r = epi_transform(seq, pool, cfg, rng);
      if (r.record.applied) {
        ++applied;
      } else if (identity_when_skipped && !(r.sequence == seq)) {
        *identity_when_skipped = false;
      }
    }
    return static_cast<double>(applied) / kTrials;
  };
  bool identity = true;
  const double f98 = fraction(kDefaultTransformProbability, nullptr);
  const double f0 = fraction(0.0, &identity);
  const double f1 = fraction(1.0, nullptr);
  o.expect(EpiConfig{}.lambda == 0.98, "default lambda is not 0.98");
  o.expect(f98 >= 0.975 && f98 <= 0.985, "lambda 0.98 applied-fraction " + fmt("%.4f", f98));
  o.expect(f0 == 0.0, "lambda 0 applied-fraction " + fmt("%.4f", f0));
  o.expect(identity, "lambda 0 changed the sequence");
  o.expect(f1 == 1.0, "lambda 1 applied-fraction " + fmt("%.4f", f1));
  o.summary = "applied " + fmt("%.4f", f98) + " at 0.98, " + fmt("%.4f", f0) + " at 0, " + fmt("%.4f", f1) + " at 1";
  return o;
}

Outcome statistics_table() {
  Outcome o;
  const SyntheticPool synthetic = make_anchor_pool(24, 11, 0.05, 8.0);
  const AnchorPool pool(synthetic.anchors);
  std::vector<PoseSequence> driving;
  for (std::uint64_t s = 0; s < 3; ++s) {
    StickFigureOptions fig;
    fig.frames = 10;
    fig.torso = 512 * 0.2;
    fig.seed = s;
    driving.push_back(make_stick_figure(fig));
  }
  constexpr std::size_t kTrials = 5;
  Rng rng(17);
  const RatioStatistics stats = ratio_histogram(pool, driving, kTrials, rng, EpiConfig{});

  std::array<std::array<std::uint64_t, 10>, kStatisticsGroupCount> expected{};
  double closest = INFINITY;
  for (std::size_t a = 0; a < synthetic.anchors.size(); ++a) {
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      const auto g = static_cast<std::size_t>(kBones[b].group);
      if (g >= kStatisticsGroupCount) continue;
      const double ratio = synthetic.group_scale[a][g];
      closest = std::min(closest, oracle::distance_to_edge(ratio));
      if (const auto bin = oracle::ratio_bin(ratio)) expected[g][*bin] += kTrials;
    }
  }
  o.expect(closest > 1e-9, "fixture ratio within 1e-9 of a bin edge; pick another seed");
  std::size_t mismatched = 0;
  for (std::size_t g = 0; g < kStatisticsGroupCount; ++g) {
    for (std::size_t i = 0; i < 10; ++i) mismatched += stats.pre_clamp[g].counts()[i] != expected[g][i];
    double sum = 0.0;
    for (double p : stats.pre_clamp[g].proportions()) sum += p;
    o.expect(std::fabs(sum - 100.0) <= 0.01, std::string(group_name(static_cast<PartGroup>(g))) +
                                                 " proportions sum to " + fmt("%.6f", sum));
  }
  o.expect(mismatched == 0, std::to_string(mismatched) + " bin counts differ from the brute-force oracle");

  const std::string table = format_ratio_table(stats);
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);
  for (const char* title : {"Shoulder Length", "Body Length", "Upper Arm Length", "Lower Arm Length",
                            "Upper Leg Length", "Lower Leg Length"}) {
    o.expect(line.find(title) != std::string::npos, std::string("table header lacks ") + title);
  }
  const char* intervals[] = {"[0.001, 0.1)", "[0.1, 0.3)", "[0.3, 0.5)", "[0.5, 0.7)", "[0.7, 1.0)",
                             "[1.0, 1.5)",   "[1.5, 2.0)", "[2.0, 3.0)", "[3.0, 6.0)", "[6.0, 10.0)"};
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind('[', 0) != 0) continue;
    o.expect(rows < 10 && line.rfind(intervals[rows], 0) == 0, "unexpected interval row: " + line);
    const auto bars = static_cast<std::size_t>(std::count(line.begin(), line.end(), '|'));
    o.expect(bars == kStatisticsGroupCount, "interval row without six group columns: " + line);
    ++rows;
  }
  o.expect(rows == 10, "table has " + std::to_string(rows) + " interval rows");
  o.summary = std::to_string(rows) + " intervals x " + std::to_string(kStatisticsGroupCount) +
              " groups, oracle mismatches " + std::to_string(mismatched);
  return o;
}

Outcome ipi_numerics() {
  Outcome o;
  Rng rng(31337);

  double attention_err = 0.0;
  double forward_err = 0.0;
  double row_err = 0.0;
  bool in_unit = true;
  for (std::size_t trial = 0; trial < 40; ++trial) {
    const std::size_t nq = 1 + rng.uniform_index(8);
    const std::size_t nk = 1 + rng.uniform_index(8);
    const std::size_t d = std::array<std::size_t, 3>{4, 8, 16}[rng.uniform_index(3)];
    const std::size_t heads = std::array<std::size_t, 3>{1, 2, 4}[rng.uniform_index(3)];
    Tape tape;
    const Matrix x = Matrix::random_normal(nq, d, rng, 1.0);
    const Matrix ctx = Matrix::random_normal(nk, d, rng, 1.0);
    Matrix w[4];
    for (Matrix& m : w) m = Matrix::random_normal(d, d, rng, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<Matrix> weights;
    const Var out = multi_head_attention(tape.constant(x), tape.constant(ctx), tape.constant(w[0]),
                                         tape.constant(w[1]), tape.constant(w[2]), tape.constant(w[3]), heads,
                                         &weights);
    const oracle::Mat want = oracle::multi_head(oracle::to_mat(x), oracle::to_mat(ctx), oracle::to_mat(w[0]),
                                                oracle::to_mat(w[1]), oracle::to_mat(w[2]), oracle::to_mat(w[3]),
                                                heads);
    attention_err = std::max(attention_err, oracle::max_abs_diff(want, out.value()));

    IpiConfig cfg;
    cfg.d_model = d;
    cfg.n_heads = heads;
    cfg.n_layers = 1 + rng.uniform_index(2);
    cfg.n_learnable_queries = nq;
    const IpiParams params = IpiParams::init(cfg, rng.next_u64());
    StickFigureOptions fig;
    fig.frames = 1 + rng.uniform_index(8);
    fig.jitter = 0.1;
    fig.seed = trial;
    const PoseSequence pose = make_stick_figure(fig);
    const Matrix clip = synthetic_clip_features(pose, nk, d, trial);
    IpiTrace trace;
    const Matrix f_i = ipi_forward(clip, pose, params, cfg, &trace);
    forward_err = std::max(forward_err, oracle::max_abs_diff(oracle::ipi_forward(clip, pose, params, cfg), f_i));

    for (const auto* layers : {&trace.encoder_attention, &trace.extractor_attention}) {
      for (const auto& layer : *layers) {
        for (const Matrix& a : layer) {
          for (std::size_t i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) {
              s += a(i, j);
              in_unit = in_unit && a(i, j) >= 0.0 && a(i, j) <= 1.0;
            }
            row_err = std::max(row_err, std::fabs(s - 1.0));
          }
        }
      }
    }
  }
  o.expect(row_err <= 1e-9, "attention rows deviate from 1 by " + fmt("%.3e", row_err));
  o.expect(in_unit, "attention weight outside [0, 1]");
  o.expect(attention_err <= 1e-12, "attention differs from the brute-force oracle by " + fmt("%.3e", attention_err));
  o.expect(forward_err <= 1e-12, "ipi_forward differs from the brute-force oracle by " + fmt("%.3e", forward_err));

  double worst = 0.0;
  const IpiConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    IpiParams params = IpiParams::init(cfg, derive_seed(seed, 0));
    StickFigureOptions fig;
    fig.frames = 8;
    fig.seed = derive_seed(seed, 1);
    const PoseSequence pose = make_stick_figure(fig);
    const Matrix clip = synthetic_clip_features(pose, 16, cfg.d_model, derive_seed(seed, 2));
    GradCheckOptions opts;
    opts.max_entries_per_block = 16;
    opts.seed = derive_seed(seed, 3);
    const GradCheckReport r = ipi_grad_check(params, cfg, clip, pose, opts);
    worst = std::max(worst, r.max_rel_error);
    o.expect(r.max_rel_error <= 1e-4, "grad check seed " + std::to_string(seed) + " max rel error " +
                                          fmt("%.3e", r.max_rel_error));
  }

  const Matrix x = Matrix::random_normal(4, 8, rng, 1.0);
  Matrix f(4, 8, std::nan(""));
  const Matrix same = residual_inject(x, f, 0.0);
  o.expect(std::memcmp(same.values().data(), x.values().data(), x.size() * sizeof(double)) == 0 && same.same_shape(x),
           "residual_inject with alpha 0 is not the bitwise identity");
  o.expect(IpiConfig{}.alpha == 1.0 && kDefaultIpiAlpha == 1.0, "default alpha is not 1");
  o.summary = "rows " + fmt("%.1e", row_err) + ", attention " + fmt("%.1e", attention_err) + ", forward " +
              fmt("%.1e", forward_err) + ", grad check " + fmt("%.2e", worst) + " over 10 seeds";
  return o;
}

Outcome multitask_gating() {
  Outcome o;
  const AnchorPool pool(make_anchor_pool(8, 1).anchors);
  const SimConfig cfg = sim_config();

  SimState ti2v = make_state(cfg, 1);
  const SimParams before_t = ti2v.params;
  const SimReport rt = run_sim(ti2v, 100, &pool, Task::kTi2v);
  o.expect(rt.ti2v_steps == 100, "forced TI2V run recorded " + std::to_string(rt.ti2v_steps) + " TI2V steps");
  o.expect(partition_delta(before_t, ti2v.params, Partition::kIpi) == 0.0 &&
               same_blocks(before_t, ti2v.params, Partition::kIpi),
           "TI2V steps changed theta_ipi");
  o.expect(partition_delta(before_t, ti2v.params, Partition::kEpi) == 0.0 &&
               same_blocks(before_t, ti2v.params, Partition::kEpi),
           "TI2V steps changed theta_epi");
  o.expect(rt.delta_norm[1] > 0.0, "TI2V steps left theta_lora unchanged");
  o.expect(same_blocks(before_t, ti2v.params, Partition::kBase), "TI2V steps changed theta_base");

  SimState anim = make_state(cfg, 1);
  const SimParams before_a = anim.params;
  const SimReport ra = run_sim(anim, 100, &pool, Task::kAnimation);
  o.expect(ra.delta_norm[1] > 0.0, "Animation steps left theta_lora unchanged");
  o.expect(ra.delta_norm[2] > 0.0, "Animation steps left theta_ipi unchanged");
  o.expect(ra.delta_norm[3] > 0.0, "Animation steps left theta_epi unchanged");
  o.expect(same_blocks(before_a, anim.params, Partition::kBase), "Animation steps changed theta_base");

  Rng rng(99);
  const TaskSamplerConfig tasks;
  constexpr std::size_t kDraws = 100000;
  std::size_t ti2v_draws = 0;
  for (std::size_t i = 0; i < kDraws; ++i) ti2v_draws += sample_task(rng, tasks) == Task::kTi2v;
  const double frac = static_cast<double>(ti2v_draws) / kDraws;
  o.expect(tasks.p_ti2v == 0.1, "default p_ti2v is not 0.1");
  o.expect(frac >= 0.094 && frac <= 0.106, "TI2V fraction " + fmt("%.4f", frac));
  o.summary = "TI2V delta lora " + fmt("%.2e", rt.delta_norm[1]) + " ipi 0 epi 0; Animation delta lora " +
              fmt("%.2e", ra.delta_norm[1]) + " ipi " + fmt("%.2e", ra.delta_norm[2]) + " epi " +
              fmt("%.2e", ra.delta_norm[3]) + "; TI2V fraction " + fmt("%.4f", frac);
  return o;
}

Outcome diffusion_math() {
  Outcome o;
  const NoiseSchedule toy = make_schedule(5, 0.05, 0.4);
  const std::vector<double> ab = oracle::alpha_bar_product(toy.betas);
  double product_err = 0.0;
  for (std::size_t t = 0; t <= 5; ++t) product_err = std::max(product_err, std::fabs(ab[t] - toy.alpha_bar_at(t)));
  o.expect(product_err <= 1e-15, "alpha_bar differs from the brute-force product by " + fmt("%.3e", product_err));

  const Matrix z0(1, 3, std::vector<double>{1.5, -0.7, 0.25});
  constexpr std::size_t kSamples = 100000;
  std::array<std::array<double, 3>, 6> sum{}, sq{};
  Rng rng(4242);
  for (std::size_t n = 0; n < kSamples; ++n) {
    Matrix z = z0;
    for (std::size_t t = 1; t <= 5; ++t) {
      z = diffuse_step(z, t, toy, Matrix::random_normal(1, 3, rng, 1.0));
      for (std::size_t c = 0; c < 3; ++c) {
        sum[t][c] += z[c];
        sq[t][c] += z[c] * z[c];
      }
    }
  }
  double worst_sigma = 0.0;
  for (std::size_t t = 1; t <= 5; ++t) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double mean = sum[t][c] / kSamples;
      const double var = (sq[t][c] - kSamples * mean * mean) / (kSamples - 1);
      const double want_mean = std::sqrt(ab[t]) * z0[c];
      const double want_var = 1.0 - ab[t];
      const double z_mean = std::fabs(mean - want_mean) / std::sqrt(want_var / kSamples);
      const double z_var = std::fabs(var - want_var) / (want_var * std::sqrt(2.0 / (kSamples - 1)));
      worst_sigma = std::max({worst_sigma, z_mean, z_var});
    }
  }
  o.expect(worst_sigma <= 4.0, "stepwise chain deviates from the closed form by " + fmt("%.2f", worst_sigma) + " sigma");

  double inversion = 0.0;
  for (ScheduleShape shape : {ScheduleShape::kLinear, ScheduleShape::kCosine}) {
    const NoiseSchedule s = make_schedule(50, 1e-4, 0.02, shape);
    for (std::size_t trial = 0; trial < 200; ++trial) {
      const Matrix x0 = Matrix::random_normal(4, 8, rng, 1.0);
      const Matrix eps = Matrix::random_normal(4, 8, rng, 1.0);
      const std::size_t t = 1 + rng.uniform_index(50);
      const std::size_t t_prev = rng.uniform_index(t);
      const Matrix back = ddim_step(forward_diffuse(x0, t, s, eps), eps, t, t_prev, s);
      const Matrix want = t_prev == 0 ? x0 : forward_diffuse(x0, t_prev, s, eps);
      for (std::size_t i = 0; i < back.size(); ++i) inversion = std::max(inversion, std::fabs(back[i] - want[i]));
    }
  }
  o.expect(inversion <= 1e-12, "DDIM inversion error " + fmt("%.3e", inversion));

  bool affine = true;
  for (std::size_t trial = 0; trial < 100; ++trial) {
    const Matrix a = Matrix::random_normal(1 + rng.uniform_index(6), 1 + rng.uniform_index(6), rng, 3.0);
    const double s = rng.uniform(-20.0, 20.0);
    affine = affine && cfg_combine(a, a, s) == a;
  }
  o.expect(affine, "cfg_combine(a, a, s) != a");
  o.expect(kDefaultGuidanceScale == 5.0, "default guidance scale is not 5");
  o.summary = "chain within " + fmt("%.2f", worst_sigma) + " sigma, DDIM inversion " + fmt("%.1e", inversion) +
              ", cfg affine, guidance 5";
  return o;
}

Outcome io_determinism(const std::string& data_dir) {
  Outcome o;
  Rng rng(555);
  std::size_t round_trips = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const PoseSequence seq = fixtures::random_sequence(rng);
    const std::string text = write_pose_json(seq);
    const PoseSequence back = parse_pose_json(text);
    const bool ok = back == seq && write_pose_json(back) == text;
    round_trips += ok;
  }
  o.expect(round_trips == 100, std::to_string(100 - round_trips) + " of 100 fuzzed sequences failed parse/write");

  namespace fs = std::filesystem;
  const fs::path golden_dir = fs::path(data_dir) / "golden_render";
  const std::string pose_path = (fs::path(data_dir) / "golden_pose.json").string();
  std::vector<fs::path> goldens;
  for (const auto& e : fs::directory_iterator(golden_dir)) goldens.push_back(e.path());
  std::sort(goldens.begin(), goldens.end());
  o.expect(!goldens.empty(), "no golden frames under " + golden_dir.string());

  const PoseSequence pose = parse_pose_json(read_text_file(pose_path));
  for (std::size_t f = 0; f < goldens.size() && f < pose.frames.size(); ++f) {
    const std::string want = fixtures::slurp(goldens[f]);
    o.expect(encode_ppm(render_frame(pose.frames[f], CanvasSpec{pose.width, pose.height})) == want,
             "in-process render differs from " + goldens[f].filename().string());
    o.expect(oracle::write_p6(oracle::read_p6(want)) == want, "golden frame does not survive a P6 round trip");
  }
  for (const char* jobs : {"1", "3", "0"}) {
    fixtures::TempDir dir("posekit_acceptance_render");
    std::ostringstream out, err;
    const int code = posekit::cli::run_cli({"render", pose_path, "--out-dir", dir.path().string(), "--jobs", jobs},
                                           out, err);
    o.expect(code == 0, std::string("render --jobs ") + jobs + " exited " + std::to_string(code) + ": " + err.str());
    for (const fs::path& g : goldens) {
      o.expect(fixtures::slurp(dir.path() / g.filename()) == fixtures::slurp(g),
               std::string("render --jobs ") + jobs + " " + g.filename().string() + " differs from golden");
    }
  }

  SimConfig cfg = sim_config();
  cfg.fixed_batch = true;
  cfg.tasks.cond_dropout = 0.0;
  cfg.epi.lambda = 0.0;
  cfg.lr_other = 0.2;
  cfg.lr_ipi = 0.2;
  const AnchorPool pool(make_anchor_pool(8, 1).anchors);
  SimState state = make_state(cfg, 1);
  const SimReport r = run_sim(state, 500, &pool, Task::kAnimation);
  const double ratio = r.loss.back() / r.loss.front();
  o.expect(ratio < 0.1, "overfit final/initial loss " + fmt("%.4f", ratio));
  o.summary = std::to_string(round_trips) + "/100 round trips, " + std::to_string(goldens.size()) +
              " golden frames x 3 job counts, overfit ratio " + fmt("%.4f", ratio);
  return o;
}

std::vector<Criterion> all_criteria(const std::string& data_dir) {
  return {
      {"epi-geometry", 5.0, epi_geometry},
      {"lambda-contract", 10.0, lambda_contract},
      {"statistics-table", 0.0, statistics_table},
      {"ipi-numerics", 30.0, ipi_numerics},
      {"multitask-gating", 60.0, multitask_gating},
      {"diffusion-math", 60.0, diffusion_math},
      {"io-determinism", 0.0, [data_dir] { return io_determinism(data_dir); }},
  };
}

}  // namespace acceptance
