#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posekit/autograd.hpp"
#include "posekit/diffusion.hpp"
#include "posekit/epi.hpp"
#include "posekit/grad_check.hpp"
#include "posekit/ipi.hpp"
#include "posekit/rng.hpp"

namespace posekit {

enum class Task { kAnimation, kTi2v };

std::string_view task_name(Task t);

struct TaskSamplerConfig {
  double p_ti2v = 0.1;
  double cond_dropout = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// TI2V with probability p_ti2v; one uniform draw.
Task sample_task(Rng& rng, const TaskSamplerConfig& cfg);

enum class Partition : std::size_t { kBase = 0, kLora, kIpi, kEpi };
inline constexpr std::size_t kPartitionCount = 4;
std::string_view partition_name(Partition p);

/// Which conditions classifier-free guidance removes for the unconditional pass.
enum class CfgMode { kTextOnly, kAllConditions };
std::string_view cfg_mode_name(CfgMode m);
std::optional<CfgMode> parse_cfg_mode(std::string_view name);

struct SimConfig {
  TaskSamplerConfig tasks;
  EpiConfig epi;
  IpiConfig ipi{8, 2, 2, 64};  // d_model = 2 * latent_channels, queries = latent_tokens

  std::size_t latent_tokens = 64;  // 8x8 grid
  std::size_t latent_channels = 4;
  std::size_t hidden = 32;
  std::size_t lora_rank = 4;
  std::size_t pose_hidden = 16;
  std::size_t clip_tokens = 16;
  std::size_t frames = 8;
  int pose_cell = 8;  // rendered pixels per grid cell

  std::size_t timesteps = kDeskTimesteps;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  ScheduleShape schedule = ScheduleShape::kLinear;

  double lr_ipi = kIpiLearningRate;
  double lr_other = kDefaultLearningRate;
  bool fixed_batch = false;  // reuse one batch (latents, noise, t) every step
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenoiserBase {
  Matrix w1, b1, w_text, w2, b2;
};

struct LoraAdapters {
  Matrix a1, b1, a2, b2;
};

struct PoseEncoderParams {
  Matrix w1, b1, w2, b2;
};

/// {theta_base, theta_lora, theta_ipi, theta_epi}
struct SimParams {
  DenoiserBase base;
  LoraAdapters lora;
  IpiParams ipi;
  PoseEncoderParams epi;

  static SimParams init(const SimConfig& cfg, std::uint64_t seed, bool zero_lora_b = true);
  std::vector<ParamRef> blocks(Partition p);
  std::vector<ConstParamRef> blocks(Partition p) const;
  std::vector<ConstParamRef> all_blocks() const;
  std::vector<ParamRef> all_blocks();
};

/// One training example.
struct SimBatch {
  Matrix ref_latent;  // latent_tokens x latent_channels
  Matrix z0;          // target latent
  Matrix noise;
  std::size_t t = 1;
  std::optional<PoseSequence> pose;
  Matrix clip;      // clip_tokens x d_model
  Matrix text_emb;  // 1 x text width (hidden)
};

SimBatch make_batch(const SimConfig& cfg, Rng& rng, bool with_pose = true);

struct ConditionDraw {
  Task task = Task::kAnimation;
  bool drop_ref = false;
  bool drop_pose_explicit = false;
  bool drop_pose_implicit = false;
  bool drop_text = false;
  std::optional<PoseSequence> transformed_pose;
  TransformRecord transform;
};

/// Dropout decisions (ref, f_e, f_i, text in that order) and, for the
/// animation task, the explicit pose transformation. Throws UsageError when
/// the animation task has no pose.
ConditionDraw draw_condition(Task task, const SimBatch& batch, const SimConfig& cfg,
                             const AnchorPool* pool, Rng& rng);

struct ConditionBundle {
  Matrix f_ref;
  Matrix f_e;
  Matrix f_i;
  Matrix text_emb;
  Matrix f_merge;
  ConditionDraw draw;
};

/// Rendered pose features: per grid cell mean RGB over frames, in [0, 1].
Matrix pose_grid_features(const PoseSequence& pose, const SimConfig& cfg);

struct SimVars {
  Var base_w1, base_b1, base_w_text, base_w2, base_b2;
  Var a1, b1, a2, b2;
  IpiVars ipi;
  Var e_w1, e_b1, e_w2, e_b2;

  /// Base is bound as constants; the rest as parameters.
  static SimVars bind(Tape& tape, const SimParams& params, const SimConfig& cfg);
  /// Leaves for lora, ipi and epi blocks in that order; base from params.
  static SimVars from_leaves(Tape& tape, const SimParams& params, std::span<const Var> trainable,
                             const SimConfig& cfg);
};

struct ConditionVars {
  Var f_ref, f_e, f_i, text_emb, f_merge;
};

ConditionVars condition_graph(Tape& tape, const SimVars& vars, const SimBatch& batch,
                              const ConditionDraw& draw, const Matrix& z_t, const SimConfig& cfg);

/// Toy denoiser with LoRA adapters on both affine layers; returns eps prediction.
Var denoise(Tape& tape, const SimVars& vars, Var f_merge, Var text_emb, std::size_t t,
            const SimConfig& cfg);

/// Diffusion loss of one example as a tape scalar.
Var step_loss(Tape& tape, const SimVars& vars, const SimBatch& batch, const ConditionDraw& draw,
              const SimConfig& cfg, const NoiseSchedule& schedule);

ConditionBundle build_condition(Task task, const SimBatch& batch, const SimParams& params,
                                const SimConfig& cfg, const AnchorPool* pool, Rng& rng);

struct SimState {
  SimConfig cfg;
  NoiseSchedule schedule;
  SimParams params;
  std::size_t step = 0;
};

SimState make_state(const SimConfig& cfg, std::uint64_t param_seed);

/// Partitions updated by a task; base never.
std::array<bool, kPartitionCount> trainable_mask(Task task);

struct StepResult {
  double loss = 0.0;
  Task task = Task::kAnimation;
  std::array<double, kPartitionCount> grad_norm{};
};

/// Loss, backward, masked plain gradient descent. Throws NumericalError on a
/// non-finite loss or gradient, leaving the state unchanged.
StepResult train_step(SimState& state, const SimBatch& batch, const ConditionDraw& draw);

/// grad_check over the lora, ipi and epi blocks of the step loss.
GradCheckReport train_step_grad_check(SimState& state, const SimBatch& batch,
                                      const ConditionDraw& draw, const GradCheckOptions& opts);

struct SimReport {
  std::size_t steps = 0;
  std::size_t animation_steps = 0;
  std::size_t ti2v_steps = 0;
  std::array<double, kPartitionCount> delta_norm{};
  std::vector<double> loss;
  std::vector<Task> tasks;
};

/// `force_task` pins every step to one task; otherwise tasks are sampled.
SimReport run_sim(SimState& state, std::size_t n_steps, const AnchorPool* pool,
                  std::optional<Task> force_task = std::nullopt);

std::string sim_report_json(const SimReport& report, const SimConfig& cfg);

/// Euclidean distance between the blocks of two parameter sets in one partition.
double partition_delta(const SimParams& a, const SimParams& b, Partition p);

/// Guided DDIM sampling of a latent for the batch's conditions.
Matrix sample_latent(const SimState& state, const SimBatch& batch, CfgMode mode, double scale,
                     std::size_t ddim_steps, Rng& rng);

}  // namespace posekit
