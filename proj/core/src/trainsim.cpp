#include "posekit/trainsim.hpp"

#include <cmath>

#include <json.hpp>

#include "posekit/error.hpp"
#include "posekit/render.hpp"
#include "posekit/synthetic.hpp"

namespace posekit {
namespace {

constexpr std::uint64_t kFixedBatchStream = 0xba7c4ULL;

Matrix scaled_normal(std::size_t r, std::size_t c, Rng& rng, double s) {
  return Matrix::random_normal(r, c, rng, s);
}

double fan_in(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

std::size_t grid_side(std::size_t tokens) {
  const auto g = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(tokens))));
  return g * g == tokens ? g : 0;
}

Matrix time_embedding(std::size_t t, std::size_t width, std::size_t total) {
  Matrix out(1, width);
  const double x = static_cast<double>(t) / static_cast<double>(total);
  for (std::size_t j = 0; j < width; ++j) {
    const double freq = std::pow(100.0, static_cast<double>(j / 2) / static_cast<double>(width)) * 3.0;
    out(0, j) = j % 2 == 0 ? std::sin(freq * x) : std::cos(freq * x);
  }
  return out;
}

PoseFrame scale_frame_coords(const PoseFrame& f, double sx, double sy) {
  PoseFrame out = f;
  auto scale = [&](Keypoint2D& k) {
    k.x *= sx;
    k.y *= sy;
  };
  for (Keypoint2D& k : out.body) scale(k);
  if (out.left_hand) for (Keypoint2D& k : *out.left_hand) scale(k);
  if (out.right_hand) for (Keypoint2D& k : *out.right_hand) scale(k);
  if (out.face) for (Keypoint2D& k : *out.face) scale(k);
  return out;
}

template <typename Ref, typename P>
std::vector<Ref> partition_blocks(P& params, Partition p) {
  std::vector<Ref> out;
  switch (p) {
    case Partition::kBase:
      out = {{"base.w1", &params.base.w1},
             {"base.b1", &params.base.b1},
             {"base.w_text", &params.base.w_text},
             {"base.w2", &params.base.w2},
             {"base.b2", &params.base.b2}};
      break;
    case Partition::kLora:
      out = {{"lora.a1", &params.lora.a1},
             {"lora.b1", &params.lora.b1},
             {"lora.a2", &params.lora.a2},
             {"lora.b2", &params.lora.b2}};
      break;
    case Partition::kIpi:
      for (auto& b : params.ipi.blocks()) out.push_back({"ipi." + b.name, b.value});
      break;
    case Partition::kEpi:
      out = {{"epi.w1", &params.epi.w1},
             {"epi.b1", &params.epi.b1},
             {"epi.w2", &params.epi.w2},
             {"epi.b2", &params.epi.b2}};
      break;
  }
  return out;
}

std::vector<ParamRef> trainable_blocks(SimParams& params) {
  std::vector<ParamRef> out;
  for (Partition p : {Partition::kLora, Partition::kIpi, Partition::kEpi}) {
    auto b = params.blocks(p);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

}  // namespace

std::string_view task_name(Task t) { return t == Task::kAnimation ? "animation" : "ti2v"; }

void TaskSamplerConfig::validate() const {
  if (!(p_ti2v >= 0.0 && p_ti2v <= 1.0)) throw ConfigError("p_ti2v must lie in [0, 1]");
  if (!(cond_dropout >= 0.0 && cond_dropout <= 1.0)) throw ConfigError("cond_dropout must lie in [0, 1]");
}

Task sample_task(Rng& rng, const TaskSamplerConfig& cfg) {
  return rng.bernoulli(cfg.p_ti2v) ? Task::kTi2v : Task::kAnimation;
}

std::string_view partition_name(Partition p) {
  constexpr std::array<std::string_view, kPartitionCount> names{"base", "lora", "ipi", "epi"};
  return names[static_cast<std::size_t>(p)];
}

std::string_view cfg_mode_name(CfgMode m) {
  return m == CfgMode::kTextOnly ? "text" : "all";
}

std::optional<CfgMode> parse_cfg_mode(std::string_view name) {
  if (name == "text") return CfgMode::kTextOnly;
  if (name == "all") return CfgMode::kAllConditions;
  return std::nullopt;
}

void SimConfig::validate() const {
  tasks.validate();
  epi.validate();
  ipi.validate();
  if (latent_channels == 0 || hidden == 0 || lora_rank == 0 || pose_hidden == 0 || clip_tokens == 0 ||
      frames == 0) {
    throw ConfigError("simulation sizes must be positive");
  }
  if (grid_side(latent_tokens) == 0) throw ConfigError("latent_tokens must be a perfect square");
  if (ipi.d_model != 2 * latent_channels) {
    throw ConfigError("ipi d_model must equal 2 * latent_channels (" +
                      std::to_string(2 * latent_channels) + ")");
  }
  if (ipi.n_learnable_queries != latent_tokens) {
    throw ConfigError("ipi n_learnable_queries must equal latent_tokens");
  }
  if (pose_cell < 1) throw ConfigError("pose_cell must be >= 1");
  if (grid_side(latent_tokens) * static_cast<std::size_t>(pose_cell) < 16) {
    throw ConfigError("rendered pose canvas must be at least 16 pixels wide");
  }
  if (!(lr_ipi >= 0.0) || !(lr_other >= 0.0)) throw ConfigError("learning rates must be non-negative");
  make_schedule(timesteps, beta_start, beta_end, schedule);
}

SimParams SimParams::init(const SimConfig& cfg, std::uint64_t seed, bool zero_lora_b) {
  cfg.validate();
  const std::size_t d = 2 * cfg.latent_channels;
  const std::size_t h = cfg.hidden;
  const std::size_t c = cfg.latent_channels;
  const std::size_t r = cfg.lora_rank;
  SimParams p;
  Rng base(derive_seed(seed, 0));
  p.base.w1 = scaled_normal(d, h, base, fan_in(d));
  p.base.b1 = scaled_normal(1, h, base, 0.1);
  p.base.w_text = scaled_normal(h, h, base, fan_in(h));
  p.base.w2 = scaled_normal(h, c, base, fan_in(h));
  p.base.b2 = scaled_normal(1, c, base, 0.1);
  Rng lora(derive_seed(seed, 1));
  p.lora.a1 = scaled_normal(d, r, lora, fan_in(d));
  p.lora.b1 = zero_lora_b ? Matrix(r, h) : scaled_normal(r, h, lora, fan_in(r));
  p.lora.a2 = scaled_normal(h, r, lora, fan_in(h));
  p.lora.b2 = zero_lora_b ? Matrix(r, c) : scaled_normal(r, c, lora, fan_in(r));
  p.ipi = IpiParams::init(cfg.ipi, derive_seed(seed, 2));
  Rng epi(derive_seed(seed, 3));
  p.epi.w1 = scaled_normal(3, cfg.pose_hidden, epi, fan_in(3));
  p.epi.b1 = scaled_normal(1, cfg.pose_hidden, epi, 0.1);
  p.epi.w2 = scaled_normal(cfg.pose_hidden, d, epi, fan_in(cfg.pose_hidden));
  p.epi.b2 = scaled_normal(1, d, epi, 0.1);
  return p;
}

std::vector<ParamRef> SimParams::blocks(Partition p) { return partition_blocks<ParamRef>(*this, p); }
std::vector<ConstParamRef> SimParams::blocks(Partition p) const {
  return partition_blocks<ConstParamRef>(*this, p);
}

std::vector<ConstParamRef> SimParams::all_blocks() const {
  std::vector<ConstParamRef> out;
  for (std::size_t i = 0; i < kPartitionCount; ++i) {
    auto b = blocks(static_cast<Partition>(i));
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<ParamRef> SimParams::all_blocks() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < kPartitionCount; ++i) {
    auto b = blocks(static_cast<Partition>(i));
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

SimBatch make_batch(const SimConfig& cfg, Rng& rng, bool with_pose) {
  SimBatch b;
  b.ref_latent = Matrix::random_normal(cfg.latent_tokens, cfg.latent_channels, rng, 1.0);
  b.z0 = Matrix::random_normal(cfg.latent_tokens, cfg.latent_channels, rng, 1.0);
  b.noise = Matrix::random_normal(cfg.latent_tokens, cfg.latent_channels, rng, 1.0);
  b.t = 1 + rng.uniform_index(cfg.timesteps);
  b.text_emb = Matrix::random_normal(1, cfg.hidden, rng, 1.0);
  const std::uint64_t pose_seed = rng.next_u64();
  const std::uint64_t clip_seed = rng.next_u64();
  if (with_pose) {
    StickFigureOptions opts;
    opts.frames = cfg.frames;
    opts.seed = pose_seed;
    opts.jitter = 0.2;
    b.pose = make_stick_figure(opts);
    b.clip = synthetic_clip_features(*b.pose, cfg.clip_tokens, cfg.ipi.d_model, clip_seed);
  }
  return b;
}

ConditionDraw draw_condition(Task task, const SimBatch& batch, const SimConfig& cfg,
                             const AnchorPool* pool, Rng& rng) {
  ConditionDraw d;
  d.task = task;
  d.drop_ref = rng.bernoulli(cfg.tasks.cond_dropout);
  d.drop_pose_explicit = rng.bernoulli(cfg.tasks.cond_dropout);
  d.drop_pose_implicit = rng.bernoulli(cfg.tasks.cond_dropout);
  d.drop_text = rng.bernoulli(cfg.tasks.cond_dropout);
  if (task == Task::kAnimation) {
    if (!batch.pose) throw UsageError("animation task needs a driving pose");
    if (pool) {
      EpiResult r = epi_transform(*batch.pose, *pool, cfg.epi, rng);
      d.transformed_pose = std::move(r.sequence);
      d.transform = std::move(r.record);
    } else {
      d.transformed_pose = batch.pose;
    }
  }
  return d;
}

Matrix pose_grid_features(const PoseSequence& pose, const SimConfig& cfg) {
  if (pose.frames.empty()) throw UsageError("pose features need at least one frame");
  const std::size_t g = grid_side(cfg.latent_tokens);
  const int cell = cfg.pose_cell;
  const int side = static_cast<int>(g) * cell;
  CanvasSpec spec;
  spec.width = side;
  spec.height = side;
  spec.line_thickness = 2;
  spec.joint_radius = 1;
  const double sx = static_cast<double>(side) / pose.width;
  const double sy = static_cast<double>(side) / pose.height;
  Matrix out(cfg.latent_tokens, 3);
  for (const PoseFrame& f : pose.frames) {
    const ImageBuffer img = render_frame(scale_frame_coords(f, sx, sy), spec);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const Rgb c = img.at(x, y);
        const std::size_t token = static_cast<std::size_t>(y / cell) * g + static_cast<std::size_t>(x / cell);
        out(token, 0) += c.r;
        out(token, 1) += c.g;
        out(token, 2) += c.b;
      }
    }
  }
  const double norm = 255.0 * cell * cell * static_cast<double>(pose.frames.size());
  for (double& v : out.values()) v /= norm;
  return out;
}

SimVars SimVars::bind(Tape& tape, const SimParams& params, const SimConfig& cfg) {
  std::vector<Var> leaves;
  for (Partition p : {Partition::kLora, Partition::kIpi, Partition::kEpi}) {
    for (const ConstParamRef& b : params.blocks(p)) leaves.push_back(tape.parameter(*b.value));
  }
  return from_leaves(tape, params, leaves, cfg);
}

SimVars SimVars::from_leaves(Tape& tape, const SimParams& params, std::span<const Var> trainable,
                             const SimConfig& cfg) {
  const std::size_t n_ipi = params.ipi.blocks().size();
  if (trainable.size() != 4 + n_ipi + 4) {
    throw ShapeError("expected " + std::to_string(8 + n_ipi) + " trainable leaves, got " +
                     std::to_string(trainable.size()));
  }
  SimVars v;
  v.base_w1 = tape.constant(params.base.w1);
  v.base_b1 = tape.constant(params.base.b1);
  v.base_w_text = tape.constant(params.base.w_text);
  v.base_w2 = tape.constant(params.base.w2);
  v.base_b2 = tape.constant(params.base.b2);
  v.a1 = trainable[0];
  v.b1 = trainable[1];
  v.a2 = trainable[2];
  v.b2 = trainable[3];
  v.ipi = IpiVars::from_leaves(trainable.subspan(4, n_ipi), cfg.ipi);
  v.e_w1 = trainable[4 + n_ipi];
  v.e_b1 = trainable[5 + n_ipi];
  v.e_w2 = trainable[6 + n_ipi];
  v.e_b2 = trainable[7 + n_ipi];
  return v;
}

ConditionVars condition_graph(Tape& tape, const SimVars& vars, const SimBatch& batch,
                              const ConditionDraw& draw, const Matrix& z_t, const SimConfig& cfg) {
  const std::size_t d = 2 * cfg.latent_channels;
  const bool animation = draw.task == Task::kAnimation;
  if (animation && !batch.pose) throw UsageError("animation task needs a driving pose");

  ConditionVars c;
  c.f_ref = tape.constant(draw.drop_ref ? Matrix(batch.ref_latent.rows(), batch.ref_latent.cols())
                                        : batch.ref_latent);
  c.text_emb = tape.constant(draw.drop_text ? Matrix(1, cfg.hidden) : batch.text_emb);

  const PoseSequence* explicit_pose =
      animation ? (draw.transformed_pose ? &*draw.transformed_pose : &*batch.pose)
                : (batch.pose ? &*batch.pose : nullptr);
  if (explicit_pose) {
    const Var p = tape.constant(pose_grid_features(*explicit_pose, cfg));
    const Var h = ops::tanh(ops::add_row(ops::matmul(p, vars.e_w1), vars.e_b1));
    c.f_e = ops::add_row(ops::matmul(h, vars.e_w2), vars.e_b2);
    if (!animation || draw.drop_pose_explicit) c.f_e = ops::scale(c.f_e, 0.0);
  } else {
    c.f_e = tape.constant(Matrix(cfg.latent_tokens, d));
  }

  if (batch.pose) {
    c.f_i = ipi_forward(tape, vars.ipi, tape.constant(batch.clip), keypoint_tokens(*batch.pose), cfg.ipi);
    if (!animation || draw.drop_pose_implicit) c.f_i = ops::scale(c.f_i, 0.0);
  } else {
    c.f_i = tape.constant(Matrix(cfg.latent_tokens, d));
  }

  const Var base_in = ops::concat_cols(c.f_ref, tape.constant(z_t));
  c.f_merge = ops::add(ops::add(base_in, c.f_e), ops::scale(c.f_i, cfg.ipi.alpha));
  return c;
}

Var denoise(Tape& tape, const SimVars& vars, Var f_merge, Var text_emb, std::size_t t,
            const SimConfig& cfg) {
  Var pre = ops::add(ops::matmul(f_merge, vars.base_w1),
                     ops::matmul(ops::matmul(f_merge, vars.a1), vars.b1));
  pre = ops::add_row(pre, vars.base_b1);
  pre = ops::add_row(pre, ops::matmul(text_emb, vars.base_w_text));
  pre = ops::add_row(pre, tape.constant(time_embedding(t, cfg.hidden, cfg.timesteps)));
  const Var h = ops::tanh(pre);
  const Var out = ops::add(ops::matmul(h, vars.base_w2), ops::matmul(ops::matmul(h, vars.a2), vars.b2));
  return ops::add_row(out, vars.base_b2);
}

Var step_loss(Tape& tape, const SimVars& vars, const SimBatch& batch, const ConditionDraw& draw,
              const SimConfig& cfg, const NoiseSchedule& schedule) {
  const Matrix z_t = forward_diffuse(batch.z0, batch.t, schedule, batch.noise);
  const ConditionVars c = condition_graph(tape, vars, batch, draw, z_t, cfg);
  const Var eps = denoise(tape, vars, c.f_merge, c.text_emb, batch.t, cfg);
  return ops::mse(eps, tape.constant(batch.noise));
}

ConditionBundle build_condition(Task task, const SimBatch& batch, const SimParams& params,
                                const SimConfig& cfg, const AnchorPool* pool, Rng& rng) {
  cfg.validate();
  ConditionBundle out;
  out.draw = draw_condition(task, batch, cfg, pool, rng);
  const NoiseSchedule schedule = make_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end, cfg.schedule);
  Tape tape;
  const SimVars vars = SimVars::bind(tape, params, cfg);
  const Matrix z_t = forward_diffuse(batch.z0, batch.t, schedule, batch.noise);
  const ConditionVars c = condition_graph(tape, vars, batch, out.draw, z_t, cfg);
  out.f_ref = c.f_ref.value();
  out.f_e = c.f_e.value();
  out.f_i = c.f_i.value();
  out.text_emb = c.text_emb.value();
  out.f_merge = c.f_merge.value();
  return out;
}

SimState make_state(const SimConfig& cfg, std::uint64_t param_seed) {
  cfg.validate();
  SimState s;
  s.cfg = cfg;
  s.schedule = make_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end, cfg.schedule);
  s.params = SimParams::init(cfg, param_seed);
  return s;
}

std::array<bool, kPartitionCount> trainable_mask(Task task) {
  if (task == Task::kAnimation) return {false, true, true, true};
  return {false, true, false, false};
}

StepResult train_step(SimState& state, const SimBatch& batch, const ConditionDraw& draw) {
  Tape tape;
  const SimVars vars = SimVars::bind(tape, state.params, state.cfg);
  const Var loss = step_loss(tape, vars, batch, draw, state.cfg, state.schedule);
  StepResult res;
  res.task = draw.task;
  res.loss = loss.value()(0, 0);
  if (!std::isfinite(res.loss)) throw NumericalError("training loss is not finite");
  tape.backward(loss);

  std::vector<ParamRef> blocks = trainable_blocks(state.params);
  std::vector<Var> leaves;
  {
    const std::vector<Var> ipi_leaves = vars.ipi.leaves();
    leaves = {vars.a1, vars.b1, vars.a2, vars.b2};
    leaves.insert(leaves.end(), ipi_leaves.begin(), ipi_leaves.end());
    leaves.insert(leaves.end(), {vars.e_w1, vars.e_b1, vars.e_w2, vars.e_b2});
  }
  const std::size_t n_ipi = state.params.ipi.blocks().size();
  auto partition_of = [&](std::size_t i) {
    if (i < 4) return Partition::kLora;
    if (i < 4 + n_ipi) return Partition::kIpi;
    return Partition::kEpi;
  };

  const auto mask = trainable_mask(draw.task);
  std::vector<const Matrix*> grads(blocks.size(), nullptr);
  std::array<double, kPartitionCount> sq{};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Partition p = partition_of(i);
    if (!mask[static_cast<std::size_t>(p)]) continue;
    const Matrix& g = leaves[i].grad();
    if (g.empty()) continue;
    if (!all_finite(g)) throw NumericalError("non-finite gradient in block " + blocks[i].name);
    grads[i] = &g;
    const double n = frobenius_norm(g);
    sq[static_cast<std::size_t>(p)] += n * n;
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!grads[i]) continue;
    const double lr = partition_of(i) == Partition::kIpi ? state.cfg.lr_ipi : state.cfg.lr_other;
    axpy(*blocks[i].value, -lr, *grads[i]);
  }
  for (std::size_t p = 0; p < kPartitionCount; ++p) res.grad_norm[p] = std::sqrt(sq[p]);
  return res;
}

GradCheckReport train_step_grad_check(SimState& state, const SimBatch& batch,
                                      const ConditionDraw& draw, const GradCheckOptions& opts) {
  const std::vector<ParamRef> blocks = trainable_blocks(state.params);
  auto loss = [&](Tape& tape, std::span<const Var> leaves) {
    const SimVars vars = SimVars::from_leaves(tape, state.params, leaves, state.cfg);
    return step_loss(tape, vars, batch, draw, state.cfg, state.schedule);
  };
  return grad_check(blocks, loss, opts);
}

double partition_delta(const SimParams& a, const SimParams& b, Partition p) {
  const auto ba = a.blocks(p);
  const auto bb = b.blocks(p);
  double s = 0.0;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    require_same_shape(*ba[i].value, *bb[i].value, ba[i].name.c_str());
    for (std::size_t k = 0; k < ba[i].value->size(); ++k) {
      const double d = (*ba[i].value)[k] - (*bb[i].value)[k];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

SimReport run_sim(SimState& state, std::size_t n_steps, const AnchorPool* pool,
                  std::optional<Task> force_task) {
  const SimParams initial = state.params;
  const SimConfig& cfg = state.cfg;
  std::optional<SimBatch> fixed;
  if (cfg.fixed_batch) {
    Rng r(derive_seed(cfg.seed, kFixedBatchStream));
    fixed = make_batch(cfg, r);
  }
  SimReport report;
  for (std::size_t i = 0; i < n_steps; ++i) {
    Rng r(derive_seed(cfg.seed, state.step));
    const Task task = force_task ? *force_task : sample_task(r, cfg.tasks);
    const SimBatch batch = fixed ? *fixed : make_batch(cfg, r);
    const ConditionDraw draw = draw_condition(task, batch, cfg, pool, r);
    const StepResult res = train_step(state, batch, draw);
    report.loss.push_back(res.loss);
    report.tasks.push_back(task);
    (task == Task::kAnimation ? report.animation_steps : report.ti2v_steps) += 1;
    ++state.step;
  }
  report.steps = n_steps;
  for (std::size_t p = 0; p < kPartitionCount; ++p) {
    report.delta_norm[p] = partition_delta(state.params, initial, static_cast<Partition>(p));
  }
  return report;
}

std::string sim_report_json(const SimReport& report, const SimConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["steps"] = report.steps;
  doc["task_counts"] = {{"animation", report.animation_steps}, {"ti2v", report.ti2v_steps}};
  nlohmann::ordered_json delta;
  for (std::size_t p = 0; p < kPartitionCount; ++p) {
    delta[std::string(partition_name(static_cast<Partition>(p)))] = report.delta_norm[p];
  }
  doc["delta_norm"] = delta;
  doc["initial_loss"] = report.loss.empty() ? nlohmann::ordered_json(nullptr)
                                            : nlohmann::ordered_json(report.loss.front());
  doc["final_loss"] = report.loss.empty() ? nlohmann::ordered_json(nullptr)
                                          : nlohmann::ordered_json(report.loss.back());
  doc["loss"] = report.loss;
  std::string seq;
  for (Task t : report.tasks) seq += t == Task::kAnimation ? 'A' : 'T';
  doc["task_sequence"] = seq;
  doc["config"] = {
      {"seed", cfg.seed},
      {"p_ti2v", cfg.tasks.p_ti2v},
      {"cond_dropout", cfg.tasks.cond_dropout},
      {"lambda", cfg.epi.lambda},
      {"lr_ipi", cfg.lr_ipi},
      {"lr_other", cfg.lr_other},
      {"timesteps", cfg.timesteps},
      {"schedule", std::string(schedule_shape_name(cfg.schedule))},
      {"fixed_batch", cfg.fixed_batch},
  };
  return doc.dump(2) + "\n";
}

Matrix sample_latent(const SimState& state, const SimBatch& batch, CfgMode mode, double scale,
                     std::size_t ddim_steps, Rng& rng) {
  const SimConfig& cfg = state.cfg;
  ConditionDraw cond;
  cond.task = batch.pose ? Task::kAnimation : Task::kTi2v;
  cond.transformed_pose = batch.pose;
  ConditionDraw uncond = cond;
  uncond.drop_text = true;
  if (mode == CfgMode::kAllConditions) {
    uncond.drop_ref = true;
    uncond.drop_pose_explicit = true;
    uncond.drop_pose_implicit = true;
  }
  Matrix z = Matrix::random_normal(cfg.latent_tokens, cfg.latent_channels, rng, 1.0);
  const std::vector<std::size_t> ts = ddim_timesteps(state.schedule.steps(), ddim_steps);
  auto predict = [&](const ConditionDraw& d, std::size_t t) {
    Tape tape;
    const SimVars vars = SimVars::bind(tape, state.params, cfg);
    const ConditionVars c = condition_graph(tape, vars, batch, d, z, cfg);
    return denoise(tape, vars, c.f_merge, c.text_emb, t, cfg).value();
  };
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const Matrix eps = cfg_combine(predict(cond, ts[i]), predict(uncond, ts[i]), scale);
    z = ddim_step(z, eps, ts[i], ts[i + 1], state.schedule);
  }
  return z;
}

}  // namespace posekit
