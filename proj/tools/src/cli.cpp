#include "posekit_cli/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "posekit/checkpoint.hpp"
#include "posekit/epi.hpp"
#include "posekit/error.hpp"
#include "posekit/ipi.hpp"
#include "posekit/parallel.hpp"
#include "posekit/pose_json.hpp"
#include "posekit/ratio_stats.hpp"
#include "posekit/render.hpp"
#include "posekit/synthetic.hpp"
#include "posekit/trainsim.hpp"
#include "posekit_cli/settings.hpp"

namespace posekit::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::vector<std::string> sets;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool lenient = false;
};

void add_common(CLI::App* sub, Common& c, bool stochastic) {
  sub->add_option("--set", c.sets, "Override a configuration key (key=value)");
  sub->add_option("--config", c.config_path, "JSON configuration file");
  sub->add_flag("--lenient", c.lenient, "Ignore unknown fields in pose files");
  if (stochastic) sub->add_option("--seed", c.seed, "64-bit seed (required)");
}

Settings load_settings(const Common& c) {
  Settings s;
  if (!c.config_path.empty()) s.load_file(c.config_path);
  for (const std::string& kv : c.sets) s.assign(kv);
  return s;
}

std::uint64_t require_seed(const Common& c, const std::string& sub) {
  if (!c.seed) throw UsageError(sub + " is stochastic and needs --seed");
  return *c.seed;
}

PoseSequence read_pose(const std::string& path, bool lenient, std::ostream& err) {
  PoseSequence seq = parse_pose_json(read_text_file(path), lenient ? ParseMode::kLenient : ParseMode::kStrict);
  const std::vector<Violation> issues = validate_sequence(seq);
  if (!issues.empty()) {
    if (!lenient) {
      const Violation& v = issues.front();
      throw SchemaError((v.frame ? "frames[" + std::to_string(*v.frame) + "]." : std::string()) + v.field,
                        v.rule);
    }
    for (const Violation& v : issues) err << "warning: " << path << ": " << v.to_string() << "\n";
  }
  return seq;
}

void emit(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
  } else {
    write_text_file(path, data);
  }
}

EpiConfig epi_config(Settings& s) {
  EpiConfig c;
  c.lambda = s.number("epi.lambda", c.lambda);
  c.factor_low = s.number("epi.factor_low", c.factor_low);
  c.factor_high = s.number("epi.factor_high", c.factor_high);
  c.ratio_min = s.number("epi.ratio_min", c.ratio_min);
  c.ratio_max = s.number("epi.ratio_max", c.ratio_max);
  c.max_ops_per_plan = static_cast<int>(s.integer("epi.max_ops", c.max_ops_per_plan));
  c.p_rescale = s.number("epi.p_rescale", c.p_rescale);
  c.visibility_threshold = s.number("epi.visibility_threshold", c.visibility_threshold);
  const std::string policy = s.text("epi.ref_frame_policy", std::string(policy_name(c.ref_frame_policy)));
  const auto p = parse_policy(policy);
  if (!p) throw ConfigError("epi.ref_frame_policy: expected first or median, got '" + policy + "'");
  c.ref_frame_policy = *p;
  return c;
}

IpiConfig ipi_config(Settings& s, IpiConfig c = {}) {
  c.d_model = s.unsigned_integer("ipi.d_model", c.d_model);
  c.n_heads = s.unsigned_integer("ipi.heads", c.n_heads);
  c.n_layers = s.unsigned_integer("ipi.layers", c.n_layers);
  c.n_learnable_queries = s.unsigned_integer("ipi.queries", c.n_learnable_queries);
  c.alpha = s.number("ipi.alpha", c.alpha);
  c.keypoint_encoder_layers = s.unsigned_integer("ipi.encoder_layers", c.keypoint_encoder_layers);
  c.ffn_multiplier = s.unsigned_integer("ipi.ffn_multiplier", c.ffn_multiplier);
  return c;
}

std::vector<PoseFrame> read_pool(const std::vector<std::string>& paths, bool lenient, std::ostream& err) {
  std::vector<PoseFrame> anchors;
  for (const std::string& p : paths) {
    const PoseSequence seq = read_pose(p, lenient, err);
    anchors.insert(anchors.end(), seq.frames.begin(), seq.frames.end());
  }
  return anchors;
}

TransformRecord plan_record(const RescalePlan& plan, const std::vector<RescaleWarning>& warnings) {
  TransformRecord r;
  r.applied = true;
  r.plan = plan;
  r.warnings = warnings;
  return r;
}

// ---- subcommands -----------------------------------------------------------

struct ConvertArgs {
  Common common;
  std::string input;
  std::string output;
};

int do_convert(ConvertArgs& a, std::ostream& out, std::ostream&) {
  Settings s = load_settings(a.common);
  s.require_all_used();
  const PoseSequence seq = parse_coco_wholebody_json(read_text_file(a.input));
  emit(a.output, write_pose_json(seq), out);
  return kExitOk;
}

struct RealignArgs {
  Common common;
  std::string input;
  std::string anchor;
  std::size_t anchor_frame = 0;
  std::string output;
  std::string record;
};

int do_realign(RealignArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(a.common);
  const EpiConfig cfg = epi_config(s);
  s.require_all_used();
  cfg.validate();
  const PoseSequence driving = read_pose(a.input, a.common.lenient, err);
  const PoseSequence anchor_seq = read_pose(a.anchor, a.common.lenient, err);
  if (a.anchor_frame >= anchor_seq.frames.size()) {
    throw UsageError("--anchor-frame " + std::to_string(a.anchor_frame) + " out of range (" +
                     std::to_string(anchor_seq.frames.size()) + " frames)");
  }
  const PoseFrame& anchor = anchor_seq.frames[a.anchor_frame];
  const BoneRatios ratios = compute_bone_ratios(driving, anchor, cfg);
  const PoseSequence result = realign_with_ratios(driving, anchor, ratios, cfg);
  emit(a.output, write_pose_json(result), out);
  if (!a.record.empty()) {
    TransformRecord r;
    r.applied = true;
    r.anchor_index = a.anchor_frame;
    r.per_bone_ratio = ratios.ratio;
    r.torso_ratio = ratios.torso_ratio;
    write_text_file(a.record, write_transform_record(r));
  }
  return kExitOk;
}

struct RescaleArgs {
  Common common;
  std::string input;
  std::string plan;
  bool sample = false;
  std::string output;
  std::string record;
};

int do_rescale(RescaleArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(a.common);
  const EpiConfig cfg = epi_config(s);
  s.require_all_used();
  cfg.validate();
  if (a.plan.empty() == !a.sample) throw UsageError("rescale needs exactly one of --plan or --sample");
  RescalePlan plan;
  if (a.sample) {
    Rng rng(require_seed(a.common, "rescale --sample"));
    plan = sample_rescale_plan(rng, cfg);
  } else {
    plan = parse_rescale_plan(read_text_file(a.plan));
    plan.validate(cfg);
  }
  const PoseSequence seq = read_pose(a.input, a.common.lenient, err);
  const RescaleResult res = apply_rescale(seq, plan, cfg.visibility_threshold);
  for (const RescaleWarning& w : res.warnings) err << "warning: op " << w.op_index << ": " << w.message << "\n";
  emit(a.output, write_pose_json(res.sequence), out);
  if (!a.record.empty()) write_text_file(a.record, write_transform_record(plan_record(plan, res.warnings)));
  return kExitOk;
}

struct AugmentArgs {
  Common common;
  std::vector<std::string> inputs;
  std::vector<std::string> pool;
  std::optional<double> lambda;
  std::size_t trials = 1;
  std::string out_dir;
  std::size_t jobs = 1;
};

int do_augment(AugmentArgs& a, std::ostream&, std::ostream& err) {
  Settings s = load_settings(a.common);
  EpiConfig cfg = epi_config(s);
  s.require_all_used();
  if (a.lambda) cfg.lambda = *a.lambda;
  cfg.validate();
  const std::uint64_t seed = require_seed(a.common, "augment");
  if (a.trials == 0) throw UsageError("--trials must be positive");

  std::set<std::string> stems;
  for (const std::string& in : a.inputs) {
    if (!stems.insert(fs::path(in).stem().string()).second) {
      throw UsageError("inputs share the file stem '" + fs::path(in).stem().string() + "'");
    }
  }
  const AnchorPool pool(read_pool(a.pool, a.common.lenient, err), cfg.visibility_threshold);
  std::vector<std::string> texts;
  std::vector<PoseSequence> seqs;
  for (const std::string& in : a.inputs) {
    texts.push_back(read_text_file(in));
    seqs.push_back(read_pose(in, a.common.lenient, err));
  }
  fs::create_directories(a.out_dir);

  const std::size_t n = a.inputs.size() * a.trials;
  parallel_for(n, a.jobs, [&](std::size_t item) {
    const std::size_t i = item / a.trials;
    const std::size_t k = item % a.trials;
    Rng rng(derive_seed(seed, item));
    const EpiResult r = epi_transform(seqs[i], pool, cfg, rng);
    const std::string base =
        (fs::path(a.out_dir) / (fs::path(a.inputs[i]).stem().string() + "_" + std::to_string(k))).string();
    write_text_file(base + ".json", r.record.applied ? write_pose_json(r.sequence) : texts[i]);
    write_text_file(base + ".record.json", write_transform_record(r.record));
  });
  return kExitOk;
}

struct RenderArgs {
  Common common;
  std::string input;
  std::string out_dir;
  std::size_t jobs = 1;
};

int do_render(RenderArgs& a, std::ostream&, std::ostream& err) {
  Settings s = load_settings(a.common);
  const PoseSequence seq = read_pose(a.input, a.common.lenient, err);
  CanvasSpec spec;
  spec.width = static_cast<int>(s.integer("render.width", seq.width));
  spec.height = static_cast<int>(s.integer("render.height", seq.height));
  spec.line_thickness = static_cast<int>(s.integer("render.thickness", spec.line_thickness));
  spec.joint_radius = static_cast<int>(s.integer("render.radius", spec.joint_radius));
  spec.draw_hands = s.boolean("render.hands", spec.draw_hands);
  spec.draw_face = s.boolean("render.face", spec.draw_face);
  spec.visibility_threshold = s.number("render.visibility_threshold", spec.visibility_threshold);
  s.require_all_used();
  validate_canvas(spec);

  const double sx = static_cast<double>(spec.width) / seq.width;
  const double sy = static_cast<double>(spec.height) / seq.height;
  fs::create_directories(a.out_dir);
  parallel_for(seq.frames.size(), a.jobs, [&](std::size_t f) {
    PoseFrame frame = seq.frames[f];
    if (sx != 1.0 || sy != 1.0) {
      auto scale = [&](Keypoint2D& k) {
        k.x *= sx;
        k.y *= sy;
      };
      for (Keypoint2D& k : frame.body) scale(k);
      if (frame.left_hand) for (Keypoint2D& k : *frame.left_hand) scale(k);
      if (frame.right_hand) for (Keypoint2D& k : *frame.right_hand) scale(k);
      if (frame.face) for (Keypoint2D& k : *frame.face) scale(k);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05zu.ppm", f);
    write_text_file((fs::path(a.out_dir) / name).string(), encode_ppm(render_frame(frame, spec)));
  });
  return kExitOk;
}

struct StatsArgs {
  Common common;
  std::vector<std::string> pool;
  std::vector<std::string> driving;
  std::size_t trials = 100;
  std::string json_path;
  bool post_clamp = false;
};

int do_stats(StatsArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(a.common);
  const EpiConfig cfg = epi_config(s);
  s.require_all_used();
  cfg.validate();
  Rng rng(require_seed(a.common, "stats"));
  const AnchorPool pool(read_pool(a.pool, a.common.lenient, err), cfg.visibility_threshold);
  std::vector<PoseSequence> driving;
  for (const std::string& p : a.driving) driving.push_back(read_pose(p, a.common.lenient, err));
  const RatioStatistics stats = ratio_histogram(pool, driving, a.trials, rng, cfg);
  if (a.json_path == "-") {
    out << ratio_statistics_json(stats);
    return kExitOk;
  }
  out << format_ratio_table(stats, a.post_clamp);
  if (!a.json_path.empty()) write_text_file(a.json_path, ratio_statistics_json(stats));
  return kExitOk;
}

struct IpiCheckArgs {
  Common common;
  std::string pose;
  std::string output;
};

int do_ipi_check(IpiCheckArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(a.common);
  const IpiConfig cfg = ipi_config(s);
  GradCheckOptions opts;
  opts.epsilon = s.number("check.epsilon", opts.epsilon);
  opts.tolerance = s.number("check.tolerance", opts.tolerance);
  opts.max_entries_per_block = s.unsigned_integer("check.entries", 16);
  const std::size_t clip_tokens = s.unsigned_integer("check.clip_tokens", 16);
  const std::size_t frames = s.unsigned_integer("check.frames", 8);
  s.require_all_used();
  cfg.validate();
  const std::uint64_t seed = require_seed(a.common, "ipi-check");
  opts.seed = derive_seed(seed, 3);

  PoseSequence pose;
  if (a.pose.empty()) {
    StickFigureOptions fig;
    fig.frames = frames;
    fig.seed = derive_seed(seed, 1);
    pose = make_stick_figure(fig);
  } else {
    pose = read_pose(a.pose, a.common.lenient, err);
  }
  IpiParams params = IpiParams::init(cfg, derive_seed(seed, 0));
  const Matrix clip = synthetic_clip_features(pose, clip_tokens, cfg.d_model, derive_seed(seed, 2));
  const GradCheckReport report = ipi_grad_check(params, cfg, clip, pose, opts);
  emit(a.output, grad_check_json(report), out);
  if (!report.passed) {
    err << "error: gradient check failed: max relative error " << report.max_rel_error << " > "
        << report.tolerance << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

struct TrainSimArgs {
  Common common;
  std::size_t steps = 100;
  std::optional<double> p_ti2v;
  std::optional<double> lambda;
  std::vector<std::string> pool;
  std::string force_task;
  std::string output;
  std::string checkpoint;
  std::string resume;
};

int do_train_sim(TrainSimArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(a.common);
  SimConfig cfg;
  cfg.epi = epi_config(s);
  cfg.ipi = ipi_config(s, cfg.ipi);
  cfg.tasks.p_ti2v = s.number("sim.p_ti2v", cfg.tasks.p_ti2v);
  cfg.tasks.cond_dropout = s.number("sim.cond_dropout", cfg.tasks.cond_dropout);
  cfg.lr_ipi = s.number("sim.lr_ipi", cfg.lr_ipi);
  cfg.lr_other = s.number("sim.lr_other", cfg.lr_other);
  cfg.timesteps = s.unsigned_integer("sim.timesteps", cfg.timesteps);
  cfg.beta_start = s.number("sim.beta_start", cfg.beta_start);
  cfg.beta_end = s.number("sim.beta_end", cfg.beta_end);
  cfg.frames = s.unsigned_integer("sim.frames", cfg.frames);
  cfg.fixed_batch = s.boolean("sim.fixed_batch", cfg.fixed_batch);
  const std::string shape = s.text("sim.schedule", std::string(schedule_shape_name(cfg.schedule)));
  const std::size_t pool_size = s.unsigned_integer("sim.pool_size", 8);
  s.require_all_used();
  const auto parsed_shape = parse_schedule_shape(shape);
  if (!parsed_shape) throw ConfigError("sim.schedule: expected linear or cosine, got '" + shape + "'");
  cfg.schedule = *parsed_shape;
  if (a.p_ti2v) cfg.tasks.p_ti2v = *a.p_ti2v;
  if (a.lambda) cfg.epi.lambda = *a.lambda;
  cfg.seed = require_seed(a.common, "train-sim");
  cfg.tasks.seed = cfg.seed;

  std::optional<Task> force;
  if (a.force_task == "animation") {
    force = Task::kAnimation;
  } else if (a.force_task == "ti2v") {
    force = Task::kTi2v;
  } else if (!a.force_task.empty()) {
    throw UsageError("--force-task expects animation or ti2v");
  }

  std::vector<PoseFrame> anchors = a.pool.empty() ? make_anchor_pool(pool_size, derive_seed(cfg.seed, 5)).anchors
                                                  : read_pool(a.pool, a.common.lenient, err);
  const AnchorPool pool(std::move(anchors), cfg.epi.visibility_threshold);

  SimState state = make_state(cfg, derive_seed(cfg.seed, 4));
  if (!a.resume.empty()) {
    std::vector<NamedMatrix> saved = load_checkpoint(a.resume);
    if (saved.empty() || saved.back().name != "state.step" || saved.back().value.size() != 1) {
      throw SchemaError("state.step", "checkpoint lacks the step counter block");
    }
    state.step = static_cast<std::size_t>(saved.back().value[0]);
    saved.pop_back();
    restore_blocks(state.params.all_blocks(), saved);
  }
  const SimReport report = run_sim(state, a.steps, &pool, force);
  emit(a.output, sim_report_json(report, cfg), out);
  if (!a.checkpoint.empty()) {
    std::vector<ConstParamRef> blocks = std::as_const(state.params).all_blocks();
    const Matrix step(1, 1, static_cast<double>(state.step));
    blocks.push_back({"state.step", &step});
    save_checkpoint(a.checkpoint, blocks);
  }
  return kExitOk;
}

struct SynthArgs {
  Common common;
  std::string kind = "figure";
  std::string output;
  std::size_t frames = 16;
  std::size_t count = 8;
  bool hands = false;
  bool face = false;
  double jitter = 0.0;
  double low = 0.5;
  double high = 2.0;
};

int do_synth(SynthArgs& a, std::ostream& out, std::ostream&) {
  Settings s = load_settings(a.common);
  s.require_all_used();
  const std::uint64_t seed = require_seed(a.common, "synth");
  PoseSequence seq;
  if (a.kind == "figure") {
    StickFigureOptions opts;
    opts.frames = a.frames;
    opts.hands = a.hands;
    opts.face = a.face;
    opts.jitter = a.jitter;
    opts.seed = seed;
    seq = make_stick_figure(opts);
  } else if (a.kind == "pool") {
    if (a.count == 0) throw UsageError("--count must be positive");
    const SyntheticPool pool = make_anchor_pool(a.count, seed, a.low, a.high);
    seq.width = 512;
    seq.height = 512;
    seq.fps = 30.0;
    seq.frames = pool.anchors;
  } else {
    throw UsageError("--kind expects figure or pool");
  }
  emit(a.output, write_pose_json(seq), out);
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage:
      return kExitUsage;
    case ErrorKind::kData:
      return kExitData;
    case ErrorKind::kNumerical:
      return kExitNumerical;
  }
  return kExitData;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"posekit: pose transformation, rendering and training-simulation toolkit", "posekit"};
  app.require_subcommand(1, 1);

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "COCO-WholeBody detections to the canonical pose format");
  add_common(c, convert.common, false);
  c->add_option("input", convert.input, "COCO-WholeBody JSON")->required();
  c->add_option("-o,--output", convert.output, "Output path (default: stdout)");

  RealignArgs realign;
  auto* r = app.add_subcommand("realign", "Retarget a driving sequence to an anchor's proportions");
  add_common(r, realign.common, false);
  r->add_option("input", realign.input, "Driving pose sequence")->required();
  r->add_option("--anchor", realign.anchor, "Pose file holding the anchor")->required();
  r->add_option("--anchor-frame", realign.anchor_frame, "Frame of the anchor file to use");
  r->add_option("-o,--output", realign.output, "Output path (default: stdout)");
  r->add_option("--record", realign.record, "Write the transform record here");

  RescaleArgs rescale;
  auto* rs = app.add_subcommand("rescale", "Apply a rescale plan");
  add_common(rs, rescale.common, true);
  rs->add_option("input", rescale.input, "Pose sequence")->required();
  rs->add_option("--plan", rescale.plan, "Plan JSON");
  rs->add_flag("--sample", rescale.sample, "Sample a plan from the op pool (needs --seed)");
  rs->add_option("-o,--output", rescale.output, "Output path (default: stdout)");
  rs->add_option("--record", rescale.record, "Write the transform record here");

  AugmentArgs augment;
  auto* au = app.add_subcommand("augment", "Batch explicit pose transformation with side-car records");
  add_common(au, augment.common, true);
  au->add_option("inputs", augment.inputs, "Driving pose sequences")->required();
  au->add_option("--pool", augment.pool, "Anchor pool files (every frame is one anchor)")->required();
  au->add_option("--lambda", augment.lambda, "Transformation probability");
  au->add_option("--trials", augment.trials, "Outputs per input");
  au->add_option("--out-dir", augment.out_dir, "Output directory")->required();
  au->add_option("--jobs", augment.jobs, "Worker threads (0: all cores)");

  RenderArgs render;
  auto* re = app.add_subcommand("render", "Render frames to binary PPM");
  add_common(re, render.common, false);
  re->add_option("input", render.input, "Pose sequence")->required();
  re->add_option("--out-dir", render.out_dir, "Output directory")->required();
  re->add_option("--jobs", render.jobs, "Worker threads (0: all cores)");

  StatsArgs stats;
  auto* st = app.add_subcommand("stats", "Rescaling-ratio statistics of a pool against driving poses");
  add_common(st, stats.common, true);
  st->add_option("--pool", stats.pool, "Anchor pool files")->required();
  st->add_option("--driving", stats.driving, "Driving pose files")->required();
  st->add_option("--trials", stats.trials, "Driving draws");
  st->add_option("--json", stats.json_path, "Also write JSON here ('-' prints JSON instead of the table)");
  st->add_flag("--post-clamp", stats.post_clamp, "Tabulate clamped ratios");

  IpiCheckArgs ipi;
  auto* ic = app.add_subcommand("ipi-check", "Finite-difference check of the implicit pose indicator");
  add_common(ic, ipi.common, true);
  ic->add_option("--pose", ipi.pose, "Driving pose (default: synthetic figure)");
  ic->add_option("-o,--output", ipi.output, "Report path (default: stdout)");

  TrainSimArgs sim;
  auto* ts = app.add_subcommand("train-sim", "Multi-task training simulation");
  add_common(ts, sim.common, true);
  ts->add_option("--steps", sim.steps, "Training steps");
  ts->add_option("--p-ti2v", sim.p_ti2v, "Probability of a TI2V step");
  ts->add_option("--lambda", sim.lambda, "Transformation probability");
  ts->add_option("--pool", sim.pool, "Anchor pool files (default: synthetic pool)");
  ts->add_option("--force-task", sim.force_task, "animation or ti2v for every step");
  ts->add_option("-o,--output", sim.output, "Report path (default: stdout)");
  ts->add_option("--checkpoint", sim.checkpoint, "Save parameters here afterwards");
  ts->add_option("--resume", sim.resume, "Load parameters from a checkpoint first");

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate synthetic pose fixtures");
  add_common(sy, synth.common, true);
  sy->add_option("--kind", synth.kind, "figure or pool");
  sy->add_option("-o,--output", synth.output, "Output path (default: stdout)");
  sy->add_option("--frames", synth.frames, "Frames (figure)");
  sy->add_option("--count", synth.count, "Anchors (pool)");
  sy->add_flag("--hands", synth.hands, "Include hand blocks (figure)");
  sy->add_flag("--face", synth.face, "Include the face block (figure)");
  sy->add_option("--jitter", synth.jitter, "Per-frame bone angle noise (figure)");
  sy->add_option("--low", synth.low, "Smallest group scale (pool)");
  sy->add_option("--high", synth.high, "Largest group scale (pool)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (c->parsed()) return do_convert(convert, out, err);
    if (r->parsed()) return do_realign(realign, out, err);
    if (rs->parsed()) return do_rescale(rescale, out, err);
    if (au->parsed()) return do_augment(augment, out, err);
    if (re->parsed()) return do_render(render, out, err);
    if (st->parsed()) return do_stats(stats, out, err);
    if (ic->parsed()) return do_ipi_check(ipi, out, err);
    if (ts->parsed()) return do_train_sim(sim, out, err);
    if (sy->parsed()) return do_synth(synth, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace posekit::cli
