#include "posekit/ipi.hpp"

#include <cmath>
#include <string>

#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"
#include "posekit/rng.hpp"

namespace posekit {
namespace {

constexpr std::size_t kLayerBlockCount = 12;

AttentionLayerParams init_layer(std::size_t d, std::size_t hidden, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  const double sh = 1.0 / std::sqrt(static_cast<double>(hidden));
  AttentionLayerParams p;
  p.w_q = Matrix::random_normal(d, d, rng, s);
  p.w_k = Matrix::random_normal(d, d, rng, s);
  p.w_v = Matrix::random_normal(d, d, rng, s);
  p.w_o = Matrix::random_normal(d, d, rng, s);
  p.ln1_gain = Matrix::random_normal(1, d, rng, 0.1);
  for (double& v : p.ln1_gain.values()) v += 1.0;
  p.ln1_bias = Matrix::random_normal(1, d, rng, 0.1);
  p.ffn_w1 = Matrix::random_normal(d, hidden, rng, s);
  p.ffn_b1 = Matrix::random_normal(1, hidden, rng, 0.1);
  p.ffn_w2 = Matrix::random_normal(hidden, d, rng, sh);
  p.ffn_b2 = Matrix::random_normal(1, d, rng, 0.1);
  p.ln2_gain = Matrix::random_normal(1, d, rng, 0.1);
  for (double& v : p.ln2_gain.values()) v += 1.0;
  p.ln2_bias = Matrix::random_normal(1, d, rng, 0.1);
  return p;
}

AttentionLayerParams zero_layer(std::size_t d, std::size_t hidden) {
  AttentionLayerParams p;
  p.w_q = p.w_k = p.w_v = p.w_o = Matrix(d, d);
  p.ln1_gain = p.ln1_bias = p.ln2_gain = p.ln2_bias = p.ffn_b2 = Matrix(1, d);
  p.ffn_w1 = Matrix(d, hidden);
  p.ffn_b1 = Matrix(1, hidden);
  p.ffn_w2 = Matrix(hidden, d);
  return p;
}

template <typename Layer, typename Fn>
void for_each_block(Layer& l, const std::string& prefix, Fn&& fn) {
  fn(prefix + "w_q", l.w_q);
  fn(prefix + "w_k", l.w_k);
  fn(prefix + "w_v", l.w_v);
  fn(prefix + "w_o", l.w_o);
  fn(prefix + "ln1_gain", l.ln1_gain);
  fn(prefix + "ln1_bias", l.ln1_bias);
  fn(prefix + "ffn_w1", l.ffn_w1);
  fn(prefix + "ffn_b1", l.ffn_b1);
  fn(prefix + "ffn_w2", l.ffn_w2);
  fn(prefix + "ffn_b2", l.ffn_b2);
  fn(prefix + "ln2_gain", l.ln2_gain);
  fn(prefix + "ln2_bias", l.ln2_bias);
}

template <typename Params, typename Fn>
void for_each_block(Params& p, Fn&& fn) {
  fn(std::string("learnable_query"), p.learnable_query);
  fn(std::string("embed_w"), p.embed_w);
  fn(std::string("embed_b"), p.embed_b);
  for (std::size_t i = 0; i < p.encoder.size(); ++i) {
    for_each_block(p.encoder[i], "encoder." + std::to_string(i) + ".", fn);
  }
  for (std::size_t i = 0; i < p.extractor.size(); ++i) {
    for_each_block(p.extractor[i], "extractor." + std::to_string(i) + ".", fn);
  }
}

AttentionLayerVars bind_layer(std::span<const Var> v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void IpiConfig::validate() const {
  if (d_model == 0) throw ConfigError("d_model must be positive");
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
  if (n_learnable_queries < 1) throw ConfigError("n_learnable_queries must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (ffn_multiplier < 1) throw ConfigError("ffn_multiplier must be >= 1");
  if (!(layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
}

IpiParams IpiParams::init(const IpiConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const std::size_t d = cfg.d_model;
  IpiParams p;
  p.learnable_query = Matrix::random_normal(cfg.n_learnable_queries, d, rng, 1.0);
  p.embed_w = Matrix::random_normal(kKeypointFeatureCount, d, rng,
                                    1.0 / std::sqrt(static_cast<double>(kKeypointFeatureCount)));
  p.embed_b = Matrix::random_normal(1, d, rng, 0.1);
  for (std::size_t i = 0; i < cfg.keypoint_encoder_layers; ++i) {
    p.encoder.push_back(init_layer(d, cfg.ffn_hidden(), rng));
  }
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    p.extractor.push_back(init_layer(d, cfg.ffn_hidden(), rng));
  }
  return p;
}

IpiParams IpiParams::zeros(const IpiConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.d_model;
  IpiParams p;
  p.learnable_query = Matrix(cfg.n_learnable_queries, d);
  p.embed_w = Matrix(kKeypointFeatureCount, d);
  p.embed_b = Matrix(1, d);
  p.encoder.assign(cfg.keypoint_encoder_layers, zero_layer(d, cfg.ffn_hidden()));
  p.extractor.assign(cfg.n_layers, zero_layer(d, cfg.ffn_hidden()));
  return p;
}

std::vector<ParamRef> IpiParams::blocks() {
  std::vector<ParamRef> out;
  for_each_block(*this, [&](const std::string& name, Matrix& m) { out.push_back({name, &m}); });
  return out;
}

std::vector<ConstParamRef> IpiParams::blocks() const {
  std::vector<ConstParamRef> out;
  for_each_block(*this, [&](const std::string& name, const Matrix& m) { out.push_back({name, &m}); });
  return out;
}

void IpiParams::validate(const IpiConfig& cfg) const {
  const IpiParams ref = zeros(cfg);
  const auto mine = blocks();
  const auto want = ref.blocks();
  if (mine.size() != want.size()) {
    throw ShapeError("parameter block count " + std::to_string(mine.size()) + " does not match config (" +
                     std::to_string(want.size()) + ")");
  }
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (!mine[i].value->same_shape(*want[i].value)) {
      throw ShapeError(mine[i].name + ": " + mine[i].value->shape_string() + " vs expected " +
                       want[i].value->shape_string());
    }
    if (!all_finite(*mine[i].value)) throw NumericalError(mine[i].name + ": non-finite entries");
  }
}

IpiVars IpiVars::bind(Tape& tape, const IpiParams& params, bool trainable) {
  std::vector<Var> leaves;
  for (const ConstParamRef& b : params.blocks()) {
    leaves.push_back(trainable ? tape.parameter(*b.value) : tape.constant(*b.value));
  }
  IpiConfig cfg;
  cfg.keypoint_encoder_layers = params.encoder.size();
  cfg.n_layers = params.extractor.size();
  return from_leaves(leaves, cfg);
}

IpiVars IpiVars::from_leaves(std::span<const Var> leaves, const IpiConfig& cfg) {
  const std::size_t want = 3 + kLayerBlockCount * (cfg.keypoint_encoder_layers + cfg.n_layers);
  if (leaves.size() != want) {
    throw ShapeError("expected " + std::to_string(want) + " IPI leaves, got " +
                     std::to_string(leaves.size()));
  }
  IpiVars v;
  v.learnable_query = leaves[0];
  v.embed_w = leaves[1];
  v.embed_b = leaves[2];
  std::size_t at = 3;
  for (std::size_t i = 0; i < cfg.keypoint_encoder_layers; ++i, at += kLayerBlockCount) {
    v.encoder.push_back(bind_layer(leaves.subspan(at, kLayerBlockCount)));
  }
  for (std::size_t i = 0; i < cfg.n_layers; ++i, at += kLayerBlockCount) {
    v.extractor.push_back(bind_layer(leaves.subspan(at, kLayerBlockCount)));
  }
  return v;
}

std::vector<Var> IpiVars::leaves() const {
  std::vector<Var> out{learnable_query, embed_w, embed_b};
  auto push = [&](const AttentionLayerVars& l) {
    out.insert(out.end(), {l.w_q, l.w_k, l.w_v, l.w_o, l.ln1_gain, l.ln1_bias, l.ffn_w1, l.ffn_b1,
                           l.ffn_w2, l.ffn_b2, l.ln2_gain, l.ln2_bias});
  };
  for (const auto& l : encoder) push(l);
  for (const auto& l : extractor) push(l);
  return out;
}

Matrix keypoint_tokens(const PoseSequence& pose) {
  if (pose.frames.empty()) throw UsageError("keypoint encoder needs at least one frame");
  if (pose.width <= 0 || pose.height <= 0) throw UsageError("pose canvas size must be positive");
  const double w = pose.width;
  const double h = pose.height;
  Matrix out(pose.frames.size(), kKeypointFeatureCount);
  for (std::size_t f = 0; f < pose.frames.size(); ++f) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const Keypoint2D& k = pose.frames[f].body[j];
      out(f, 3 * j) = k.x / w;
      out(f, 3 * j + 1) = k.y / h;
      out(f, 3 * j + 2) = k.confidence;
    }
  }
  return out;
}

Matrix positional_encoding(std::size_t rows, std::size_t dim) {
  Matrix out(rows, dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double freq = std::pow(10000.0, -static_cast<double>(j - j % 2) / static_cast<double>(dim));
      const double a = static_cast<double>(i) * freq;
      out(i, j) = j % 2 == 0 ? std::sin(a) : std::cos(a);
    }
  }
  return out;
}

Var multi_head_attention(Var x, Var context, Var w_q, Var w_k, Var w_v, Var w_o,
                         std::size_t n_heads, std::vector<Matrix>* weights) {
  const std::size_t d = w_q.cols();
  if (x.cols() != w_q.rows() || context.cols() != w_k.rows()) {
    throw ShapeError("attention input " + x.value().shape_string() + " / context " +
                     context.value().shape_string() + " vs projection " +
                     w_q.value().shape_string());
  }
  if (n_heads == 0 || d % n_heads != 0) throw ShapeError("model width not divisible by heads");
  const std::size_t dh = d / n_heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  const Var q = ops::matmul(x, w_q);
  const Var k = ops::matmul(context, w_k);
  const Var v = ops::matmul(context, w_v);
  Var merged;
  for (std::size_t h = 0; h < n_heads; ++h) {
    const Var qh = ops::slice_cols(q, h * dh, dh);
    const Var kh = ops::slice_cols(k, h * dh, dh);
    const Var vh = ops::slice_cols(v, h * dh, dh);
    const Var a = ops::softmax_rows(ops::scale(ops::matmul_nt(qh, kh), inv));
    if (weights) weights->push_back(a.value());
    const Var oh = ops::matmul(a, vh);
    merged = h == 0 ? oh : ops::concat_cols(merged, oh);
  }
  return ops::matmul(merged, w_o);
}

Var attention_layer(Var x, Var context, const AttentionLayerVars& p, const IpiConfig& cfg,
                    std::vector<Matrix>* weights) {
  const Var attn = multi_head_attention(x, context, p.w_q, p.w_k, p.w_v, p.w_o, cfg.n_heads, weights);
  const Var h1 = ops::layer_norm_rows(ops::add(x, attn), p.ln1_gain, p.ln1_bias, cfg.layer_norm_eps);
  const Var hidden = ops::tanh(ops::add_row(ops::matmul(h1, p.ffn_w1), p.ffn_b1));
  const Var ffn = ops::add_row(ops::matmul(hidden, p.ffn_w2), p.ffn_b2);
  return ops::layer_norm_rows(ops::add(h1, ffn), p.ln2_gain, p.ln2_bias, cfg.layer_norm_eps);
}

Var encode_keypoints(Tape& tape, const IpiVars& vars, const Matrix& tokens, const IpiConfig& cfg,
                     IpiTrace* trace) {
  if (tokens.rows() == 0) throw UsageError("keypoint encoder needs at least one frame");
  if (tokens.cols() != kKeypointFeatureCount) {
    throw ShapeError("keypoint tokens " + tokens.shape_string() + " vs expected width " +
                     std::to_string(kKeypointFeatureCount));
  }
  Var x = ops::add_row(ops::matmul(tape.constant(tokens), vars.embed_w), vars.embed_b);
  x = ops::add(x, tape.constant(positional_encoding(tokens.rows(), cfg.d_model)));
  for (const AttentionLayerVars& layer : vars.encoder) {
    std::vector<Matrix>* w = nullptr;
    if (trace) w = &trace->encoder_attention.emplace_back();
    x = attention_layer(x, x, layer, cfg, w);
  }
  return ops::pool_rows(x, cfg.n_learnable_queries);
}

Var ipi_forward(Tape& tape, const IpiVars& vars, Var clip_feats, const Matrix& tokens,
                const IpiConfig& cfg, IpiTrace* trace) {
  if (clip_feats.cols() != cfg.d_model) {
    throw ShapeError("clip features " + clip_feats.value().shape_string() + " vs d_model " +
                     std::to_string(cfg.d_model) + " (query " +
                     vars.learnable_query.value().shape_string() + ")");
  }
  if (clip_feats.rows() == 0) throw ShapeError("clip features have no tokens");
  const Var q_p = encode_keypoints(tape, vars, tokens, cfg, trace);
  Var x = ops::add(q_p, vars.learnable_query);
  for (const AttentionLayerVars& layer : vars.extractor) {
    std::vector<Matrix>* w = nullptr;
    if (trace) w = &trace->extractor_attention.emplace_back();
    x = attention_layer(x, clip_feats, layer, cfg, w);
  }
  return x;
}

Matrix encode_keypoints(const PoseSequence& pose, const IpiParams& params, const IpiConfig& cfg) {
  cfg.validate();
  params.validate(cfg);
  Tape tape;
  const IpiVars vars = IpiVars::bind(tape, params, false);
  return encode_keypoints(tape, vars, keypoint_tokens(pose), cfg).value();
}

Matrix ipi_forward(const Matrix& clip_feats, const PoseSequence& pose, const IpiParams& params,
                   const IpiConfig& cfg, IpiTrace* trace) {
  cfg.validate();
  params.validate(cfg);
  Tape tape;
  const IpiVars vars = IpiVars::bind(tape, params, false);
  return ipi_forward(tape, vars, tape.constant(clip_feats), keypoint_tokens(pose), cfg, trace).value();
}

Matrix residual_inject(const Matrix& x, const Matrix& f_i, double alpha) {
  require_same_shape(x, f_i, "residual_inject");
  if (alpha == 0.0) return x;
  Matrix out = x;
  axpy(out, alpha, f_i);
  return out;
}

Matrix synthetic_clip_features(const PoseSequence& pose, std::size_t tokens, std::size_t dim,
                               std::uint64_t seed) {
  if (tokens == 0 || dim == 0) throw UsageError("clip feature shape must be positive");
  Rng rng(derive_seed(seed, fnv1a(write_pose_json(pose))));
  return Matrix::random_normal(tokens, dim, rng, 1.0);
}

GradCheckReport ipi_grad_check(IpiParams& params, const IpiConfig& cfg, const Matrix& clip_feats,
                               const PoseSequence& pose, const GradCheckOptions& opts,
                               const IpiProbe& probe) {
  cfg.validate();
  params.validate(cfg);
  const Matrix tokens = keypoint_tokens(pose);
  const std::vector<ParamRef> blocks = params.blocks();
  auto loss = [&](Tape& tape, std::span<const Var> leaves) {
    const IpiVars vars = IpiVars::from_leaves(leaves, cfg);
    const Var out = ipi_forward(tape, vars, tape.constant(clip_feats), tokens, cfg);
    return probe ? probe(out) : ops::sum_squares(out);
  };
  return grad_check(blocks, loss, opts);
}

}  // namespace posekit
