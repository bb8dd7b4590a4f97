#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "posekit/autograd.hpp"
#include "posekit/grad_check.hpp"
#include "posekit/matrix.hpp"
#include "posekit/skeleton.hpp"

namespace posekit {

/// Features per keypoint token: (x / width, y / height, confidence) per joint.
inline constexpr std::size_t kKeypointFeatureCount = 3 * kJointCount;

struct IpiConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t n_learnable_queries = 4;
  double alpha = 1.0;
  std::size_t keypoint_encoder_layers = 1;
  std::size_t ffn_multiplier = 2;
  double layer_norm_eps = 1e-5;

  std::size_t ffn_hidden() const { return ffn_multiplier * d_model; }
  /// Throws ConfigError.
  void validate() const;
};

/// Post-norm transformer block: attention + residual + norm, FFN + residual + norm.
struct AttentionLayerParams {
  Matrix w_q, w_k, w_v, w_o;
  Matrix ln1_gain, ln1_bias;
  Matrix ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Matrix ln2_gain, ln2_bias;
};

struct IpiParams {
  Matrix learnable_query;  // q_l
  Matrix embed_w, embed_b;
  std::vector<AttentionLayerParams> encoder;
  std::vector<AttentionLayerParams> extractor;

  /// Scaled-normal weights, gains near one, small biases.
  static IpiParams init(const IpiConfig& cfg, std::uint64_t seed);
  static IpiParams zeros(const IpiConfig& cfg);

  std::vector<ParamRef> blocks();
  std::vector<ConstParamRef> blocks() const;
  /// Throws ShapeError / NumericalError.
  void validate(const IpiConfig& cfg) const;
};

struct AttentionLayerVars {
  Var w_q, w_k, w_v, w_o;
  Var ln1_gain, ln1_bias;
  Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Var ln2_gain, ln2_bias;
};

/// Tape leaves for IpiParams, in blocks() order.
struct IpiVars {
  Var learnable_query;
  Var embed_w, embed_b;
  std::vector<AttentionLayerVars> encoder;
  std::vector<AttentionLayerVars> extractor;

  static IpiVars bind(Tape& tape, const IpiParams& params, bool trainable);
  static IpiVars from_leaves(std::span<const Var> leaves, const IpiConfig& cfg);
  std::vector<Var> leaves() const;
};

/// Per-layer, per-head attention weights (queries x keys).
struct IpiTrace {
  std::vector<std::vector<Matrix>> encoder_attention;
  std::vector<std::vector<Matrix>> extractor_attention;
};

/// Frames x 54 matrix of normalized keypoint features. Throws UsageError on an
/// empty sequence.
Matrix keypoint_tokens(const PoseSequence& pose);

/// Fixed sinusoidal frame-index encoding added to the embedded keypoint tokens.
Matrix positional_encoding(std::size_t rows, std::size_t dim);

/// softmax(Q K^T / sqrt(d_head)) V per head, concatenated and projected by w_o.
Var multi_head_attention(Var x, Var context, Var w_q, Var w_k, Var w_v, Var w_o,
                         std::size_t n_heads, std::vector<Matrix>* weights = nullptr);

Var attention_layer(Var x, Var context, const AttentionLayerVars& p, const IpiConfig& cfg,
                    std::vector<Matrix>* weights = nullptr);

Var encode_keypoints(Tape& tape, const IpiVars& vars, const Matrix& tokens, const IpiConfig& cfg,
                     IpiTrace* trace = nullptr);
Var ipi_forward(Tape& tape, const IpiVars& vars, Var clip_feats, const Matrix& tokens,
                const IpiConfig& cfg, IpiTrace* trace = nullptr);

/// q_p: n_learnable_queries x d_model.
Matrix encode_keypoints(const PoseSequence& pose, const IpiParams& params, const IpiConfig& cfg);
/// f_i: n_learnable_queries x d_model.
Matrix ipi_forward(const Matrix& clip_feats, const PoseSequence& pose, const IpiParams& params,
                   const IpiConfig& cfg, IpiTrace* trace = nullptr);

/// x + alpha * f_i
Matrix residual_inject(const Matrix& x, const Matrix& f_i, double alpha);

/// Deterministic stand-in for image-encoder features of a driving sequence.
Matrix synthetic_clip_features(const PoseSequence& pose, std::size_t tokens, std::size_t dim,
                               std::uint64_t seed);

/// Scalar probe applied to the ipi_forward output.
using IpiProbe = std::function<Var(Var)>;

/// grad_check over every IpiParams block with the given probe (default: sum of squares).
GradCheckReport ipi_grad_check(IpiParams& params, const IpiConfig& cfg, const Matrix& clip_feats,
                               const PoseSequence& pose, const GradCheckOptions& opts = {},
                               const IpiProbe& probe = nullptr);

}  // namespace posekit
