#pragma once

// Explicit pose transformation: realignment of a driving pose track to an
// anchor's body proportions, the rescale operation pool, and the
// probability-gated combination of both used during training.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "posekit/rng.hpp"
#include "posekit/skeleton.hpp"

namespace posekit {

enum class RefFramePolicy {
  kFirst,   // driving reference lengths come from frame 0
  kMedian,  // per-bone median over the frames where the bone is visible
};

std::string_view policy_name(RefFramePolicy p);
std::optional<RefFramePolicy> parse_policy(std::string_view name);

struct EpiConfig {
  double lambda = 0.98;
  double factor_low = 1.0 / 3.0;  // ScaleGroup factors are log-uniform on [low, high]
  double factor_high = 3.0;
  double ratio_min = 0.001;
  double ratio_max = 10.0;
  int max_ops_per_plan = 3;
  RefFramePolicy ref_frame_policy = RefFramePolicy::kMedian;
  double p_rescale = 0.5;  // chance of a rescale plan after realignment
  std::uint64_t seed = 0;
  double visibility_threshold = kDefaultVisibilityThreshold;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Parts that can be dropped or synthesized.
enum class BodyPart : std::size_t {
  kLeftArm = 0,
  kRightArm,
  kLeftLeg,
  kRightLeg,
  kFace,
  kLeftHand,
  kRightHand,
};

inline constexpr std::size_t kBodyPartCount = 7;

std::string_view part_name(BodyPart p);
std::optional<BodyPart> parse_part(std::string_view name);

struct ScaleGroup {
  PartGroup group;
  double factor;

  friend bool operator==(const ScaleGroup&, const ScaleGroup&) = default;
};

struct DropPart {
  BodyPart part;

  friend bool operator==(const DropPart&, const DropPart&) = default;
};

/// Synthesizes the part from the canonical proportion table, scaled by the
/// frame's torso length and attached at the part's parent joint.
struct AddPart {
  BodyPart part;

  friend bool operator==(const AddPart&, const AddPart&) = default;
};

using RescaleOp = std::variant<ScaleGroup, DropPart, AddPart>;

struct RescalePlan {
  std::vector<RescaleOp> ops;

  /// Factors within [ratio_min, ratio_max], positive and finite; no
  /// (kind, part) pair repeated. Throws ConfigError.
  void validate(const EpiConfig& cfg) const;

  friend bool operator==(const RescalePlan&, const RescalePlan&) = default;
};

/// Size of the op pool: one ScaleGroup per part group plus one DropPart and
/// one AddPart per body part.
inline constexpr std::size_t kRescalePoolSize = kPartGroupCount + 2 * kBodyPartCount;

class AnchorPool {
 public:
  /// Every anchor needs a visible neck, shoulder and hip; throws
  /// UnalignableError naming the first offending anchor, UsageError if empty.
  explicit AnchorPool(std::vector<PoseFrame> anchors,
                      double visibility_threshold = kDefaultVisibilityThreshold);

  const std::vector<PoseFrame>& anchors() const { return anchors_; }
  std::size_t size() const { return anchors_.size(); }
  const PoseFrame& operator[](std::size_t i) const { return anchors_.at(i); }

 private:
  std::vector<PoseFrame> anchors_;
};

void check_anchor(const PoseFrame& anchor, double visibility_threshold = kDefaultVisibilityThreshold);

struct BoneRatios {
  std::array<double, kBoneCount> ratio{};    // clamped; 1 where not measured
  std::array<double, kBoneCount> raw{};      // anchor / driving before clamping
  std::array<bool, kBoneCount> measured{};   // bone visible on both sides
  double torso_ratio = 1.0;                  // clamped
  double face_ratio = 1.0;                   // mean of measured face-bone ratios
};

/// Ratios without the alignability checks; bones lacking a visible side keep
/// ratio 1 and measured = false. Never throws.
BoneRatios measure_bone_ratios(const PoseSequence& driving, const PoseFrame& anchor,
                               const EpiConfig& cfg);

/// Per-bone length ratios anchor / driving reference, clamped to
/// [ratio_min, ratio_max]. Throws UnalignableError when no driving frame has
/// a visible torso or the anchor fails check_anchor.
BoneRatios compute_bone_ratios(const PoseSequence& driving, const PoseFrame& anchor,
                               const EpiConfig& cfg);

/// Retargets every frame to the anchor's proportions while keeping each
/// bone's direction, and moves the track so frame 0's neck sits on the
/// anchor's neck.
PoseSequence realign(const PoseSequence& driving, const PoseFrame& anchor, const EpiConfig& cfg);

/// realign() with precomputed ratios.
PoseSequence realign_with_ratios(const PoseSequence& driving, const PoseFrame& anchor,
                                 const BoneRatios& ratios, const EpiConfig& cfg);

/// Draws k ~ U{1..max_ops_per_plan} distinct ops from the pool.
RescalePlan sample_rescale_plan(Rng& rng, const EpiConfig& cfg);

struct RescaleWarning {
  std::size_t op_index = 0;
  std::string message;

  friend bool operator==(const RescaleWarning&, const RescaleWarning&) = default;
};

struct RescaleResult {
  PoseSequence sequence;
  std::vector<RescaleWarning> warnings;
};

RescaleResult apply_rescale(const PoseSequence& seq, const RescalePlan& plan,
                            double visibility_threshold = kDefaultVisibilityThreshold);

struct TransformRecord {
  bool applied = false;
  std::optional<std::size_t> anchor_index;
  std::optional<RescalePlan> plan;
  std::array<double, kBoneCount> per_bone_ratio;
  double torso_ratio = 1.0;
  std::vector<RescaleWarning> warnings;

  TransformRecord() { per_bone_ratio.fill(1.0); }
};

struct EpiResult {
  PoseSequence sequence;
  TransformRecord record;
};

/// With probability lambda: realign to a uniformly drawn anchor, then with
/// probability p_rescale apply one sampled plan. Otherwise returns the input.
EpiResult epi_transform(const PoseSequence& seq, const AnchorPool& pool, const EpiConfig& cfg,
                        Rng& rng);

std::string write_rescale_plan(const RescalePlan& plan);
/// {"ops": [{"op": "scale_group", "group": "...", "factor": x},
///          {"op": "drop_part", "part": "..."}, {"op": "add_part", "part": "..."}]}
RescalePlan parse_rescale_plan(std::string_view text);

/// Side-car record:
/// {"applied": bool, "anchor_index": int|null, "plan": {...}|null,
///  "torso_ratio": x, "per_bone_ratio": {"neck->r_shoulder": x, ...},
///  "warnings": [{"op_index": i, "message": "..."}]}
std::string write_transform_record(const TransformRecord& record);

}  // namespace posekit
