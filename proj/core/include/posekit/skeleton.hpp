#pragma once

// Canonical Body-18 skeleton: joints, kinematic tree, part groups, frames and
// sequences, plus per-bone geometry.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace posekit {

/// Keypoints whose confidence is below this are treated as missing.
inline constexpr double kDefaultVisibilityThreshold = 0.05;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Keypoint2D {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  Point2 position() const { return {x, y}; }
  bool visible(double threshold = kDefaultVisibilityThreshold) const {
    return confidence >= threshold;
  }

  friend bool operator==(const Keypoint2D&, const Keypoint2D&) = default;
};

/// OpenPose Body-18 joint order.
enum class Joint : std::size_t {
  kNose = 0,
  kNeck,
  kRightShoulder,
  kRightElbow,
  kRightWrist,
  kLeftShoulder,
  kLeftElbow,
  kLeftWrist,
  kRightHip,
  kRightKnee,
  kRightAnkle,
  kLeftHip,
  kLeftKnee,
  kLeftAnkle,
  kRightEye,
  kLeftEye,
  kRightEar,
  kLeftEar,
};

inline constexpr std::size_t kJointCount = 18;
inline constexpr std::size_t kBoneCount = 17;
inline constexpr std::size_t kHandKeypointCount = 21;
inline constexpr std::size_t kFaceKeypointCount = 68;
inline constexpr std::size_t kCocoWholeBodyCount = 133;

constexpr std::size_t index_of(Joint j) { return static_cast<std::size_t>(j); }

/// Rescalable part groups. The first six are the rows of the ratio statistics.
enum class PartGroup : std::size_t {
  kShoulder = 0,
  kBody,
  kUpperArm,
  kLowerArm,
  kUpperLeg,
  kLowerLeg,
  kNeck,
  kFace,
};

inline constexpr std::size_t kPartGroupCount = 8;
inline constexpr std::size_t kStatisticsGroupCount = 6;

struct Bone {
  Joint parent;
  Joint child;
  PartGroup group;
};

/// Kinematic tree rooted at the neck, listed parents-before-children so a
/// single forward pass places every joint.
inline constexpr std::array<Bone, kBoneCount> kBones{{
    {Joint::kNeck, Joint::kRightShoulder, PartGroup::kShoulder},
    {Joint::kNeck, Joint::kLeftShoulder, PartGroup::kShoulder},
    {Joint::kRightShoulder, Joint::kRightElbow, PartGroup::kUpperArm},
    {Joint::kRightElbow, Joint::kRightWrist, PartGroup::kLowerArm},
    {Joint::kLeftShoulder, Joint::kLeftElbow, PartGroup::kUpperArm},
    {Joint::kLeftElbow, Joint::kLeftWrist, PartGroup::kLowerArm},
    {Joint::kNeck, Joint::kRightHip, PartGroup::kBody},
    {Joint::kRightHip, Joint::kRightKnee, PartGroup::kUpperLeg},
    {Joint::kRightKnee, Joint::kRightAnkle, PartGroup::kLowerLeg},
    {Joint::kNeck, Joint::kLeftHip, PartGroup::kBody},
    {Joint::kLeftHip, Joint::kLeftKnee, PartGroup::kUpperLeg},
    {Joint::kLeftKnee, Joint::kLeftAnkle, PartGroup::kLowerLeg},
    {Joint::kNeck, Joint::kNose, PartGroup::kNeck},
    {Joint::kNose, Joint::kRightEye, PartGroup::kFace},
    {Joint::kRightEye, Joint::kRightEar, PartGroup::kFace},
    {Joint::kNose, Joint::kLeftEye, PartGroup::kFace},
    {Joint::kLeftEye, Joint::kLeftEar, PartGroup::kFace},
}};

inline constexpr Joint kRootJoint = Joint::kNeck;

/// Bone indices of the two neck->hip bones.
inline constexpr std::array<std::size_t, 2> kTorsoBones{6, 9};

std::string_view joint_name(Joint j);
std::string_view joint_name(std::size_t index);
std::string_view group_name(PartGroup g);
/// Title used in statistics tables, e.g. "Shoulder Length".
std::string_view group_title(PartGroup g);
std::optional<PartGroup> parse_group(std::string_view name);
/// "<parent>-><child>", e.g. "neck->r_shoulder".
std::string bone_name(std::size_t bone_index);

/// Parent bone index of each joint; nullopt for the root.
std::optional<std::size_t> parent_bone_of(Joint j);
std::vector<std::size_t> bones_in_group(PartGroup g);

/// Depth-first traversal order of joints starting at the root.
std::vector<Joint> traverse_from_root();

using BodyKeypoints = std::array<Keypoint2D, kJointCount>;
using HandKeypoints = std::array<Keypoint2D, kHandKeypointCount>;
using FaceKeypoints = std::array<Keypoint2D, kFaceKeypointCount>;

struct PoseFrame {
  BodyKeypoints body{};
  std::optional<HandKeypoints> left_hand;
  std::optional<HandKeypoints> right_hand;
  std::optional<FaceKeypoints> face;

  const Keypoint2D& operator[](Joint j) const { return body[index_of(j)]; }
  Keypoint2D& operator[](Joint j) { return body[index_of(j)]; }

  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

struct PoseSequence {
  std::vector<PoseFrame> frames;
  int width = 0;
  int height = 0;
  double fps = 30.0;

  friend bool operator==(const PoseSequence&, const PoseSequence&) = default;
};

/// Converts one COCO-WholeBody detection (17 body, 6 foot, 68 face, 21 left
/// hand, 21 right hand) into a Body-18 frame. The neck is the shoulder
/// midpoint with the smaller shoulder confidence; feet are dropped.
/// Throws SchemaError unless exactly 133 keypoints are given.
PoseFrame from_coco_wholebody(std::span<const Keypoint2D> keypoints);

struct BoneMetric {
  double length = 0.0;
  double direction = 0.0;  // radians, atan2(dy, dx); 0 for zero-length bones
  bool visible = false;    // both endpoints visible
};

using BoneMetrics = std::array<BoneMetric, kBoneCount>;

BoneMetrics bone_metrics(const PoseFrame& frame,
                         double visibility_threshold = kDefaultVisibilityThreshold);

/// Torso length of a frame: mean of the visible neck->hip bones.
std::optional<double> torso_length(const PoseFrame& frame,
                                   double visibility_threshold = kDefaultVisibilityThreshold);

struct Violation {
  std::optional<std::size_t> frame;  // absent for sequence-level rules
  std::string field;                 // e.g. "body[0].confidence" or "width"
  std::string rule;

  std::string to_string() const;
};

/// Margin factor applied to the canvas when bounds-checking visible keypoints.
inline constexpr double kCanvasMargin = 1.5;

/// Checks every type invariant; never throws.
std::vector<Violation> validate_sequence(const PoseSequence& seq);

}  // namespace posekit
