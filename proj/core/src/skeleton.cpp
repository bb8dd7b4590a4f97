#include "posekit/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "posekit/error.hpp"

namespace posekit {
namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames{
    "nose",    "neck",   "r_shoulder", "r_elbow", "r_wrist", "l_shoulder",
    "l_elbow", "l_wrist", "r_hip",     "r_knee",  "r_ankle", "l_hip",
    "l_knee",  "l_ankle", "r_eye",     "l_eye",   "r_ear",   "l_ear",
};

constexpr std::array<std::string_view, kPartGroupCount> kGroupNames{
    "shoulder", "body", "upper_arm", "lower_arm", "upper_leg", "lower_leg", "neck", "face",
};

constexpr std::array<std::string_view, kPartGroupCount> kGroupTitles{
    "Shoulder Length",  "Body Length",      "Upper Arm Length", "Lower Arm Length",
    "Upper Leg Length", "Lower Leg Length", "Neck Length",      "Face Size",
};

// COCO-WholeBody body indices feeding each Body-18 joint (neck is synthesized).
constexpr int kCocoLeftShoulder = 5;
constexpr int kCocoRightShoulder = 6;
constexpr std::array<int, kJointCount> kCocoBodyIndex{
    0, -1, 6, 8, 10, 5, 7, 9, 12, 14, 16, 11, 13, 15, 2, 1, 4, 3,
};
constexpr std::size_t kCocoFaceStart = 23;
constexpr std::size_t kCocoLeftHandStart = 91;
constexpr std::size_t kCocoRightHandStart = 112;

bool finite(const Keypoint2D& k) {
  return std::isfinite(k.x) && std::isfinite(k.y) && std::isfinite(k.confidence);
}

template <std::size_t N>
void validate_block(const std::array<Keypoint2D, N>& block, std::string_view block_name,
                    std::size_t frame, double max_x, double max_y,
                    std::vector<Violation>& out) {
  for (std::size_t i = 0; i < N; ++i) {
    const Keypoint2D& k = block[i];
    const std::string base = N == kJointCount
                                 ? std::string(block_name) + "." + std::string(joint_name(i))
                                 : std::string(block_name) + "[" + std::to_string(i) + "]";
    if (!finite(k)) {
      out.push_back({frame, base, "coordinates and confidence must be finite"});
      continue;
    }
    if (k.confidence < 0.0 || k.confidence > 1.0) {
      out.push_back({frame, base + ".confidence", "confidence must lie in [0, 1]"});
      continue;
    }
    if (k.visible() && (k.x < 0.0 || k.x >= max_x || k.y < 0.0 || k.y >= max_y)) {
      out.push_back({frame, base, "visible keypoint outside the canvas margin"});
    }
  }
}

}  // namespace

std::string_view joint_name(Joint j) { return kJointNames[index_of(j)]; }
std::string_view joint_name(std::size_t index) { return kJointNames.at(index); }
std::string_view group_name(PartGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }
std::string_view group_title(PartGroup g) { return kGroupTitles[static_cast<std::size_t>(g)]; }

std::optional<PartGroup> parse_group(std::string_view name) {
  for (std::size_t i = 0; i < kPartGroupCount; ++i) {
    if (kGroupNames[i] == name) return static_cast<PartGroup>(i);
  }
  return std::nullopt;
}

std::string bone_name(std::size_t bone_index) {
  const Bone& b = kBones.at(bone_index);
  return std::string(joint_name(b.parent)) + "->" + std::string(joint_name(b.child));
}

std::optional<std::size_t> parent_bone_of(Joint j) {
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    if (kBones[b].child == j) return b;
  }
  return std::nullopt;
}

std::vector<std::size_t> bones_in_group(PartGroup g) {
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    if (kBones[b].group == g) out.push_back(b);
  }
  return out;
}

std::vector<Joint> traverse_from_root() {
  std::vector<Joint> order;
  std::vector<Joint> stack{kRootJoint};
  while (!stack.empty()) {
    const Joint j = stack.back();
    stack.pop_back();
    order.push_back(j);
    // Push in reverse so children come out in bone order.
    for (std::size_t b = kBoneCount; b-- > 0;) {
      if (kBones[b].parent == j) stack.push_back(kBones[b].child);
    }
  }
  return order;
}

PoseFrame from_coco_wholebody(std::span<const Keypoint2D> keypoints) {
  if (keypoints.size() != kCocoWholeBodyCount) {
    throw SchemaError("keypoints", "expected " + std::to_string(kCocoWholeBodyCount) +
                                       " COCO-WholeBody keypoints, got " +
                                       std::to_string(keypoints.size()));
  }
  PoseFrame frame;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (kCocoBodyIndex[j] >= 0) frame.body[j] = keypoints[static_cast<std::size_t>(kCocoBodyIndex[j])];
  }
  const Keypoint2D& ls = keypoints[kCocoLeftShoulder];
  const Keypoint2D& rs = keypoints[kCocoRightShoulder];
  frame[Joint::kNeck] = {(ls.x + rs.x) / 2.0, (ls.y + rs.y) / 2.0,
                         std::min(ls.confidence, rs.confidence)};

  FaceKeypoints face{};
  for (std::size_t i = 0; i < kFaceKeypointCount; ++i) face[i] = keypoints[kCocoFaceStart + i];
  HandKeypoints left{};
  HandKeypoints right{};
  for (std::size_t i = 0; i < kHandKeypointCount; ++i) {
    left[i] = keypoints[kCocoLeftHandStart + i];
    right[i] = keypoints[kCocoRightHandStart + i];
  }
  frame.face = face;
  frame.left_hand = left;
  frame.right_hand = right;
  return frame;
}

BoneMetrics bone_metrics(const PoseFrame& frame, double visibility_threshold) {
  BoneMetrics out{};
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    const Keypoint2D& p = frame[kBones[b].parent];
    const Keypoint2D& c = frame[kBones[b].child];
    const double dx = c.x - p.x;
    const double dy = c.y - p.y;
    BoneMetric& m = out[b];
    m.length = std::hypot(dx, dy);
    m.direction = m.length == 0.0 ? 0.0 : std::atan2(dy, dx);
    m.visible = p.visible(visibility_threshold) && c.visible(visibility_threshold);
  }
  return out;
}

std::optional<double> torso_length(const PoseFrame& frame, double visibility_threshold) {
  const BoneMetrics metrics = bone_metrics(frame, visibility_threshold);
  double sum = 0.0;
  int count = 0;
  for (std::size_t b : kTorsoBones) {
    if (metrics[b].visible) {
      sum += metrics[b].length;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::string Violation::to_string() const {
  std::ostringstream os;
  if (frame) os << "frame " << *frame << ": ";
  os << field << ": " << rule;
  return os.str();
}

std::vector<Violation> validate_sequence(const PoseSequence& seq) {
  std::vector<Violation> out;
  if (seq.width <= 0) out.push_back({std::nullopt, "width", "must be a positive integer"});
  if (seq.height <= 0) out.push_back({std::nullopt, "height", "must be a positive integer"});
  if (!std::isfinite(seq.fps) || seq.fps <= 0.0) {
    out.push_back({std::nullopt, "fps", "must be a positive finite real"});
  }
  if (seq.frames.empty()) {
    out.push_back({std::nullopt, "frames", "sequence needs at least one frame"});
    return out;
  }
  const double max_x = seq.width * kCanvasMargin;
  const double max_y = seq.height * kCanvasMargin;
  const PoseFrame& first = seq.frames.front();
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const PoseFrame& frame = seq.frames[f];
    if (frame.left_hand.has_value() != first.left_hand.has_value()) {
      out.push_back({f, "left_hand", "block presence differs from frame 0"});
    }
    if (frame.right_hand.has_value() != first.right_hand.has_value()) {
      out.push_back({f, "right_hand", "block presence differs from frame 0"});
    }
    if (frame.face.has_value() != first.face.has_value()) {
      out.push_back({f, "face", "block presence differs from frame 0"});
    }
    validate_block(frame.body, "body", f, max_x, max_y, out);
    if (frame.left_hand) validate_block(*frame.left_hand, "left_hand", f, max_x, max_y, out);
    if (frame.right_hand) validate_block(*frame.right_hand, "right_hand", f, max_x, max_y, out);
    if (frame.face) validate_block(*frame.face, "face", f, max_x, max_y, out);
  }
  return out;
}

}  // namespace posekit
