#include "posekit/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "posekit/error.hpp"
#include "posekit/rng.hpp"

namespace posekit {
namespace {

// Rest pose in torso units, neck at the origin, y pointing down.
constexpr std::array<Point2, kJointCount> kRestPose{{
    {0.00, -0.30}, {0.00, 0.00},   {-0.35, 0.00}, {-0.42, 0.45}, {-0.45, 0.85}, {0.35, 0.00},
    {0.42, 0.45},  {0.45, 0.85},   {-0.18, 0.98}, {-0.20, 1.55}, {-0.21, 2.10}, {0.18, 0.98},
    {0.20, 1.55},  {0.21, 2.10},   {-0.06, -0.36}, {0.06, -0.36}, {-0.14, -0.33}, {0.14, -0.33},
}};

double swing_weight(PartGroup g) {
  switch (g) {
    case PartGroup::kUpperArm:
    case PartGroup::kUpperLeg:
      return 1.0;
    case PartGroup::kLowerArm:
    case PartGroup::kLowerLeg:
      return 0.6;
    case PartGroup::kNeck:
      return 0.15;
    default:
      return 0.0;
  }
}

HandKeypoints make_hand(Point2 wrist, double angle, double size, double conf) {
  HandKeypoints h{};
  h[0] = {wrist.x, wrist.y, conf};
  for (std::size_t finger = 0; finger < 5; ++finger) {
    const double a = angle + (static_cast<double>(finger) - 2.0) * 0.3;
    for (std::size_t k = 1; k <= 4; ++k) {
      const double r = size * (0.3 + 0.18 * static_cast<double>(k));
      h[4 * finger + k] = {wrist.x + r * std::cos(a), wrist.y + r * std::sin(a), conf};
    }
  }
  return h;
}

FaceKeypoints make_face(Point2 nose, double size, double conf) {
  FaceKeypoints f{};
  for (std::size_t i = 0; i < kFaceKeypointCount; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / kFaceKeypointCount;
    const double ring = i % 2 == 0 ? 1.0 : 0.6;
    f[i] = {nose.x + size * ring * 0.8 * std::cos(a), nose.y + size * ring * std::sin(a), conf};
  }
  return f;
}

}  // namespace

std::array<double, kBoneCount> canonical_bone_lengths() {
  std::array<double, kBoneCount> out{};
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    const Point2 p = kRestPose[index_of(kBones[b].parent)];
    const Point2 c = kRestPose[index_of(kBones[b].child)];
    out[b] = std::hypot(c.x - p.x, c.y - p.y);
  }
  return out;
}

PoseSequence make_stick_figure(const StickFigureOptions& opts) {
  if (opts.frames == 0) throw UsageError("stick figure needs at least one frame");
  if (opts.width <= 0 || opts.height <= 0 || !(opts.fps > 0.0)) {
    throw UsageError("stick figure canvas and fps must be positive");
  }
  Rng rng(opts.seed);
  std::array<double, kBoneCount> phase{};
  for (double& p : phase) p = rng.uniform(-0.3, 0.3);

  const auto lengths = canonical_bone_lengths();
  PoseSequence seq;
  seq.width = opts.width;
  seq.height = opts.height;
  seq.fps = opts.fps;
  for (std::size_t f = 0; f < opts.frames; ++f) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(f) / 16.0;
    PoseFrame frame;
    std::array<double, kBoneCount> offset{};
    for (double& o : offset) o = opts.jitter > 0.0 ? opts.jitter * rng.normal() : 0.0;
    const Point2 neck{opts.neck.x + opts.drift * static_cast<double>(f), opts.neck.y};
    frame[Joint::kNeck] = {neck.x, neck.y, opts.confidence};
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      const Bone& bone = kBones[b];
      const Point2 rp = kRestPose[index_of(bone.parent)];
      const Point2 rc = kRestPose[index_of(bone.child)];
      const double side = index_of(bone.child) % 2 == 0 ? 1.0 : -1.0;
      const double angle = std::atan2(rc.y - rp.y, rc.x - rp.x) +
                           opts.swing * swing_weight(bone.group) * side * std::sin(t + phase[b]) +
                           offset[b];
      const double len = opts.torso * lengths[b] * opts.bone_scale[b];
      const Keypoint2D& p = frame[bone.parent];
      frame[bone.child] = {p.x + len * std::cos(angle), p.y + len * std::sin(angle), opts.confidence};
    }
    if (opts.hands) {
      const double size = 0.25 * opts.torso;
      const Keypoint2D& lw = frame[Joint::kLeftWrist];
      const Keypoint2D& le = frame[Joint::kLeftElbow];
      const Keypoint2D& rw = frame[Joint::kRightWrist];
      const Keypoint2D& re = frame[Joint::kRightElbow];
      frame.left_hand = make_hand(lw.position(), std::atan2(lw.y - le.y, lw.x - le.x), size, opts.confidence);
      frame.right_hand = make_hand(rw.position(), std::atan2(rw.y - re.y, rw.x - re.x), size, opts.confidence);
    }
    if (opts.face) frame.face = make_face(frame[Joint::kNose].position(), 0.15 * opts.torso, opts.confidence);
    seq.frames.push_back(frame);
  }
  return seq;
}

SyntheticPool make_anchor_pool(std::size_t count, std::uint64_t seed, double low, double high,
                               int width, int height) {
  if (!(low > 0.0 && low <= high)) throw UsageError("anchor scale range must satisfy 0 < low <= high");
  Rng rng(seed);
  SyntheticPool pool;
  for (std::size_t i = 0; i < count; ++i) {
    std::array<double, kPartGroupCount> g{};
    for (double& s : g) s = std::exp(rng.uniform(std::log(low), std::log(high)));
    StickFigureOptions opts;
    opts.width = width;
    opts.height = height;
    opts.frames = 1;
    opts.neck = {width / 2.0, height * 0.3};
    opts.torso = height * 0.2;
    opts.swing = 0.0;
    opts.drift = 0.0;
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      opts.bone_scale[b] = g[static_cast<std::size_t>(kBones[b].group)];
    }
    pool.anchors.push_back(make_stick_figure(opts).frames.front());
    pool.group_scale.push_back(g);
  }
  return pool;
}

}  // namespace posekit
