#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "posekit/skeleton.hpp"

namespace posekit {

struct StickFigureOptions {
  int width = 512;
  int height = 512;
  double fps = 30.0;
  std::size_t frames = 16;
  Point2 neck{256.0, 150.0};
  double torso = 110.0;           // neck-to-hip length in pixels
  double swing = 0.35;            // limb swing amplitude in radians
  double drift = 1.5;             // horizontal neck motion per frame in pixels
  double jitter = 0.0;            // per-frame random bone angle offset (radians, std)
  double confidence = 0.9;
  bool hands = false;
  bool face = false;
  std::array<double, kBoneCount> bone_scale = unit_scale();
  std::uint64_t seed = 0;         // phase jitter

  static constexpr std::array<double, kBoneCount> unit_scale() {
    std::array<double, kBoneCount> s{};
    s.fill(1.0);
    return s;
  }
};

/// Walking stick figure built by forward kinematics from the neck, so each
/// bone keeps length torso * canonical_length * bone_scale in every frame.
PoseSequence make_stick_figure(const StickFigureOptions& opts);

/// Canonical bone lengths in torso units.
std::array<double, kBoneCount> canonical_bone_lengths();

/// Per part-group scale factors for `count` anchors drawn log-uniformly from
/// [low, high], applied to a unit-scale figure.
struct SyntheticPool {
  std::vector<PoseFrame> anchors;
  std::vector<std::array<double, kPartGroupCount>> group_scale;
};

SyntheticPool make_anchor_pool(std::size_t count, std::uint64_t seed, double low = 0.5,
                               double high = 2.0, int width = 512, int height = 512);

}  // namespace posekit
