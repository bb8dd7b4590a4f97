#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>

#include "posekit/rng.hpp"
#include "posekit/skeleton.hpp"

namespace fixtures {

/// Random sequence whose coordinates sit on the 1e-6 grid, so the six-decimal
/// text form represents every value exactly.
inline posekit::PoseSequence random_sequence(posekit::Rng& rng) {
  auto grid = [&](double lo, double hi) {
    const auto k = static_cast<long long>(std::floor(rng.uniform(lo, hi) * 1e6));
    return static_cast<double>(k) / 1e6;
  };
  auto kp = [&](int w, int h) {
    return posekit::Keypoint2D{grid(-0.25 * w, 1.25 * w), grid(-0.25 * h, 1.25 * h), grid(0.0, 1.0)};
  };
  posekit::PoseSequence seq;
  seq.width = 16 + static_cast<int>(rng.uniform_index(2000));
  seq.height = 16 + static_cast<int>(rng.uniform_index(2000));
  seq.fps = grid(1.0, 120.0);
  const bool hands = rng.bernoulli(0.5);
  const bool face = rng.bernoulli(0.5);
  const std::size_t frames = 1 + rng.uniform_index(6);
  for (std::size_t f = 0; f < frames; ++f) {
    posekit::PoseFrame frame;
    for (auto& k : frame.body) k = kp(seq.width, seq.height);
    if (hands) {
      frame.left_hand.emplace();
      frame.right_hand.emplace();
      for (auto& k : *frame.left_hand) k = kp(seq.width, seq.height);
      for (auto& k : *frame.right_hand) k = kp(seq.width, seq.height);
    }
    if (face) {
      frame.face.emplace();
      for (auto& k : *frame.face) k = kp(seq.width, seq.height);
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    posekit::Rng rng(std::hash<std::string>{}(tag) ^
                     static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(rng.next_u64() % 1000000000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
