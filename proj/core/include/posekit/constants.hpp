#pragma once

#include <cstddef>

namespace posekit {

/// Classifier-free guidance scale used at inference.
inline constexpr double kDefaultGuidanceScale = 5.0;
/// DDIM sampling steps at inference.
inline constexpr std::size_t kDefaultDdimSteps = 50;
/// DDPM timesteps used for full-scale training noise.
inline constexpr std::size_t kFullScaleTimesteps = 1000;
/// Timesteps of the desk-scale simulation schedule.
inline constexpr std::size_t kDeskTimesteps = 50;

/// Full-scale clip length and resolution (animation data).
inline constexpr std::size_t kFullScaleFrames = 81;
inline constexpr int kFullScaleWidth = 832;
inline constexpr int kFullScaleHeight = 480;

inline constexpr double kIpiLearningRate = 1e-7;
inline constexpr double kDefaultLearningRate = 1e-5;

/// Probability that the explicit pose transformation is applied in training.
inline constexpr double kDefaultTransformProbability = 0.98;
/// Residual weight of the implicit pose indicator.
inline constexpr double kDefaultIpiAlpha = 1.0;

}  // namespace posekit
