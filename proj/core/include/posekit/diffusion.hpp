#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "posekit/constants.hpp"
#include "posekit/matrix.hpp"

namespace posekit {

class Rng;

enum class ScheduleShape { kLinear, kCosine };

std::string_view schedule_shape_name(ScheduleShape s);
std::optional<ScheduleShape> parse_schedule_shape(std::string_view name);

struct NoiseSchedule {
  std::vector<double> betas;      // betas[t - 1] for t = 1..T
  std::vector<double> alpha_bar;  // alpha_bar[t] for t = 0..T, alpha_bar[0] = 1

  std::size_t steps() const { return betas.size(); }
  double beta(std::size_t t) const { return betas.at(t - 1); }
  double alpha_bar_at(std::size_t t) const { return alpha_bar.at(t); }
};

/// Linear: evenly spaced betas. Cosine: betas from the squared-cosine
/// cumulative curve, clipped to [beta_start, beta_end]. Throws ConfigError
/// unless 0 < beta_start <= beta_end < 1 and T >= 1.
NoiseSchedule make_schedule(std::size_t steps, double beta_start, double beta_end,
                            ScheduleShape shape = ScheduleShape::kLinear);

/// sqrt(abar_t) z0 + sqrt(1 - abar_t) noise; t in [1, T].
Matrix forward_diffuse(const Matrix& z0, std::size_t t, const NoiseSchedule& schedule,
                       const Matrix& noise);

/// One step of the Markov chain: sqrt(1 - beta_t) z_{t-1} + sqrt(beta_t) noise.
Matrix diffuse_step(const Matrix& z_prev, std::size_t t, const NoiseSchedule& schedule,
                    const Matrix& noise);

/// Mean squared error.
double diffusion_loss(const Matrix& pred_noise, const Matrix& true_noise);

/// DDIM update from t to t_prev (t > t_prev >= 0). eta > 0 needs an rng.
Matrix ddim_step(const Matrix& z_t, const Matrix& eps_pred, std::size_t t, std::size_t t_prev,
                 const NoiseSchedule& schedule, double eta = 0.0, Rng* rng = nullptr);

/// Evenly spaced descending timesteps T..1 of length min(n, T), then 0.
std::vector<std::size_t> ddim_timesteps(std::size_t total, std::size_t n);

/// eps_uncond + scale (eps_cond - eps_uncond)
Matrix cfg_combine(const Matrix& eps_cond, const Matrix& eps_uncond,
                   double scale = kDefaultGuidanceScale);

}  // namespace posekit
