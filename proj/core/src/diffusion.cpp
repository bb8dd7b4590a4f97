#include "posekit/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "posekit/error.hpp"
#include "posekit/rng.hpp"

namespace posekit {
namespace {

void check_t(std::size_t t, const NoiseSchedule& s) {
  if (t < 1 || t > s.steps()) {
    throw UsageError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(s.steps()) + "]");
  }
}

}  // namespace

std::string_view schedule_shape_name(ScheduleShape s) {
  return s == ScheduleShape::kLinear ? "linear" : "cosine";
}

std::optional<ScheduleShape> parse_schedule_shape(std::string_view name) {
  if (name == "linear") return ScheduleShape::kLinear;
  if (name == "cosine") return ScheduleShape::kCosine;
  return std::nullopt;
}

NoiseSchedule make_schedule(std::size_t steps, double beta_start, double beta_end, ScheduleShape shape) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ConfigError("schedule needs 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.betas.resize(steps);
  if (shape == ScheduleShape::kLinear) {
    for (std::size_t i = 0; i < steps; ++i) {
      s.betas[i] = steps == 1 ? beta_start
                              : beta_start + (beta_end - beta_start) * static_cast<double>(i) /
                                                 static_cast<double>(steps - 1);
    }
  } else {
    constexpr double offset = 0.008;
    auto f = [&](double t) {
      const double c = std::cos((t / static_cast<double>(steps) + offset) / (1.0 + offset) *
                                std::numbers::pi / 2.0);
      return c * c;
    };
    for (std::size_t i = 0; i < steps; ++i) {
      const double b = 1.0 - f(static_cast<double>(i + 1)) / f(static_cast<double>(i));
      s.betas[i] = std::clamp(b, beta_start, beta_end);
    }
  }
  s.alpha_bar.resize(steps + 1);
  s.alpha_bar[0] = 1.0;
  for (std::size_t t = 1; t <= steps; ++t) s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.betas[t - 1]);
  return s;
}

Matrix forward_diffuse(const Matrix& z0, std::size_t t, const NoiseSchedule& schedule,
                       const Matrix& noise) {
  check_t(t, schedule);
  require_same_shape(z0, noise, "forward_diffuse");
  const double a = std::sqrt(schedule.alpha_bar_at(t));
  const double b = std::sqrt(1.0 - schedule.alpha_bar_at(t));
  Matrix out(z0.rows(), z0.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z0[i] + b * noise[i];
  return out;
}

Matrix diffuse_step(const Matrix& z_prev, std::size_t t, const NoiseSchedule& schedule,
                    const Matrix& noise) {
  check_t(t, schedule);
  require_same_shape(z_prev, noise, "diffuse_step");
  const double a = std::sqrt(1.0 - schedule.beta(t));
  const double b = std::sqrt(schedule.beta(t));
  Matrix out(z_prev.rows(), z_prev.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z_prev[i] + b * noise[i];
  return out;
}

double diffusion_loss(const Matrix& pred_noise, const Matrix& true_noise) {
  require_same_shape(pred_noise, true_noise, "diffusion_loss");
  if (pred_noise.empty()) throw ShapeError("diffusion_loss on empty tensors");
  double s = 0.0;
  for (std::size_t i = 0; i < pred_noise.size(); ++i) {
    const double d = pred_noise[i] - true_noise[i];
    s += d * d;
  }
  return s / static_cast<double>(pred_noise.size());
}

Matrix ddim_step(const Matrix& z_t, const Matrix& eps_pred, std::size_t t, std::size_t t_prev,
                 const NoiseSchedule& schedule, double eta, Rng* rng) {
  if (!(t > t_prev)) throw UsageError("ddim_step needs t > t_prev");
  check_t(t, schedule);
  require_same_shape(z_t, eps_pred, "ddim_step");
  if (eta < 0.0) throw ConfigError("eta must be non-negative");
  if (eta > 0.0 && rng == nullptr) throw UsageError("stochastic DDIM needs a random source");
  const double at = schedule.alpha_bar_at(t);
  const double ap = schedule.alpha_bar_at(t_prev);
  const double sigma = eta * std::sqrt((1.0 - ap) / (1.0 - at)) * std::sqrt(1.0 - at / ap);
  const double dir = std::sqrt(std::max(0.0, 1.0 - ap - sigma * sigma));
  const double sa = std::sqrt(at);
  const double sb = std::sqrt(1.0 - at);
  const double sp = std::sqrt(ap);
  Matrix out(z_t.rows(), z_t.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x0 = (z_t[i] - sb * eps_pred[i]) / sa;
    out[i] = sp * x0 + dir * eps_pred[i];
    if (sigma > 0.0) out[i] += sigma * rng->normal();
  }
  return out;
}

std::vector<std::size_t> ddim_timesteps(std::size_t total, std::size_t n) {
  if (total == 0 || n == 0) throw ConfigError("ddim_timesteps needs positive sizes");
  n = std::min(n, total);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(total - i * total / n);
  out.push_back(0);
  return out;
}

Matrix cfg_combine(const Matrix& eps_cond, const Matrix& eps_uncond, double scale) {
  require_same_shape(eps_cond, eps_uncond, "cfg_combine");
  Matrix out(eps_cond.rows(), eps_cond.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = eps_uncond[i] + scale * (eps_cond[i] - eps_uncond[i]);
  }
  return out;
}

}  // namespace posekit
