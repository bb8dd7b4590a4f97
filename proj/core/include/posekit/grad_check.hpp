#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "posekit/autograd.hpp"

namespace posekit {

/// A named, mutable parameter block.
struct ParamRef {
  std::string name;
  Matrix* value = nullptr;
};

struct ConstParamRef {
  std::string name;
  const Matrix* value = nullptr;
};

/// Builds a scalar loss from one leaf per block (in block order).
using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckOptions {
  double epsilon = 1e-6;
  double tolerance = 1e-4;
  /// 0 checks every entry; otherwise a seeded sample of at most this many per block.
  std::size_t max_entries_per_block = 0;
  std::uint64_t seed = 0;
};

struct BlockGradReport {
  std::string name;
  std::size_t checked = 0;
  /// |a - n| / max(|a|, |n|, 1e-12) over the checked entries as vectors.
  double rel_error = 0.0;
  /// Same ratio entry by entry; dominated by rounding noise on near-zero entries.
  double max_entry_rel_error = 0.0;
  double max_abs_error = 0.0;
  double analytic_norm = 0.0;
};

struct GradCheckReport {
  std::vector<BlockGradReport> blocks;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Scalar relative error |a - n| / max(|a|, |n|, 1e-12).
double relative_error(double analytic, double numeric);

/// Compares tape gradients against central differences. Blocks are perturbed
/// in place and restored.
GradCheckReport grad_check(std::span<const ParamRef> blocks, const LossBuilder& loss,
                           const GradCheckOptions& opts = {});

std::string grad_check_json(const GradCheckReport& report);

}  // namespace posekit
