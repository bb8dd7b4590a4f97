#pragma once

// Distribution of anchor/driving rescaling ratios over a pose pool, binned
// into ten fixed intervals between 0.001 and 10.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "posekit/epi.hpp"

namespace posekit {

inline constexpr std::size_t kRatioBinCount = 10;
inline constexpr std::array<double, kRatioBinCount + 1> kRatioBinEdges{
    0.001, 0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 6.0, 10.0};

/// Bins are left-closed [lo, hi); the last one also holds exactly 10 so a
/// clamped ratio of ratio_max is counted.
class RatioHistogram {
 public:
  static std::optional<std::size_t> bin_of(double ratio);

  void add(double ratio);

  const std::array<std::uint64_t, kRatioBinCount>& counts() const { return counts_; }
  std::uint64_t below() const { return below_; }
  std::uint64_t above() const { return above_; }
  std::uint64_t in_range() const;
  std::uint64_t total() const { return in_range() + below_ + above_; }

  /// Percent of in-range samples per bin (all zero when there are none).
  std::array<double, kRatioBinCount> proportions() const;

 private:
  std::array<std::uint64_t, kRatioBinCount> counts_{};
  std::uint64_t below_ = 0;
  std::uint64_t above_ = 0;
};

struct RatioStatistics {
  std::size_t trials = 0;
  std::array<RatioHistogram, kStatisticsGroupCount> pre_clamp;
  std::array<RatioHistogram, kStatisticsGroupCount> post_clamp;
};

/// For each trial draws one driving sequence uniformly and measures every
/// visible bone of the six statistics groups against every anchor in the pool.
/// Throws UsageError on empty pool, empty driving set or zero trials.
RatioStatistics ratio_histogram(const AnchorPool& pool, std::span<const PoseSequence> driving_set,
                                std::size_t trials, Rng& rng, const EpiConfig& cfg);

/// Text table: one row per interval, one column per group, percentages with
/// two decimals.
std::string format_ratio_table(const RatioStatistics& stats, bool post_clamp = false);

/// {"trials": n, "bin_edges": [...], "groups": [{"name", "title",
///   "pre_clamp": {"counts", "percent", "below", "above"}, "post_clamp": {...}}]}
std::string ratio_statistics_json(const RatioStatistics& stats);

}  // namespace posekit
