#include "posekit/ratio_stats.hpp"

#include <algorithm>
#include <cstdio>

#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"

namespace posekit {
namespace {

std::string interval_label(std::size_t bin) {
  auto edge = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), v < 0.01 ? "%.3f" : "%.1f", v);
    return std::string(buf);
  };
  return "[" + edge(kRatioBinEdges[bin]) + ", " + edge(kRatioBinEdges[bin + 1]) + ")";
}

std::string histogram_json(const RatioHistogram& h) {
  std::string out = "{\"counts\": [";
  for (std::size_t i = 0; i < kRatioBinCount; ++i) {
    if (i) out += ", ";
    out += std::to_string(h.counts()[i]);
  }
  out += "], \"percent\": [";
  const auto pct = h.proportions();
  for (std::size_t i = 0; i < kRatioBinCount; ++i) {
    if (i) out += ", ";
    out += format_fixed6(pct[i]);
  }
  out += "], \"below\": " + std::to_string(h.below()) + ", \"above\": " + std::to_string(h.above()) +
         ", \"in_range\": " + std::to_string(h.in_range()) + "}";
  return out;
}

}  // namespace

std::optional<std::size_t> RatioHistogram::bin_of(double ratio) {
  if (!(ratio >= kRatioBinEdges.front()) || ratio > kRatioBinEdges.back()) return std::nullopt;
  for (std::size_t i = 0; i < kRatioBinCount; ++i) {
    if (ratio < kRatioBinEdges[i + 1]) return i;
  }
  return kRatioBinCount - 1;
}

void RatioHistogram::add(double ratio) {
  if (const auto bin = bin_of(ratio)) {
    ++counts_[*bin];
  } else if (ratio < kRatioBinEdges.front()) {
    ++below_;
  } else {
    ++above_;
  }
}

std::uint64_t RatioHistogram::in_range() const {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::array<double, kRatioBinCount> RatioHistogram::proportions() const {
  std::array<double, kRatioBinCount> out{};
  const std::uint64_t n = in_range();
  if (n == 0) return out;
  for (std::size_t i = 0; i < kRatioBinCount; ++i) {
    out[i] = 100.0 * static_cast<double>(counts_[i]) / static_cast<double>(n);
  }
  return out;
}

RatioStatistics ratio_histogram(const AnchorPool& pool, std::span<const PoseSequence> driving_set,
                                std::size_t trials, Rng& rng, const EpiConfig& cfg) {
  if (pool.size() == 0) throw UsageError("ratio statistics need a non-empty anchor pool");
  if (driving_set.empty()) throw UsageError("ratio statistics need at least one driving sequence");
  if (trials == 0) throw UsageError("ratio statistics need at least one trial");
  for (const PoseSequence& s : driving_set) {
    if (s.frames.empty()) throw UsageError("driving sequence without frames");
  }

  RatioStatistics stats;
  stats.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const PoseSequence& driving = driving_set[rng.uniform_index(driving_set.size())];
    for (const PoseFrame& anchor : pool.anchors()) {
      const BoneRatios r = measure_bone_ratios(driving, anchor, cfg);
      for (std::size_t b = 0; b < kBoneCount; ++b) {
        const auto g = static_cast<std::size_t>(kBones[b].group);
        if (!r.measured[b] || g >= kStatisticsGroupCount) continue;
        stats.pre_clamp[g].add(r.raw[b]);
        stats.post_clamp[g].add(r.ratio[b]);
      }
    }
  }
  return stats;
}

std::string format_ratio_table(const RatioStatistics& stats, bool post_clamp) {
  const auto& hist = post_clamp ? stats.post_clamp : stats.pre_clamp;
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-16s", "Interval");
  out += buf;
  for (std::size_t g = 0; g < kStatisticsGroupCount; ++g) {
    std::snprintf(buf, sizeof(buf), " | %-16s", std::string(group_title(static_cast<PartGroup>(g))).c_str());
    out += buf;
  }
  out += "\n";
  for (std::size_t bin = 0; bin < kRatioBinCount; ++bin) {
    std::snprintf(buf, sizeof(buf), "%-16s", interval_label(bin).c_str());
    out += buf;
    for (std::size_t g = 0; g < kStatisticsGroupCount; ++g) {
      std::snprintf(buf, sizeof(buf), " | %15.2f%%", hist[g].proportions()[bin]);
      out += buf;
    }
    out += "\n";
  }
  std::snprintf(buf, sizeof(buf), "%-16s", "out of range");
  out += buf;
  for (std::size_t g = 0; g < kStatisticsGroupCount; ++g) {
    std::snprintf(buf, sizeof(buf), " | %16llu",
                  static_cast<unsigned long long>(hist[g].below() + hist[g].above()));
    out += buf;
  }
  out += "\n";
  return out;
}

std::string ratio_statistics_json(const RatioStatistics& stats) {
  std::string out = "{\n  \"trials\": " + std::to_string(stats.trials) + ",\n  \"bin_edges\": [";
  for (std::size_t i = 0; i < kRatioBinEdges.size(); ++i) {
    if (i) out += ", ";
    out += format_fixed6(kRatioBinEdges[i]);
  }
  out += "],\n  \"groups\": [\n";
  for (std::size_t g = 0; g < kStatisticsGroupCount; ++g) {
    const auto group = static_cast<PartGroup>(g);
    out += "    {\"name\": \"" + std::string(group_name(group)) + "\", \"title\": \"" +
           std::string(group_title(group)) + "\",\n     \"pre_clamp\": " +
           histogram_json(stats.pre_clamp[g]) + ",\n     \"post_clamp\": " +
           histogram_json(stats.post_clamp[g]) + "}";
    out += g + 1 < kStatisticsGroupCount ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

}  // namespace posekit
