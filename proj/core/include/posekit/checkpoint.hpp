#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posekit/grad_check.hpp"
#include "posekit/matrix.hpp"

namespace posekit {

/// Layout (all integers little-endian):
///   "PKPT" | u32 version | u32 block count |
///   per block: u32 name length | name bytes | u32 rows | u32 cols | rows*cols f64
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedMatrix {
  std::string name;
  Matrix value;
};

std::string encode_checkpoint(std::span<const ConstParamRef> blocks);
/// Throws ParseError on truncation or a bad magic, UnsupportedVersionError on
/// an unknown version.
std::vector<NamedMatrix> decode_checkpoint(std::string_view bytes);

/// Copies decoded blocks into `blocks`; names, order and shapes must match.
void restore_blocks(std::span<const ParamRef> blocks, const std::vector<NamedMatrix>& saved);

void save_checkpoint(const std::string& path, std::span<const ConstParamRef> blocks);
std::vector<NamedMatrix> load_checkpoint(const std::string& path);

}  // namespace posekit
