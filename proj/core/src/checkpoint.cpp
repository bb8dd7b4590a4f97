#include "posekit/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"

namespace posekit {
namespace {

constexpr char kMagic[4] = {'P', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xffu);
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xffu);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError(pos_, "checkpoint truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  std::string_view bytes(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError(pos_, "checkpoint truncated");
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(std::span<const ConstParamRef> blocks) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const ConstParamRef& b : blocks) {
    put_u32(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put_u32(out, static_cast<std::uint32_t>(b.value->rows()));
    put_u32(out, static_cast<std::uint32_t>(b.value->cols()));
    for (double v : b.value->values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<NamedMatrix> decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string_view(kMagic, 4)) throw ParseError(0, "not a checkpoint (bad magic)");
  const auto version = r.take(4);
  if (version != kCheckpointVersion) throw UnsupportedVersionError(static_cast<long long>(version));
  const auto count = r.take(4);
  std::vector<NamedMatrix> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = r.take(4);
    std::string name(r.bytes(len));
    const auto rows = r.take(4);
    const auto cols = r.take(4);
    if (rows * cols * 8 > bytes.size()) throw ParseError(r.pos(), "checkpoint block larger than file");
    Matrix m(rows, cols);
    for (double& v : m.values()) v = std::bit_cast<double>(r.take(8));
    out.push_back({std::move(name), std::move(m)});
  }
  if (!r.done()) throw ParseError(r.pos(), "trailing bytes after checkpoint");
  return out;
}

void restore_blocks(std::span<const ParamRef> blocks, const std::vector<NamedMatrix>& saved) {
  if (blocks.size() != saved.size()) {
    throw SchemaError("blocks", "checkpoint has " + std::to_string(saved.size()) + " blocks, expected " +
                                    std::to_string(blocks.size()));
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name != saved[i].name) {
      throw SchemaError(saved[i].name, "expected block '" + blocks[i].name + "'");
    }
    require_same_shape(*blocks[i].value, saved[i].value, blocks[i].name.c_str());
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) *blocks[i].value = saved[i].value;
}

void save_checkpoint(const std::string& path, std::span<const ConstParamRef> blocks) {
  write_text_file(path, encode_checkpoint(blocks));
}

std::vector<NamedMatrix> load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_text_file(path));
}

}  // namespace posekit
