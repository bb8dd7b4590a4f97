#include "posekit/pose_json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "posekit/error.hpp"

namespace posekit {
namespace {

using nlohmann::json;

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
}

void check_keys(const json& object, const std::string& where,
                std::initializer_list<std::string_view> allowed, ParseMode mode) {
  if (mode == ParseMode::kLenient) return;
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (std::string_view k : allowed) known = known || it.key() == k;
    if (!known) throw SchemaError(where + it.key(), "unknown field");
  }
}

const json& require(const json& object, const std::string& where, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) throw SchemaError(where + key, "missing required field");
  return *it;
}

double read_number(const json& value, const std::string& field) {
  if (!value.is_number()) throw SchemaError(field, "expected a number");
  return value.get<double>();
}

Keypoint2D read_keypoint(const json& value, const std::string& field) {
  if (!value.is_array() || value.size() != 3) {
    throw SchemaError(field, "expected a [x, y, confidence] triple");
  }
  return {read_number(value[0], field + "[0]"), read_number(value[1], field + "[1]"),
          read_number(value[2], field + "[2]")};
}

template <std::size_t N>
std::array<Keypoint2D, N> read_block(const json& value, const std::string& field) {
  if (!value.is_array()) throw SchemaError(field, "expected an array");
  if (value.size() != N) {
    throw SchemaError(field, "expected " + std::to_string(N) + " keypoints, got " +
                                 std::to_string(value.size()));
  }
  std::array<Keypoint2D, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = read_keypoint(value[i], field + "[" + std::to_string(i) + "]");
  }
  return out;
}

int read_dimension(const json& doc, const char* key) {
  const json& v = require(doc, "", key);
  if (!v.is_number_integer()) throw SchemaError(key, "expected an integer");
  const auto n = v.get<long long>();
  if (n <= 0 || n > 1'000'000) throw SchemaError(key, "must be a positive pixel count");
  return static_cast<int>(n);
}

double read_fps(const json& doc, bool required) {
  auto it = doc.find("fps");
  if (it == doc.end()) {
    if (required) throw SchemaError("fps", "missing required field");
    return 30.0;
  }
  const double fps = read_number(*it, "fps");
  if (!(fps > 0.0)) throw SchemaError("fps", "must be positive");
  return fps;
}

const json& read_frames(const json& doc) {
  const json& frames = require(doc, "", "frames");
  if (!frames.is_array()) throw SchemaError("frames", "expected an array");
  if (frames.empty()) throw SchemaError("frames", "at least one frame is required");
  return frames;
}

void append_keypoint(std::string& out, const Keypoint2D& k) {
  out += '[';
  out += format_fixed6(k.x);
  out += ',';
  out += format_fixed6(k.y);
  out += ',';
  out += format_fixed6(k.confidence);
  out += ']';
}

template <std::size_t N>
void append_block(std::string& out, const char* key, const std::array<Keypoint2D, N>& block) {
  out += '"';
  out += key;
  out += "\": [";
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ',';
    append_keypoint(out, block[i]);
  }
  out += ']';
}

}  // namespace

std::string format_fixed6(double value) {
  if (!std::isfinite(value)) throw NumericalError("cannot serialize non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 6);
  std::string s(buf, res.ptr);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

PoseSequence parse_pose_json(std::string_view text, ParseMode mode) {
  const json doc = parse_text(text);
  if (!doc.is_object()) throw SchemaError("<root>", "expected an object");
  check_keys(doc, "", {"version", "width", "height", "fps", "frames"}, mode);

  const json& version = require(doc, "", "version");
  if (!version.is_number_integer()) throw SchemaError("version", "expected an integer");
  if (version.get<long long>() != kPoseFormatVersion) {
    throw UnsupportedVersionError(version.get<long long>());
  }

  PoseSequence seq;
  seq.width = read_dimension(doc, "width");
  seq.height = read_dimension(doc, "height");
  seq.fps = read_fps(doc, true);

  const json& frames = read_frames(doc);
  seq.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string where = "frames[" + std::to_string(f) + "].";
    const json& fr = frames[f];
    if (!fr.is_object()) throw SchemaError(where.substr(0, where.size() - 1), "expected an object");
    check_keys(fr, where, {"body", "left_hand", "right_hand", "face"}, mode);
    PoseFrame frame;
    frame.body = read_block<kJointCount>(require(fr, where, "body"), where + "body");
    if (auto it = fr.find("left_hand"); it != fr.end()) {
      frame.left_hand = read_block<kHandKeypointCount>(*it, where + "left_hand");
    }
    if (auto it = fr.find("right_hand"); it != fr.end()) {
      frame.right_hand = read_block<kHandKeypointCount>(*it, where + "right_hand");
    }
    if (auto it = fr.find("face"); it != fr.end()) {
      frame.face = read_block<kFaceKeypointCount>(*it, where + "face");
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

std::string write_pose_json(const PoseSequence& seq) {
  std::string out;
  out.reserve(256 + seq.frames.size() * 1200);
  out += "{\n";
  out += "  \"version\": " + std::to_string(kPoseFormatVersion) + ",\n";
  out += "  \"width\": " + std::to_string(seq.width) + ",\n";
  out += "  \"height\": " + std::to_string(seq.height) + ",\n";
  out += "  \"fps\": " + format_fixed6(seq.fps) + ",\n";
  out += "  \"frames\": [\n";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const PoseFrame& frame = seq.frames[f];
    out += "    {";
    append_block(out, "body", frame.body);
    if (frame.left_hand) {
      out += ", ";
      append_block(out, "left_hand", *frame.left_hand);
    }
    if (frame.right_hand) {
      out += ", ";
      append_block(out, "right_hand", *frame.right_hand);
    }
    if (frame.face) {
      out += ", ";
      append_block(out, "face", *frame.face);
    }
    out += f + 1 < seq.frames.size() ? "},\n" : "}\n";
  }
  out += "  ]\n}\n";
  return out;
}

PoseSequence parse_coco_wholebody_json(std::string_view text) {
  const json doc = parse_text(text);
  if (!doc.is_object()) throw SchemaError("<root>", "expected an object");
  PoseSequence seq;
  seq.width = read_dimension(doc, "width");
  seq.height = read_dimension(doc, "height");
  seq.fps = read_fps(doc, false);
  const json& frames = read_frames(doc);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string field = "frames[" + std::to_string(f) + "].keypoints";
    const json& kps = require(frames[f], "frames[" + std::to_string(f) + "].", "keypoints");
    if (!kps.is_array()) throw SchemaError(field, "expected an array");
    std::vector<Keypoint2D> points;
    if (!kps.empty() && kps[0].is_array()) {
      for (std::size_t i = 0; i < kps.size(); ++i) {
        points.push_back(read_keypoint(kps[i], field + "[" + std::to_string(i) + "]"));
      }
    } else {
      if (kps.size() % 3 != 0) throw SchemaError(field, "flat keypoint list length must be a multiple of 3");
      for (std::size_t i = 0; i < kps.size(); i += 3) {
        points.push_back({read_number(kps[i], field), read_number(kps[i + 1], field),
                          read_number(kps[i + 2], field)});
      }
    }
    if (points.size() != kCocoWholeBodyCount) {
      throw SchemaError(field, "expected 133 keypoints, got " + std::to_string(points.size()));
    }
    seq.frames.push_back(from_coco_wholebody(points));
  }
  return seq;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw UsageError("failed writing '" + path + "'");
}

}  // namespace posekit
