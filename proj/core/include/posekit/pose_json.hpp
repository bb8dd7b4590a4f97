#pragma once

// Canonical keypoint file format:
//
//   { "version": 1, "width": int, "height": int, "fps": real,
//     "frames": [ { "body": [[x, y, c] x 18],
//                   "left_hand": [[x, y, c] x 21],    (optional)
//                   "right_hand": [[x, y, c] x 21],   (optional)
//                   "face": [[x, y, c] x 68] } ] }    (optional)
//
// Writing is canonical: fixed key order, every real printed with exactly six
// decimals (round-half-even on the exact binary value), two-space layout with
// one frame per line, trailing newline.

#include <string>
#include <string_view>
#include <vector>

#include "posekit/skeleton.hpp"

namespace posekit {

inline constexpr int kPoseFormatVersion = 1;

enum class ParseMode {
  kStrict,   // unknown fields are schema errors
  kLenient,  // unknown fields are ignored
};

/// Throws ParseError (with byte offset), SchemaError (naming the field) or
/// UnsupportedVersionError.
PoseSequence parse_pose_json(std::string_view text, ParseMode mode = ParseMode::kStrict);

std::string write_pose_json(const PoseSequence& seq);

/// Fixed six-decimal rendering used by every canonical writer in the project.
/// Negative zero (and anything that rounds to it) prints as "0.000000".
std::string format_fixed6(double value);

/// COCO-WholeBody detections file, the input of `posekit convert`:
///
///   { "width": int, "height": int, "fps": real (optional, default 30),
///     "frames": [ { "keypoints": [[x, y, c] x 133] | [x, y, c, ... x 399] } ] }
PoseSequence parse_coco_wholebody_json(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace posekit
