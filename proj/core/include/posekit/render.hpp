#pragma once

// Deterministic skeleton rasterization into RGB buffers and binary PPM output.
//
// Color map: bone b uses kPoseColors[b] and joint j uses kPoseColors[j]; these
// are the conventional 18-entry OpenPose color wheel. Hand bones use one
// color per finger (kFingerColors), face keypoints are single white pixels.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "posekit/skeleton.hpp"

namespace posekit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr std::array<Rgb, 18> kPoseColors{{
    {255, 0, 0},   {255, 85, 0},  {255, 170, 0}, {255, 255, 0}, {170, 255, 0}, {85, 255, 0},
    {0, 255, 0},   {0, 255, 85},  {0, 255, 170}, {0, 255, 255}, {0, 170, 255}, {0, 85, 255},
    {0, 0, 255},   {85, 0, 255},  {170, 0, 255}, {255, 0, 255}, {255, 0, 170}, {255, 0, 85},
}};

/// thumb, index, middle, ring, little
inline constexpr std::array<Rgb, 5> kFingerColors{{
    {255, 64, 64}, {255, 192, 64}, {64, 255, 64}, {64, 192, 255}, {192, 64, 255},
}};

inline constexpr Rgb kFaceColor{255, 255, 255};

struct CanvasSpec {
  int width = 512;
  int height = 512;
  int line_thickness = 4;
  int joint_radius = 4;  // 0 disables joint discs
  Rgb background{0, 0, 0};
  bool draw_hands = true;
  bool draw_face = true;
  double visibility_threshold = kDefaultVisibilityThreshold;
};

/// Throws ConfigError when width/height < 16, thickness < 1 or radius < 0.
void validate_canvas(const CanvasSpec& spec);

class ImageBuffer {
 public:
  ImageBuffer(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& bytes() const { return pixels_; }

  Rgb at(int x, int y) const;
  /// Writes the pixel if (x, y) lies on the canvas; otherwise does nothing.
  void put(int x, int y, Rgb c);

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;  // row-major RGB
};

/// Integer pixel coordinate of a real position: floor(v + 0.5).
long long pixel_coordinate(double v);

/// Bresenham line between integer endpoints, stamped with a square brush of
/// side `thickness` centered on each step. Clipped to the canvas.
void draw_line(ImageBuffer& img, long long x0, long long y0, long long x1, long long y1,
               int thickness, Rgb color);

/// Filled disc of all pixels within `radius` of the center (Euclidean).
void draw_disc(ImageBuffer& img, long long cx, long long cy, int radius, Rgb color);

/// Bones first (in bone order), then hands and face, then joint discs. Missing
/// joints and bones touching them are skipped.
ImageBuffer render_frame(const PoseFrame& frame, const CanvasSpec& spec);

/// Binary P6: "P6\n<w> <h>\n255\n" followed by raw RGB.
std::string encode_ppm(const ImageBuffer& img);

}  // namespace posekit
