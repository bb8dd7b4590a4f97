#include "posekit/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "posekit/error.hpp"

namespace posekit {
namespace {

constexpr double kCoordinateLimit = 1e12;

// Liang-Barsky clip of the segment to [lo_x, hi_x] x [lo_y, hi_y].
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double lo_x, double lo_y,
                  double hi_x, double hi_y) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - lo_x, hi_x - x0, y0 - lo_y, hi_y - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  const double nx0 = x0 + t0 * dx;
  const double ny0 = y0 + t0 * dy;
  x1 = x0 + t1 * dx;
  y1 = y0 + t1 * dy;
  x0 = nx0;
  y0 = ny0;
  return true;
}

void draw_segment(ImageBuffer& img, const Keypoint2D& a, const Keypoint2D& b, int thickness,
                  Rgb color) {
  draw_line(img, pixel_coordinate(a.x), pixel_coordinate(a.y), pixel_coordinate(b.x),
            pixel_coordinate(b.y), thickness, color);
}

void draw_hand(ImageBuffer& img, const HandKeypoints& hand, const CanvasSpec& spec) {
  for (std::size_t finger = 0; finger < 5; ++finger) {
    std::size_t prev = 0;
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::size_t cur = 4 * finger + k;
      if (hand[prev].visible(spec.visibility_threshold) &&
          hand[cur].visible(spec.visibility_threshold)) {
        draw_segment(img, hand[prev], hand[cur], 1, kFingerColors[finger]);
      }
      prev = cur;
    }
  }
}

}  // namespace

void validate_canvas(const CanvasSpec& spec) {
  if (spec.width < 16 || spec.height < 16) throw ConfigError("canvas must be at least 16x16");
  if (spec.line_thickness < 1) throw ConfigError("line thickness must be >= 1");
  if (spec.joint_radius < 0) throw ConfigError("joint radius must be >= 0");
}

ImageBuffer::ImageBuffer(int width, int height, Rgb fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Rgb ImageBuffer::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                         static_cast<std::size_t>(x)) * 3;
  return {pixels_.at(i), pixels_.at(i + 1), pixels_.at(i + 2)};
}

void ImageBuffer::put(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                         static_cast<std::size_t>(x)) * 3;
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
}

long long pixel_coordinate(double v) {
  const double clamped = std::clamp(v, -kCoordinateLimit, kCoordinateLimit);
  return static_cast<long long>(std::floor(clamped + 0.5));
}

void draw_line(ImageBuffer& img, long long x0, long long y0, long long x1, long long y1,
               int thickness, Rgb color) {
  const long long margin = thickness + 1;
  const long long w = img.width();
  const long long h = img.height();
  // Far-away endpoints are clipped first so the step count stays bounded;
  // on-canvas geometry never takes this branch and rasterizes exactly.
  const long long span = std::max(std::llabs(x1 - x0), std::llabs(y1 - y0));
  if (span > 4 * (w + h)) {
    double fx0 = static_cast<double>(x0), fy0 = static_cast<double>(y0);
    double fx1 = static_cast<double>(x1), fy1 = static_cast<double>(y1);
    if (!clip_segment(fx0, fy0, fx1, fy1, static_cast<double>(-margin), static_cast<double>(-margin),
                      static_cast<double>(w + margin), static_cast<double>(h + margin))) {
      return;
    }
    x0 = pixel_coordinate(fx0);
    y0 = pixel_coordinate(fy0);
    x1 = pixel_coordinate(fx1);
    y1 = pixel_coordinate(fy1);
  }

  const int lo = -(thickness - 1) / 2;
  const int hi = thickness / 2;
  auto stamp = [&](long long x, long long y) {
    if (x + hi < 0 || y + hi < 0 || x + lo >= w || y + lo >= h) return;
    for (int oy = lo; oy <= hi; ++oy) {
      for (int ox = lo; ox <= hi; ++ox) {
        img.put(static_cast<int>(x + ox), static_cast<int>(y + oy), color);
      }
    }
  };

  const long long dx = std::llabs(x1 - x0);
  const long long dy = -std::llabs(y1 - y0);
  const long long sx = x0 < x1 ? 1 : -1;
  const long long sy = y0 < y1 ? 1 : -1;
  long long err = dx + dy;
  long long x = x0;
  long long y = y0;
  while (true) {
    stamp(x, y);
    if (x == x1 && y == y1) break;
    const long long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void draw_disc(ImageBuffer& img, long long cx, long long cy, int radius, Rgb color) {
  if (cx + radius < 0 || cy + radius < 0 || cx - radius >= img.width() ||
      cy - radius >= img.height()) {
    return;
  }
  const long long r2 = static_cast<long long>(radius) * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (static_cast<long long>(dx) * dx + static_cast<long long>(dy) * dy <= r2) {
        img.put(static_cast<int>(cx + dx), static_cast<int>(cy + dy), color);
      }
    }
  }
}

ImageBuffer render_frame(const PoseFrame& frame, const CanvasSpec& spec) {
  validate_canvas(spec);
  ImageBuffer img(spec.width, spec.height, spec.background);
  const double tau = spec.visibility_threshold;

  for (std::size_t b = 0; b < kBoneCount; ++b) {
    const Keypoint2D& p = frame[kBones[b].parent];
    const Keypoint2D& c = frame[kBones[b].child];
    if (p.visible(tau) && c.visible(tau)) {
      draw_segment(img, p, c, spec.line_thickness, kPoseColors[b]);
    }
  }
  if (spec.draw_hands) {
    if (frame.left_hand) draw_hand(img, *frame.left_hand, spec);
    if (frame.right_hand) draw_hand(img, *frame.right_hand, spec);
  }
  if (spec.draw_face && frame.face) {
    for (const Keypoint2D& k : *frame.face) {
      if (!k.visible(tau)) continue;
      const long long x = pixel_coordinate(k.x);
      const long long y = pixel_coordinate(k.y);
      if (x >= 0 && y >= 0 && x < spec.width && y < spec.height) {
        img.put(static_cast<int>(x), static_cast<int>(y), kFaceColor);
      }
    }
  }
  if (spec.joint_radius > 0) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const Keypoint2D& k = frame.body[j];
      if (!k.visible(tau)) continue;
      draw_disc(img, pixel_coordinate(k.x), pixel_coordinate(k.y), spec.joint_radius,
                kPoseColors[j]);
    }
  }
  return img;
}

std::string encode_ppm(const ImageBuffer& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(img.bytes().data()), img.bytes().size());
  return out;
}

}  // namespace posekit
