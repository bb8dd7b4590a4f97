#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "posekit/epi.hpp"
#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"
#include "posekit/render.hpp"
#include "posekit/synthetic.hpp"

using namespace posekit;

namespace {

CanvasSpec small_canvas(int w = 32, int h = 32) {
  CanvasSpec c;
  c.width = w;
  c.height = h;
  c.line_thickness = 1;
  c.joint_radius = 0;
  return c;
}

std::set<std::pair<int, int>> lit(const ImageBuffer& img) {
  std::set<std::pair<int, int>> out;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!(img.at(x, y) == Rgb{})) out.insert({x, y});
    }
  }
  return out;
}

}  // namespace

TEST(Render, AllMissingIsSolidBackground) {
  CanvasSpec c = small_canvas();
  c.background = {10, 20, 30};
  const ImageBuffer img = render_frame(PoseFrame{}, c);
  EXPECT_EQ(img, ImageBuffer(32, 32, {10, 20, 30}));
}

TEST(Render, SingleHorizontalBone) {
  PoseFrame f;
  f[Joint::kNeck] = {2, 10, 1};
  f[Joint::kRightShoulder] = {12, 10, 1};
  const ImageBuffer img = render_frame(f, small_canvas());
  std::set<std::pair<int, int>> want;
  for (int x = 2; x <= 12; ++x) want.insert({x, 10});
  EXPECT_EQ(lit(img), want);
  for (const auto& [x, y] : want) EXPECT_EQ(img.at(x, y), kPoseColors[0]);
}

TEST(Render, ThicknessStampsSquare) {
  PoseFrame f;
  f[Joint::kNeck] = {5, 5, 1};
  f[Joint::kRightShoulder] = {5, 5, 1};
  CanvasSpec c = small_canvas();
  c.line_thickness = 3;
  std::set<std::pair<int, int>> want;
  for (int y = 4; y <= 6; ++y) {
    for (int x = 4; x <= 6; ++x) want.insert({x, y});
  }
  EXPECT_EQ(lit(render_frame(f, c)), want);
}

TEST(Render, PureFunction) {
  StickFigureOptions o;
  o.width = 64;
  o.height = 64;
  o.neck = {32, 16};
  o.torso = 14;
  o.hands = true;
  o.face = true;
  const PoseFrame f = make_stick_figure(o).frames[0];
  CanvasSpec c;
  c.width = 64;
  c.height = 64;
  std::set<std::string> distinct;
  for (int i = 0; i < 1000; ++i) distinct.insert(encode_ppm(render_frame(f, c)));
  EXPECT_EQ(distinct.size(), 1u);
}

TEST(Render, TranslationConsistent) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    PoseFrame f;
    for (auto& k : f.body) k = {40 + std::floor(rng.uniform(0, 48) * 8) / 8, 40 + std::floor(rng.uniform(0, 48) * 8) / 8, 1};
    const int dx = static_cast<int>(rng.uniform_index(21)) - 10;
    const int dy = static_cast<int>(rng.uniform_index(21)) - 10;
    PoseFrame g = f;
    for (auto& k : g.body) {
      k.x += dx;
      k.y += dy;
    }
    CanvasSpec c;
    c.width = 128;
    c.height = 128;
    const ImageBuffer a = render_frame(f, c);
    const ImageBuffer b = render_frame(g, c);
    std::set<std::pair<int, int>> shifted;
    for (const auto& [x, y] : lit(a)) shifted.insert({x + dx, y + dy});
    EXPECT_EQ(lit(b), shifted);
    for (const auto& [x, y] : lit(a)) EXPECT_EQ(b.at(x + dx, y + dy), a.at(x, y));
  }
}

TEST(Render, DroppedArmLeavesNoArmPixels) {
  StickFigureOptions o;
  o.frames = 1;
  const PoseSequence s = make_stick_figure(o);
  RescalePlan plan;
  plan.ops.push_back(DropPart{BodyPart::kLeftArm});
  const PoseSequence dropped = apply_rescale(s, plan).sequence;
  CanvasSpec c;
  c.joint_radius = 0;
  const ImageBuffer before = render_frame(s.frames[0], c);
  const ImageBuffer after = render_frame(dropped.frames[0], c);
  auto count = [](const ImageBuffer& img) {
    std::size_t n = 0;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) n += img.at(x, y) == kPoseColors[4] || img.at(x, y) == kPoseColors[5];
    }
    return n;
  };
  EXPECT_GT(count(before), 0u);
  EXPECT_EQ(count(after), 0u);
}

TEST(Render, FarAwayEndpointsAreClipped) {
  PoseFrame f;
  f[Joint::kNeck] = {-1e15, 16, 1};
  f[Joint::kRightShoulder] = {1e15, 16, 1};
  const ImageBuffer img = render_frame(f, small_canvas());
  EXPECT_EQ(lit(img).size(), 32u);
}

TEST(Render, CanvasValidation) {
  CanvasSpec c;
  c.width = 8;
  EXPECT_THROW(validate_canvas(c), ConfigError);
  c.width = 64;
  c.line_thickness = 0;
  EXPECT_THROW(validate_canvas(c), ConfigError);
}

TEST(Ppm, OnePixelWhite) {
  const ImageBuffer img(1, 1, {255, 255, 255});
  EXPECT_EQ(encode_ppm(img), std::string("P6\n1 1\n255\n\xFF\xFF\xFF", 14));
}

TEST(Ppm, RedBlue) {
  ImageBuffer img(2, 1);
  img.put(0, 0, {255, 0, 0});
  img.put(1, 0, {0, 0, 255});
  EXPECT_EQ(encode_ppm(img), std::string("P6\n2 1\n255\n\xFF\x00\x00\x00\x00\xFF", 17));
}

TEST(Ppm, IndependentReaderRoundTrip) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng.uniform_index(40));
    const int h = 1 + static_cast<int>(rng.uniform_index(40));
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        img.put(x, y, {static_cast<std::uint8_t>(rng.uniform_index(256)), static_cast<std::uint8_t>(rng.uniform_index(256)),
                       static_cast<std::uint8_t>(rng.uniform_index(256))});
      }
    }
    const std::string bytes = encode_ppm(img);
    const oracle::Ppm decoded = oracle::read_p6(bytes);
    EXPECT_EQ(decoded.width, w);
    EXPECT_EQ(decoded.height, h);
    EXPECT_EQ(decoded.rgb, img.bytes());
    EXPECT_EQ(oracle::write_p6(decoded), bytes);
  }
}

TEST(Render, GoldenFrames) {
  namespace fs = std::filesystem;
  const fs::path data(POSEKIT_TEST_DATA_DIR);
  const PoseSequence s = parse_pose_json(read_text_file((data / "golden_pose.json").string()));
  ASSERT_EQ(s.frames.size(), 3u);
  CanvasSpec c;
  c.width = s.width;
  c.height = s.height;
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05zu.ppm", f);
    EXPECT_EQ(encode_ppm(render_frame(s.frames[f], c)), fixtures::slurp(data / "golden_render" / name)) << name;
  }
}
