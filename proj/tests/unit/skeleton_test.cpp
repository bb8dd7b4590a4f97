#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/synthetic.hpp"

using namespace posekit;

namespace {

std::vector<Keypoint2D> coco_points() {
  std::vector<Keypoint2D> pts(kCocoWholeBodyCount);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {10.0 + static_cast<double>(i), 500.0 - 2.0 * static_cast<double>(i), (i % 10) / 10.0};
  }
  return pts;
}

PoseSequence two_frames() {
  StickFigureOptions o;
  o.frames = 2;
  return make_stick_figure(o);
}

}  // namespace

TEST(Skeleton, TreeRootedAtNeckReachesEveryJointOnce) {
  const std::vector<Joint> order = traverse_from_root();
  ASSERT_EQ(order.size(), kJointCount);
  EXPECT_EQ(order.front(), Joint::kNeck);
  std::set<Joint> seen(order.begin(), order.end());
  EXPECT_EQ(seen.size(), kJointCount);
  std::array<int, kJointCount> parents{};
  for (const Bone& b : kBones) ++parents[index_of(b.child)];
  for (std::size_t j = 0; j < kJointCount; ++j) {
    EXPECT_EQ(parents[j], j == index_of(Joint::kNeck) ? 0 : 1) << joint_name(j);
  }
}

TEST(Skeleton, GroupsCoverStatisticsRows) {
  for (std::size_t g = 0; g < kPartGroupCount; ++g) {
    EXPECT_FALSE(bones_in_group(static_cast<PartGroup>(g)).empty());
    EXPECT_EQ(parse_group(group_name(static_cast<PartGroup>(g))), static_cast<PartGroup>(g));
  }
  EXPECT_EQ(group_title(PartGroup::kShoulder), "Shoulder Length");
  EXPECT_EQ(group_title(PartGroup::kLowerLeg), "Lower Leg Length");
}

TEST(Skeleton, NeckIsShoulderMidpoint) {
  std::vector<Keypoint2D> pts(kCocoWholeBodyCount);
  pts[5] = {30, 0, 0.8};
  pts[6] = {10, 0, 1.0};
  const PoseFrame f = from_coco_wholebody(pts);
  EXPECT_EQ(f[Joint::kNeck], (Keypoint2D{20, 0, 0.8}));
}

TEST(Skeleton, AllMissingStaysMissing) {
  std::vector<Keypoint2D> pts(kCocoWholeBodyCount, Keypoint2D{5, 5, 0.0});
  const PoseFrame f = from_coco_wholebody(pts);
  for (const Keypoint2D& k : f.body) EXPECT_EQ(k.confidence, 0.0);
}

TEST(Skeleton, CocoMappingMatchesHandTable) {
  // Body-18 joint <- COCO-WholeBody index, applied by hand.
  const int table[kJointCount] = {0, -1, 6, 8, 10, 5, 7, 9, 12, 14, 16, 11, 13, 15, 2, 1, 4, 3};
  const auto pts = coco_points();
  const PoseSequence seq = parse_coco_wholebody_json(
      read_text_file(std::string(POSEKIT_TEST_DATA_DIR) + "/coco_wholebody_frame.json"));
  ASSERT_EQ(seq.frames.size(), 1u);
  EXPECT_EQ(seq.width, 640);
  EXPECT_EQ(seq.fps, 25.0);
  const PoseFrame& f = seq.frames[0];
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (table[j] < 0) continue;
    EXPECT_EQ(f.body[j], pts[static_cast<std::size_t>(table[j])]) << joint_name(j);
  }
  EXPECT_EQ(f[Joint::kNeck], (Keypoint2D{15.5, 489.0, 0.5}));
  ASSERT_TRUE(f.face && f.left_hand && f.right_hand);
  EXPECT_EQ((*f.face)[0], pts[23]);
  EXPECT_EQ((*f.face)[67], pts[90]);
  EXPECT_EQ((*f.left_hand)[0], pts[91]);
  EXPECT_EQ((*f.right_hand)[20], pts[132]);
}

TEST(Skeleton, ShouldersSurviveConversionBitExactly) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<Keypoint2D> pts(kCocoWholeBodyCount);
    for (auto& p : pts) p = {rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform()};
    const PoseFrame f = from_coco_wholebody(pts);
    EXPECT_EQ(f[Joint::kLeftShoulder], pts[5]);
    EXPECT_EQ(f[Joint::kRightShoulder], pts[6]);
  }
}

TEST(Skeleton, WrongKeypointCountIsSchemaError) {
  std::vector<Keypoint2D> pts(132);
  EXPECT_THROW(from_coco_wholebody(pts), SchemaError);
}

TEST(BoneMetrics, ThreeFourFive) {
  PoseFrame f;
  f[Joint::kNeck] = {0, 0, 1};
  f[Joint::kRightShoulder] = {3, 4, 1};
  const BoneMetrics m = bone_metrics(f);
  EXPECT_EQ(m[0].length, 5.0);
  EXPECT_EQ(m[0].direction, std::atan2(4.0, 3.0));
  EXPECT_TRUE(m[0].visible);
  EXPECT_FALSE(m[1].visible);
}

TEST(BoneMetrics, DegenerateBoneHasZeroDirection) {
  PoseFrame f;
  f[Joint::kNeck] = {7, 7, 1};
  f[Joint::kRightShoulder] = {7, 7, 1};
  EXPECT_EQ(bone_metrics(f)[0].length, 0.0);
  EXPECT_EQ(bone_metrics(f)[0].direction, 0.0);
}

TEST(BoneMetrics, MatchesPairwiseDistancesAndRigidMotions) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    PoseFrame f;
    for (auto& k : f.body) k = {rng.uniform(0, 500), rng.uniform(0, 500), 1.0};
    const BoneMetrics m = bone_metrics(f);
    const double theta = rng.uniform(-M_PI, M_PI);
    const double tx = rng.uniform(-100, 100), ty = rng.uniform(-100, 100);
    PoseFrame g = f;
    for (auto& k : g.body) {
      const double x = k.x, y = k.y;
      k.x = std::cos(theta) * x - std::sin(theta) * y + tx;
      k.y = std::sin(theta) * x + std::cos(theta) * y + ty;
    }
    const BoneMetrics n = bone_metrics(g);
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      EXPECT_NEAR(m[b].length, oracle::bone_length(f, b), 1e-12);
      EXPECT_NEAR(n[b].length, m[b].length, 1e-9);
      EXPECT_NEAR(std::remainder(n[b].direction - m[b].direction - theta, 2 * M_PI), 0.0, 1e-9);
    }
  }
}

TEST(Validate, WellFormedSequenceHasNoViolations) { EXPECT_TRUE(validate_sequence(two_frames()).empty()); }

TEST(Validate, ConfidenceAboveOneNamesField) {
  PoseSequence s = two_frames();
  s.frames[0][Joint::kNose].confidence = 1.2;
  const auto v = validate_sequence(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].frame, 0u);
  EXPECT_EQ(v[0].field, "body.nose.confidence");
}

TEST(Validate, NanCoordinateIsFinitenessViolation) {
  PoseSequence s = two_frames();
  s.frames[1][Joint::kLeftKnee].x = std::nan("");
  const auto v = validate_sequence(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].rule.find("finite"), std::string::npos);
}

TEST(Validate, MixedLayoutAndMarginAreReported) {
  PoseSequence s = two_frames();
  s.frames[1].face.emplace();
  s.frames[0][Joint::kNose].x = s.width * 1.6;
  EXPECT_EQ(validate_sequence(s).size(), 2u);
}
