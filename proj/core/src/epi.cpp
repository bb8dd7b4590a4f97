#include "posekit/epi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"

namespace posekit {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kBodyPartCount> kPartNames{
    "left_arm", "right_arm", "left_leg", "right_leg", "face", "left_hand", "right_hand",
};

// Canonical upright Body-18 in torso units (neck at the origin, y down,
// facing the camera so the subject's right side is at negative x).
constexpr std::array<Point2, kJointCount> kCanonicalBody{{
    {0.00, -0.30},  // nose
    {0.00, 0.00},   // neck
    {-0.35, 0.00},  // r_shoulder
    {-0.42, 0.45},  // r_elbow
    {-0.45, 0.85},  // r_wrist
    {0.35, 0.00},   // l_shoulder
    {0.42, 0.45},   // l_elbow
    {0.45, 0.85},   // l_wrist
    {-0.18, 0.98},  // r_hip
    {-0.20, 1.55},  // r_knee
    {-0.21, 2.10},  // r_ankle
    {0.18, 0.98},   // l_hip
    {0.20, 1.55},   // l_knee
    {0.21, 2.10},   // l_ankle
    {-0.06, -0.36}, // r_eye
    {0.06, -0.36},  // l_eye
    {-0.14, -0.33}, // r_ear
    {0.14, -0.33},  // l_ear
}};

// Canonical shoulder width in torso units, used when no hip is visible.
constexpr double kCanonicalShoulderWidth = 0.70;
constexpr double kSynthesizedConfidence = 0.5;

struct PartSpec {
  Joint attach;
  std::vector<Joint> joints;
  bool left_hand = false;
  bool right_hand = false;
  bool face_block = false;
};

PartSpec part_spec(BodyPart p) {
  switch (p) {
    case BodyPart::kLeftArm:
      return {Joint::kLeftShoulder, {Joint::kLeftElbow, Joint::kLeftWrist}, true, false, false};
    case BodyPart::kRightArm:
      return {Joint::kRightShoulder, {Joint::kRightElbow, Joint::kRightWrist}, false, true, false};
    case BodyPart::kLeftLeg:
      return {Joint::kLeftHip, {Joint::kLeftKnee, Joint::kLeftAnkle}};
    case BodyPart::kRightLeg:
      return {Joint::kRightHip, {Joint::kRightKnee, Joint::kRightAnkle}};
    case BodyPart::kFace:
      return {Joint::kNose,
              {Joint::kRightEye, Joint::kLeftEye, Joint::kRightEar, Joint::kLeftEar},
              false, false, true};
    case BodyPart::kLeftHand:
      return {Joint::kLeftWrist, {}, true, false, false};
    case BodyPart::kRightHand:
      return {Joint::kRightWrist, {}, false, true, false};
  }
  return {};
}

double clamp_ratio(double r, const EpiConfig& cfg) { return std::clamp(r, cfg.ratio_min, cfg.ratio_max); }

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct DrivingReference {
  std::array<std::optional<double>, kBoneCount> length;
  std::optional<double> torso;
};

DrivingReference driving_reference(const PoseSequence& driving, const EpiConfig& cfg) {
  DrivingReference ref;
  const double tau = cfg.visibility_threshold;
  if (cfg.ref_frame_policy == RefFramePolicy::kFirst) {
    const BoneMetrics m = bone_metrics(driving.frames.front(), tau);
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      if (m[b].visible) ref.length[b] = m[b].length;
    }
    ref.torso = torso_length(driving.frames.front(), tau);
    return ref;
  }
  std::array<std::vector<double>, kBoneCount> per_bone;
  std::vector<double> torsos;
  for (const PoseFrame& frame : driving.frames) {
    const BoneMetrics m = bone_metrics(frame, tau);
    for (std::size_t b = 0; b < kBoneCount; ++b) {
      if (m[b].visible) per_bone[b].push_back(m[b].length);
    }
    if (auto t = torso_length(frame, tau)) torsos.push_back(*t);
  }
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    if (!per_bone[b].empty()) ref.length[b] = median(per_bone[b]);
  }
  if (!torsos.empty()) ref.torso = median(torsos);
  return ref;
}

bool has_visible_torso(const PoseSequence& seq, double tau) {
  return std::any_of(seq.frames.begin(), seq.frames.end(),
                     [&](const PoseFrame& f) { return torso_length(f, tau).has_value(); });
}

/// Forward kinematics from the root: each bone keeps its direction and is
/// scaled by its ratio when both endpoints are visible, otherwise the child
/// follows its parent rigidly. Face block scales about the nose, hands
/// translate with their wrists.
PoseFrame scale_frame(const PoseFrame& frame, const std::array<double, kBoneCount>& ratio,
                      double face_ratio, Point2 new_root, double tau) {
  PoseFrame out = frame;
  std::array<Point2, kJointCount> pos{};
  pos[index_of(kRootJoint)] = new_root;
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    const Keypoint2D& p = frame[kBones[b].parent];
    const Keypoint2D& c = frame[kBones[b].child];
    const double r = p.visible(tau) && c.visible(tau) ? ratio[b] : 1.0;
    const Point2 np = pos[index_of(kBones[b].parent)];
    pos[index_of(kBones[b].child)] = {np.x + r * (c.x - p.x), np.y + r * (c.y - p.y)};
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    out.body[j].x = pos[j].x;
    out.body[j].y = pos[j].y;
  }
  if (out.face) {
    const Keypoint2D& old_nose = frame[Joint::kNose];
    const Point2 nose = pos[index_of(Joint::kNose)];
    for (Keypoint2D& k : *out.face) {
      k.x = nose.x + face_ratio * (k.x - old_nose.x);
      k.y = nose.y + face_ratio * (k.y - old_nose.y);
    }
  }
  auto follow = [&](std::optional<HandKeypoints>& hand, Joint wrist) {
    if (!hand) return;
    const double dx = pos[index_of(wrist)].x - frame[wrist].x;
    const double dy = pos[index_of(wrist)].y - frame[wrist].y;
    for (Keypoint2D& k : *hand) {
      k.x += dx;
      k.y += dy;
    }
  };
  follow(out.left_hand, Joint::kLeftWrist);
  follow(out.right_hand, Joint::kRightWrist);
  return out;
}

std::optional<double> body_scale(const PoseFrame& frame, double tau) {
  if (auto t = torso_length(frame, tau); t && *t > 0.0) return *t;
  const Keypoint2D& rs = frame[Joint::kRightShoulder];
  const Keypoint2D& ls = frame[Joint::kLeftShoulder];
  if (rs.visible(tau) && ls.visible(tau)) {
    const double w = std::hypot(ls.x - rs.x, ls.y - rs.y);
    if (w > 0.0) return w / kCanonicalShoulderWidth;
  }
  return std::nullopt;
}

bool part_present(const PoseFrame& frame, const PartSpec& spec, double tau) {
  for (Joint j : spec.joints) {
    if (frame[j].visible(tau)) return true;
  }
  auto any_visible = [&](const std::optional<HandKeypoints>& hand) {
    return hand && std::any_of(hand->begin(), hand->end(),
                               [&](const Keypoint2D& k) { return k.visible(tau); });
  };
  if (spec.joints.empty()) {
    if (spec.left_hand) return any_visible(frame.left_hand);
    if (spec.right_hand) return any_visible(frame.right_hand);
  }
  return false;
}

HandKeypoints canonical_hand(Point2 wrist, double scale, bool left) {
  HandKeypoints hand{};
  hand[0] = {wrist.x, wrist.y, kSynthesizedConfidence};
  const double side = left ? 1.0 : -1.0;
  for (std::size_t finger = 0; finger < 5; ++finger) {
    // Fingers fan out below the wrist; the thumb is spread further inward.
    const double spread = (static_cast<double>(finger) - 2.0) * 0.22 - (finger == 0 ? 0.25 : 0.0);
    const double angle = std::numbers::pi / 2.0 - side * spread;
    for (std::size_t k = 1; k <= 4; ++k) {
      const double d = scale * (0.06 + 0.045 * static_cast<double>(k));
      hand[4 * finger + k] = {wrist.x + d * std::cos(angle), wrist.y + d * std::sin(angle),
                              kSynthesizedConfidence};
    }
  }
  return hand;
}

void drop_part(PoseFrame& frame, const PartSpec& spec) {
  for (Joint j : spec.joints) frame[j].confidence = 0.0;
  auto clear = [](std::optional<HandKeypoints>& hand) {
    if (hand) {
      for (Keypoint2D& k : *hand) k.confidence = 0.0;
    }
  };
  if (spec.left_hand) clear(frame.left_hand);
  if (spec.right_hand) clear(frame.right_hand);
  if (spec.face_block && frame.face) {
    for (Keypoint2D& k : *frame.face) k.confidence = 0.0;
  }
}

enum class AddOutcome { kAdded, kPresent, kNoAttachment };

AddOutcome add_part(PoseFrame& frame, BodyPart part, const PartSpec& spec, double tau) {
  if (part_present(frame, spec, tau)) return AddOutcome::kPresent;
  const Keypoint2D& attach = frame[spec.attach];
  const auto scale = body_scale(frame, tau);
  if (!attach.visible(tau) || !scale) return AddOutcome::kNoAttachment;
  const Point2 origin = kCanonicalBody[index_of(spec.attach)];
  for (Joint j : spec.joints) {
    const Point2 c = kCanonicalBody[index_of(j)];
    frame[j] = {attach.x + *scale * (c.x - origin.x), attach.y + *scale * (c.y - origin.y),
                kSynthesizedConfidence};
  }
  if (part == BodyPart::kLeftHand) frame.left_hand = canonical_hand(attach.position(), *scale, true);
  if (part == BodyPart::kRightHand) frame.right_hand = canonical_hand(attach.position(), *scale, false);
  return AddOutcome::kAdded;
}

void apply_scale_group(PoseSequence& seq, const ScaleGroup& op, double tau) {
  std::array<double, kBoneCount> ratio;
  ratio.fill(1.0);
  for (std::size_t b : bones_in_group(op.group)) ratio[b] = op.factor;
  const double face_ratio = op.group == PartGroup::kFace ? op.factor : 1.0;
  for (PoseFrame& frame : seq.frames) {
    frame = scale_frame(frame, ratio, face_ratio, frame[kRootJoint].position(), tau);
  }
}

RescaleOp pool_entry(std::size_t i, double factor) {
  if (i < kPartGroupCount) return ScaleGroup{static_cast<PartGroup>(i), factor};
  i -= kPartGroupCount;
  if (i < kBodyPartCount) return DropPart{static_cast<BodyPart>(i)};
  return AddPart{static_cast<BodyPart>(i - kBodyPartCount)};
}

// Emitted by hand so reals use the canonical six-decimal form.
std::string plan_text(const RescalePlan& plan) {
  std::string out = "{\"ops\": [";
  for (std::size_t i = 0; i < plan.ops.size(); ++i) {
    if (i) out += ", ";
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, ScaleGroup>) {
            out += "{\"op\": \"scale_group\", \"group\": \"" + std::string(group_name(o.group)) +
                   "\", \"factor\": " + format_fixed6(o.factor) + "}";
          } else if constexpr (std::is_same_v<T, DropPart>) {
            out += "{\"op\": \"drop_part\", \"part\": \"" + std::string(part_name(o.part)) + "\"}";
          } else {
            out += "{\"op\": \"add_part\", \"part\": \"" + std::string(part_name(o.part)) + "\"}";
          }
        },
        plan.ops[i]);
  }
  out += "]}";
  return out;
}

std::string escape(std::string_view s) { return json(std::string(s)).dump(); }

}  // namespace

std::string_view policy_name(RefFramePolicy p) {
  return p == RefFramePolicy::kFirst ? "first" : "median";
}

std::optional<RefFramePolicy> parse_policy(std::string_view name) {
  if (name == "first") return RefFramePolicy::kFirst;
  if (name == "median") return RefFramePolicy::kMedian;
  return std::nullopt;
}

std::string_view part_name(BodyPart p) { return kPartNames[static_cast<std::size_t>(p)]; }

std::optional<BodyPart> parse_part(std::string_view name) {
  for (std::size_t i = 0; i < kBodyPartCount; ++i) {
    if (kPartNames[i] == name) return static_cast<BodyPart>(i);
  }
  return std::nullopt;
}

void EpiConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (!(p_rescale >= 0.0 && p_rescale <= 1.0)) throw ConfigError("p_rescale must lie in [0, 1]");
  if (!(ratio_min > 0.0 && ratio_min < 1.0 && ratio_max > 1.0 && std::isfinite(ratio_max))) {
    throw ConfigError("ratio bounds must satisfy 0 < ratio_min < 1 < ratio_max");
  }
  if (!(factor_low > 0.0 && factor_low <= factor_high && std::isfinite(factor_high))) {
    throw ConfigError("factor range must satisfy 0 < low <= high");
  }
  if (max_ops_per_plan < 1) throw ConfigError("max_ops_per_plan must be >= 1");
  if (!(visibility_threshold >= 0.0 && visibility_threshold <= 1.0)) {
    throw ConfigError("visibility threshold must lie in [0, 1]");
  }
}

void RescalePlan::validate(const EpiConfig& cfg) const {
  std::vector<std::pair<std::size_t, std::size_t>> seen;
  for (const RescaleOp& op : ops) {
    const std::size_t kind = op.index();
    std::size_t target = 0;
    if (const auto* s = std::get_if<ScaleGroup>(&op)) {
      if (!std::isfinite(s->factor) || s->factor < cfg.ratio_min || s->factor > cfg.ratio_max) {
        throw ConfigError("scale factor " + std::to_string(s->factor) + " outside [" +
                          std::to_string(cfg.ratio_min) + ", " + std::to_string(cfg.ratio_max) + "]");
      }
      target = static_cast<std::size_t>(s->group);
    } else if (const auto* d = std::get_if<DropPart>(&op)) {
      target = static_cast<std::size_t>(d->part);
    } else {
      target = static_cast<std::size_t>(std::get<AddPart>(op).part);
    }
    if (kind != 0 && std::find(seen.begin(), seen.end(), std::pair{kind, target}) != seen.end()) {
      throw ConfigError("duplicate drop/add op on the same part");
    }
    seen.emplace_back(kind, target);
  }
}

void check_anchor(const PoseFrame& anchor, double tau) {
  if (!anchor[Joint::kNeck].visible(tau)) throw UnalignableError("anchor has no visible neck");
  if (!anchor[Joint::kLeftShoulder].visible(tau) && !anchor[Joint::kRightShoulder].visible(tau)) {
    throw UnalignableError("anchor has no visible shoulder");
  }
  if (!anchor[Joint::kLeftHip].visible(tau) && !anchor[Joint::kRightHip].visible(tau)) {
    throw UnalignableError("anchor has no visible hip");
  }
}

AnchorPool::AnchorPool(std::vector<PoseFrame> anchors, double visibility_threshold)
    : anchors_(std::move(anchors)) {
  if (anchors_.empty()) throw UsageError("anchor pool is empty");
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    try {
      check_anchor(anchors_[i], visibility_threshold);
    } catch (const UnalignableError& e) {
      throw UnalignableError("pool entry " + std::to_string(i) + ": " + e.what());
    }
  }
}

BoneRatios measure_bone_ratios(const PoseSequence& driving, const PoseFrame& anchor,
                               const EpiConfig& cfg) {
  BoneRatios out;
  out.ratio.fill(1.0);
  out.raw.fill(1.0);
  const DrivingReference ref = driving_reference(driving, cfg);
  const BoneMetrics am = bone_metrics(anchor, cfg.visibility_threshold);
  double face_sum = 0.0;
  int face_count = 0;
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    // Zero-length driving bones carry no scale information.
    if (!am[b].visible || !ref.length[b] || *ref.length[b] <= 0.0) continue;
    out.measured[b] = true;
    out.raw[b] = am[b].length / *ref.length[b];
    out.ratio[b] = clamp_ratio(out.raw[b], cfg);
    if (kBones[b].group == PartGroup::kFace) {
      face_sum += out.ratio[b];
      ++face_count;
    }
  }
  if (face_count > 0) out.face_ratio = face_sum / face_count;
  const auto anchor_torso = torso_length(anchor, cfg.visibility_threshold);
  if (anchor_torso && ref.torso && *ref.torso > 0.0) {
    out.torso_ratio = clamp_ratio(*anchor_torso / *ref.torso, cfg);
  }
  return out;
}

BoneRatios compute_bone_ratios(const PoseSequence& driving, const PoseFrame& anchor,
                               const EpiConfig& cfg) {
  if (driving.frames.empty()) throw UsageError("driving sequence is empty");
  check_anchor(anchor, cfg.visibility_threshold);
  if (!has_visible_torso(driving, cfg.visibility_threshold)) {
    throw UnalignableError("driving sequence has no frame with a visible torso");
  }
  return measure_bone_ratios(driving, anchor, cfg);
}

PoseSequence realign_with_ratios(const PoseSequence& driving, const PoseFrame& anchor,
                                 const BoneRatios& ratios, const EpiConfig& cfg) {
  const double tau = cfg.visibility_threshold;
  // Trajectory origin: the first frame whose neck is visible.
  Point2 origin = driving.frames.front()[kRootJoint].position();
  for (const PoseFrame& f : driving.frames) {
    if (f[kRootJoint].visible(tau)) {
      origin = f[kRootJoint].position();
      break;
    }
  }
  const Point2 anchor_neck = anchor[kRootJoint].position();
  PoseSequence out = driving;
  for (PoseFrame& frame : out.frames) {
    const Point2 neck = frame[kRootJoint].position();
    const Point2 root{anchor_neck.x + ratios.torso_ratio * (neck.x - origin.x),
                      anchor_neck.y + ratios.torso_ratio * (neck.y - origin.y)};
    frame = scale_frame(frame, ratios.ratio, ratios.face_ratio, root, tau);
  }
  return out;
}

PoseSequence realign(const PoseSequence& driving, const PoseFrame& anchor, const EpiConfig& cfg) {
  return realign_with_ratios(driving, anchor, compute_bone_ratios(driving, anchor, cfg), cfg);
}

RescalePlan sample_rescale_plan(Rng& rng, const EpiConfig& cfg) {
  const std::size_t max_ops =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.max_ops_per_plan, 1)), kRescalePoolSize);
  const std::size_t k = 1 + rng.uniform_index(max_ops);
  std::array<std::size_t, kRescalePoolSize> order{};
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double log_lo = std::log(cfg.factor_low);
  const double log_hi = std::log(cfg.factor_high);
  RescalePlan plan;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(kRescalePoolSize - i);
    std::swap(order[i], order[j]);
    double factor = 1.0;
    if (order[i] < kPartGroupCount) {
      factor = std::clamp(std::exp(log_lo + rng.uniform() * (log_hi - log_lo)), cfg.ratio_min,
                          cfg.ratio_max);
    }
    plan.ops.push_back(pool_entry(order[i], factor));
  }
  return plan;
}

RescaleResult apply_rescale(const PoseSequence& seq, const RescalePlan& plan, double tau) {
  RescaleResult result{seq, {}};
  PoseSequence& out = result.sequence;
  for (std::size_t i = 0; i < plan.ops.size(); ++i) {
    const RescaleOp& op = plan.ops[i];
    if (const auto* s = std::get_if<ScaleGroup>(&op)) {
      apply_scale_group(out, *s, tau);
    } else if (const auto* d = std::get_if<DropPart>(&op)) {
      const PartSpec spec = part_spec(d->part);
      for (PoseFrame& frame : out.frames) drop_part(frame, spec);
    } else {
      const BodyPart part = std::get<AddPart>(op).part;
      const PartSpec spec = part_spec(part);
      std::size_t present = 0;
      std::size_t unattached = 0;
      for (PoseFrame& frame : out.frames) {
        switch (add_part(frame, part, spec, tau)) {
          case AddOutcome::kPresent: ++present; break;
          case AddOutcome::kNoAttachment: ++unattached; break;
          case AddOutcome::kAdded: break;
        }
      }
      // Keep the hand block layout uniform across frames.
      auto fill_missing = [&](std::optional<HandKeypoints> PoseFrame::*member) {
        const bool any = std::any_of(out.frames.begin(), out.frames.end(),
                                     [&](const PoseFrame& f) { return (f.*member).has_value(); });
        if (!any) return;
        for (PoseFrame& f : out.frames) {
          if (!(f.*member)) f.*member = HandKeypoints{};
        }
      };
      fill_missing(&PoseFrame::left_hand);
      fill_missing(&PoseFrame::right_hand);
      if (present > 0) {
        result.warnings.push_back({i, "add_part " + std::string(part_name(part)) +
                                          ": part already present in " + std::to_string(present) +
                                          " frame(s); left unchanged"});
      }
      if (unattached > 0) {
        result.warnings.push_back({i, "add_part " + std::string(part_name(part)) +
                                          ": no visible attachment joint or body scale in " +
                                          std::to_string(unattached) + " frame(s)"});
      }
    }
  }
  return result;
}

EpiResult epi_transform(const PoseSequence& seq, const AnchorPool& pool, const EpiConfig& cfg,
                        Rng& rng) {
  cfg.validate();
  EpiResult result{seq, {}};
  if (!rng.bernoulli(cfg.lambda)) return result;

  const std::size_t anchor_index = rng.uniform_index(pool.size());
  const BoneRatios ratios = compute_bone_ratios(seq, pool[anchor_index], cfg);
  result.sequence = realign_with_ratios(seq, pool[anchor_index], ratios, cfg);
  result.record.applied = true;
  result.record.anchor_index = anchor_index;
  result.record.per_bone_ratio = ratios.ratio;
  result.record.torso_ratio = ratios.torso_ratio;

  if (rng.bernoulli(cfg.p_rescale)) {
    RescalePlan plan = sample_rescale_plan(rng, cfg);
    RescaleResult rescaled = apply_rescale(result.sequence, plan, cfg.visibility_threshold);
    result.sequence = std::move(rescaled.sequence);
    result.record.warnings = std::move(rescaled.warnings);
    result.record.plan = std::move(plan);
  }
  return result;
}

std::string write_rescale_plan(const RescalePlan& plan) { return plan_text(plan) + "\n"; }

RescalePlan parse_rescale_plan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  if (!doc.is_object() || !doc.contains("ops") || !doc["ops"].is_array()) {
    throw SchemaError("ops", "expected an object with an \"ops\" array");
  }
  RescalePlan plan;
  for (std::size_t i = 0; i < doc["ops"].size(); ++i) {
    const json& o = doc["ops"][i];
    const std::string where = "ops[" + std::to_string(i) + "]";
    if (!o.is_object() || !o.contains("op") || !o["op"].is_string()) {
      throw SchemaError(where + ".op", "missing op name");
    }
    const std::string kind = o["op"].get<std::string>();
    if (kind == "scale_group") {
      if (!o.contains("group") || !o["group"].is_string()) throw SchemaError(where + ".group", "missing");
      const auto g = parse_group(o["group"].get<std::string>());
      if (!g) throw SchemaError(where + ".group", "unknown part group");
      if (!o.contains("factor") || !o["factor"].is_number()) throw SchemaError(where + ".factor", "missing");
      plan.ops.push_back(ScaleGroup{*g, o["factor"].get<double>()});
    } else if (kind == "drop_part" || kind == "add_part") {
      if (!o.contains("part") || !o["part"].is_string()) throw SchemaError(where + ".part", "missing");
      const auto p = parse_part(o["part"].get<std::string>());
      if (!p) throw SchemaError(where + ".part", "unknown body part");
      if (kind == "drop_part") {
        plan.ops.push_back(DropPart{*p});
      } else {
        plan.ops.push_back(AddPart{*p});
      }
    } else {
      throw SchemaError(where + ".op", "unknown op '" + kind + "'");
    }
  }
  return plan;
}

std::string write_transform_record(const TransformRecord& record) {
  std::string out = "{\n";
  out += std::string("  \"applied\": ") + (record.applied ? "true" : "false") + ",\n";
  out += "  \"anchor_index\": " +
         (record.anchor_index ? std::to_string(*record.anchor_index) : std::string("null")) + ",\n";
  out += "  \"plan\": " + (record.plan ? plan_text(*record.plan) : std::string("null")) + ",\n";
  out += "  \"torso_ratio\": " + format_fixed6(record.torso_ratio) + ",\n";
  out += "  \"per_bone_ratio\": {";
  for (std::size_t b = 0; b < kBoneCount; ++b) {
    if (b) out += ", ";
    out += escape(bone_name(b)) + ": " + format_fixed6(record.per_bone_ratio[b]);
  }
  out += "},\n";
  out += "  \"warnings\": [";
  for (std::size_t i = 0; i < record.warnings.size(); ++i) {
    if (i) out += ", ";
    out += "{\"op_index\": " + std::to_string(record.warnings[i].op_index) +
           ", \"message\": " + escape(record.warnings[i].message) + "}";
  }
  out += "]\n}\n";
  return out;
}

}  // namespace posekit
