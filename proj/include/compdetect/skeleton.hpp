// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace compdetect {

inline constexpr std::size_t kJointCount = 20;
inline constexpr std::size_t kChannelCount = kJointCount * 3;
inline constexpr std::size_t kClassCount = 4;

/// Movement classes. Codes are stable and used in every serialized form.
enum class Label : int { NC = 0, TLF = 1, TR = 2, SE = 3 };

/// Rehabilitation movements; each compensation class belongs to exactly one.
enum class ActionKind : int { TouchMouth = 0, ExtendBackward = 1, ArmAbduction = 2 };

inline constexpr std::array<Label, kClassCount> kAllLabels = {Label::NC, Label::TLF, Label::TR,
                                                              Label::SE};
inline constexpr std::array<ActionKind, 3> kAllActions = {
    ActionKind::TouchMouth, ActionKind::ExtendBackward, ActionKind::ArmAbduction};

constexpr int label_code(Label l) { return static_cast<int>(l); }
Label label_from_code(int code);
std::string_view label_name(Label l);
Label parse_label(std::string_view name);

std::string_view action_name(ActionKind a);
ActionKind parse_action(std::string_view name);

/// The compensation paired with an action (TouchMouth -> TLF, ExtendBackward -> TR,
/// ArmAbduction -> SE).
Label compensation_for(ActionKind a);
/// Inverse of compensation_for; NC has no associated action.
std::optional<ActionKind> action_for(Label l);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// One skeleton sample: 20 joints in camera coordinates (meters), joint-major xyz.
struct SkeletonFrame {
  double timestamp = 0.0;
  std::array<double, kChannelCount> coords{};

  Vec3 joint(std::size_t j) const { return {coords[3 * j], coords[3 * j + 1], coords[3 * j + 2]}; }
  void set_joint(std::size_t j, const Vec3& p) {
    coords[3 * j] = p.x;
    coords[3 * j + 1] = p.y;
    coords[3 * j + 2] = p.z;
  }
};

/// Mean over joints of the Euclidean distance between corresponding joints.
double mean_joint_distance(const SkeletonFrame& a, const SkeletonFrame& b);

struct MotionSequence {
  std::vector<SkeletonFrame> frames;
  Label label = Label::NC;
  ActionKind action = ActionKind::TouchMouth;
  std::string subject_id;
  int view_id = 0;
  int repetition = 0;
  double fps = 30.0;
  bool preprocessed = false;

  std::size_t length() const { return frames.size(); }

  /// Throws DataError unless the sequence has at least `min_frames` frames, finite
  /// coordinates, strictly increasing non-negative timestamps and view_id in 0..2.
  void validate(std::size_t min_frames = 2) const;

  /// Short human-readable identifier used in error messages.
  std::string describe() const;
};

struct SkeletonGraph {
  std::size_t n_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::string> joint_names;

  std::size_t degree(int node) const;
  bool is_connected() const;
  /// Throws DataError on self-loops, duplicate edges or out-of-range endpoints.
  void validate() const;
};

/// Joint indices of the upper-body graph.
namespace joints {
inline constexpr int kPelvis = 0;
inline constexpr int kSpineNavel = 1;
inline constexpr int kSpineChest = 2;
inline constexpr int kNeck = 3;
inline constexpr int kHead = 4;
inline constexpr int kNose = 5;
// Per-side blocks start at kLeftBase / kRightBase, in this order.
inline constexpr int kClavicle = 0;
inline constexpr int kShoulder = 1;
inline constexpr int kElbow = 2;
inline constexpr int kWrist = 3;
inline constexpr int kHand = 4;
inline constexpr int kHandTip = 5;
inline constexpr int kThumb = 6;
inline constexpr int kLeftBase = 6;
inline constexpr int kRightBase = 13;
} // namespace joints

/// Fixed 20-joint, 19-edge upper-body tree (Azure Kinect joint vocabulary).
SkeletonGraph canonical_upper_limb_graph();

} // namespace compdetect
