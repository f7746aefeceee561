// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "compdetect/dataset.hpp"

namespace compdetect {

/// Synthetic rehabilitation-session generator settings. Ranges are closed [lo, hi].
struct GenConfig {
  int n_subjects = 15;
  int reps_per_action = 6;
  int views = 3;
  double fps = 30.0;
  double compensation_rate = 0.5;
  double noise_sigma = 0.003;
  std::array<double, 2> duration_range{2.0, 4.0};
  std::array<double, 2> tlf_pitch_deg{10.0, 30.0};
  std::array<double, 2> tr_yaw_deg{10.0, 30.0};
  std::array<double, 2> se_lift_m{0.03, 0.08};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Angles for one arm, radians. Flexion raises the arm forward, abduction sideways.
struct ArmAngles {
  double flexion = 0.0;
  double abduction = 0.0;
  double rotation = 0.0; // about the upper-arm axis
  double elbow = 0.0;
  double wrist = 0.0;
};

struct KinematicPose {
  double trunk_pitch = 0.0; // forward lean about the pelvis, radians
  double trunk_yaw = 0.0;   // rotation about the vertical, radians
  std::array<double, 2> shoulder_lift{0.0, 0.0}; // meters, {left, right}
  std::array<ArmAngles, 2> arms{};               // {left, right}
};

/// Bone lengths of one synthetic subject (meters).
struct BodyTemplate {
  double scale = 1.0;
  double pelvis_navel = 0.20;
  double navel_chest = 0.20;
  double chest_neck = 0.17;
  double neck_head = 0.12;
  double head_nose = 0.10;
  double chest_clavicle = 0.14;
  double clavicle_shoulder = 0.15;
  double upper_arm = 0.30;
  double forearm = 0.26;
  double hand = 0.08;
  double hand_tip = 0.07;
  double thumb = 0.06;

  static BodyTemplate scaled(double s);
};

/// Joint positions in the body frame: pelvis at origin, y up, z forward, x to the left.
SkeletonFrame forward_kinematics(const BodyTemplate& body, const KinematicPose& pose);

/// Ground truth recorded for each generated sequence.
struct GenProvenance {
  std::size_t index = 0;
  std::string subject_id;
  ActionKind action = ActionKind::TouchMouth;
  int repetition = 0;
  int view_id = 0;
  Label label = Label::NC;
  double magnitude = 0.0; // degrees (TLF, TR), meters (SE), 0 for NC
  int affected_side = 0;  // 0 left, 1 right
  double duration = 0.0;
  double body_scale = 1.0;
};

struct GeneratedData {
  Dataset dataset;
  std::vector<GenProvenance> provenance;
};

/// Sequences in canonical (subject, action, repetition, view) order; deterministic in seed.
GeneratedData generate(const GenConfig& cfg);

/// Magnitudes read back from joint geometry, relative to the first frame.
struct CompensationSignature {
  double trunk_pitch_deg = 0.0;
  double trunk_yaw_deg = 0.0;
  double shoulder_lift_m = 0.0;
};

/// Intended for noise-free generated sequences. Invariant under the camera transforms.
CompensationSignature compensation_signature(const MotionSequence& seq);

/// Writes the dataset JSONL plus `<stem>.provenance.json` next to it.
void save_generated(const GeneratedData& data, const GenConfig& cfg,
                    const std::filesystem::path& jsonl_path);

std::filesystem::path provenance_path_for(const std::filesystem::path& jsonl_path);

} // namespace compdetect
