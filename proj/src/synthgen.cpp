// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <json.hpp>

#include "compdetect/config.hpp"
#include "compdetect/errors.hpp"

namespace compdetect {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

constexpr double kDeg = std::numbers::pi / 180.0;

Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitX()).toRotationMatrix(); }
Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitY()).toRotationMatrix(); }
Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitZ()).toRotationMatrix(); }

Vec3 to_vec3(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }
Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

void check_range(const std::array<double, 2>& r, const char* name) {
  if (!(r[0] > 0.0 && r[1] > r[0])) {
    throw ConfigError(std::string(name) + " must be a positive range with lo < hi");
  }
}

double min_jerk(double x) { return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x); }

// Out-and-back reach profile over normalized time, 0 at both ends and 1 at the middle.
double reach_profile(double tau) { return tau <= 0.5 ? min_jerk(2.0 * tau) : min_jerk(2.0 - 2.0 * tau); }

// Compensation onset ramp, peaking mid-movement.
double compensation_profile(double tau) { return std::sin(std::numbers::pi * tau); }

ArmAngles rest_arm() { return {0.0, 5.0 * kDeg, 0.0, 10.0 * kDeg, 0.0}; }

ArmAngles target_for(ActionKind a) {
  switch (a) {
  case ActionKind::TouchMouth: return {55.0 * kDeg, -15.0 * kDeg, 40.0 * kDeg, 135.0 * kDeg, 10.0 * kDeg};
  case ActionKind::ExtendBackward: return {-45.0 * kDeg, 5.0 * kDeg, 0.0, 5.0 * kDeg, 0.0};
  case ActionKind::ArmAbduction: return {5.0 * kDeg, 90.0 * kDeg, 0.0, 5.0 * kDeg, 0.0};
  }
  return rest_arm();
}

ArmAngles blend(const ArmAngles& a, const ArmAngles& b, double w) {
  return {a.flexion + w * (b.flexion - a.flexion), a.abduction + w * (b.abduction - a.abduction),
          a.rotation + w * (b.rotation - a.rotation), a.elbow + w * (b.elbow - a.elbow),
          a.wrist + w * (b.wrist - a.wrist)};
}

struct Camera {
  Vector3d position;
  Matrix3d world_to_camera;
};

// Front camera plus two obliques at +-45 degrees, 2.5 m from the subject, y up, z depth.
Camera camera_for_view(int view) {
  static constexpr double kAngles[3] = {0.0, 45.0, -45.0};
  const Matrix3d yaw = rot_y(kAngles[view % 3] * kDeg);
  Camera cam;
  cam.position = yaw * Vector3d(0.0, 0.5, 2.5);
  const Vector3d z_axis = yaw * Vector3d(0.0, 0.0, -1.0);
  const Vector3d y_axis = Vector3d::UnitY();
  const Vector3d x_axis = y_axis.cross(z_axis);
  cam.world_to_camera.row(0) = x_axis.transpose();
  cam.world_to_camera.row(1) = y_axis.transpose();
  cam.world_to_camera.row(2) = z_axis.transpose();
  return cam;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace

void GenConfig::validate() const {
  if (n_subjects < 1) throw ConfigError("n_subjects must be >= 1");
  if (reps_per_action < 1) throw ConfigError("reps_per_action must be >= 1");
  if (views < 1 || views > 3) throw ConfigError("views must be in 1..3");
  if (!(fps > 0.0)) throw ConfigError("fps must be > 0");
  if (!(compensation_rate >= 0.0 && compensation_rate <= 1.0)) {
    throw ConfigError("compensation_rate must lie in [0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  check_range(duration_range, "duration_range");
  check_range(tlf_pitch_deg, "tlf_pitch_deg");
  check_range(tr_yaw_deg, "tr_yaw_deg");
  check_range(se_lift_m, "se_lift_m");
}

BodyTemplate BodyTemplate::scaled(double s) {
  BodyTemplate b;
  b.scale = s;
  for (double* len : {&b.pelvis_navel, &b.navel_chest, &b.chest_neck, &b.neck_head, &b.head_nose,
                      &b.chest_clavicle, &b.clavicle_shoulder, &b.upper_arm, &b.forearm, &b.hand,
                      &b.hand_tip, &b.thumb}) {
    *len *= s;
  }
  return b;
}

SkeletonFrame forward_kinematics(const BodyTemplate& body, const KinematicPose& pose) {
  using namespace joints;
  const Matrix3d trunk = rot_y(pose.trunk_yaw) * rot_x(pose.trunk_pitch);
  const Vector3d up = Vector3d::UnitY();
  SkeletonFrame f;
  const Vector3d pelvis = Vector3d::Zero();
  const Vector3d navel = pelvis + trunk * (body.pelvis_navel * up);
  const Vector3d chest = navel + trunk * (body.navel_chest * up);
  const Vector3d neck = chest + trunk * (body.chest_neck * up);
  const Vector3d head = neck + trunk * (body.neck_head * up);
  const Vector3d nose = head + trunk * (body.head_nose * Vector3d(0.0, -0.2, 1.0).normalized());
  f.set_joint(kPelvis, to_vec3(pelvis));
  f.set_joint(kSpineNavel, to_vec3(navel));
  f.set_joint(kSpineChest, to_vec3(chest));
  f.set_joint(kNeck, to_vec3(neck));
  f.set_joint(kHead, to_vec3(head));
  f.set_joint(kNose, to_vec3(nose));

  for (int side = 0; side < 2; ++side) {
    const double s = side == 0 ? 1.0 : -1.0; // +x is the subject's left
    const int base = side == 0 ? kLeftBase : kRightBase;
    const Vector3d clavicle =
        chest + trunk * (body.chest_clavicle * Vector3d(s * 0.25, 0.95, 0.1).normalized());
    // Shoulder elevation swings the clavicle-shoulder link upward about the sagittal axis.
    const double lift = std::clamp(pose.shoulder_lift[side] / body.clavicle_shoulder, -1.0, 1.0);
    const Vector3d shoulder =
        clavicle + trunk * rot_z(s * std::asin(lift)) * Vector3d(s * body.clavicle_shoulder, 0.0, 0.0);
    const ArmAngles& arm = pose.arms[side];
    const Matrix3d upper = trunk * rot_z(s * arm.abduction) * rot_x(-arm.flexion) * rot_y(s * arm.rotation);
    const Matrix3d lower = upper * rot_x(-arm.elbow);
    const Matrix3d hand_frame = lower * rot_x(-arm.wrist);
    const Vector3d down = -Vector3d::UnitY();
    const Vector3d elbow = shoulder + upper * (body.upper_arm * down);
    const Vector3d wrist = elbow + lower * (body.forearm * down);
    const Vector3d hand = wrist + hand_frame * (body.hand * down);
    const Vector3d tip = hand + hand_frame * (body.hand_tip * down);
    const Vector3d thumb =
        wrist + hand_frame * (body.thumb * Vector3d(-s * 0.5, -0.7, 0.5).normalized());
    f.set_joint(base + kClavicle, to_vec3(clavicle));
    f.set_joint(base + kShoulder, to_vec3(shoulder));
    f.set_joint(base + kElbow, to_vec3(elbow));
    f.set_joint(base + kWrist, to_vec3(wrist));
    f.set_joint(base + kHand, to_vec3(hand));
    f.set_joint(base + kHandTip, to_vec3(tip));
    f.set_joint(base + kThumb, to_vec3(thumb));
  }
  return f;
}

GeneratedData generate(const GenConfig& cfg) {
  cfg.validate();
  GeneratedData out;
  Camera cams[3] = {camera_for_view(0), camera_for_view(1), camera_for_view(2)};

  for (int subj = 0; subj < cfg.n_subjects; ++subj) {
    std::seed_seq seq_seed{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                           static_cast<std::uint32_t>(cfg.seed >> 32),
                           static_cast<std::uint32_t>(subj)};
    std::mt19937_64 rng(seq_seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    char id[16];
    std::snprintf(id, sizeof(id), "S%02d", subj + 1);
    const double body_scale = uniform(rng, 0.9, 1.1);
    const BodyTemplate body = BodyTemplate::scaled(body_scale);
    const int affected = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
    const double impairment = uniform(rng, 0.75, 1.0); // fraction of the full range reached
    const Vector3d seat(uniform(rng, -0.05, 0.05), uniform(rng, -0.03, 0.03), uniform(rng, -0.05, 0.05));

    for (ActionKind action : kAllActions) {
      for (int rep = 0; rep < cfg.reps_per_action; ++rep) {
        const bool compensated = std::bernoulli_distribution(cfg.compensation_rate)(rng);
        const Label label = compensated ? compensation_for(action) : Label::NC;
        double magnitude = 0.0;
        if (compensated) {
          switch (label) {
          case Label::TLF: magnitude = uniform(rng, cfg.tlf_pitch_deg[0], cfg.tlf_pitch_deg[1]); break;
          case Label::TR: magnitude = uniform(rng, cfg.tr_yaw_deg[0], cfg.tr_yaw_deg[1]); break;
          case Label::SE: magnitude = uniform(rng, cfg.se_lift_m[0], cfg.se_lift_m[1]); break;
          case Label::NC: break;
          }
        }
        const double duration = uniform(rng, cfg.duration_range[0], cfg.duration_range[1]);
        const double range = impairment * uniform(rng, 0.92, 1.08);
        const double base_pitch = uniform(rng, -3.0, 3.0) * kDeg;
        const double base_yaw = uniform(rng, -3.0, 3.0) * kDeg;
        const std::size_t n_frames =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(duration * cfg.fps)));

        const ArmAngles rest = rest_arm();
        const ArmAngles target = blend(rest, target_for(action), range);
        // Yaw sign rotates the trunk so the affected shoulder comes forward.
        const double yaw_sign = affected == 0 ? -1.0 : 1.0;

        std::vector<SkeletonFrame> body_frames(n_frames);
        for (std::size_t k = 0; k < n_frames; ++k) {
          const double tau = static_cast<double>(k) / static_cast<double>(n_frames - 1);
          KinematicPose pose;
          pose.trunk_pitch = base_pitch;
          pose.trunk_yaw = base_yaw;
          pose.arms = {rest, rest};
          pose.arms[affected] = blend(rest, target, reach_profile(tau));
          const double ramp = compensation_profile(tau);
          if (label == Label::TLF) pose.trunk_pitch += magnitude * kDeg * ramp;
          if (label == Label::TR) pose.trunk_yaw += yaw_sign * magnitude * kDeg * ramp;
          if (label == Label::SE) pose.shoulder_lift[affected] = magnitude * ramp;
          body_frames[k] = forward_kinematics(body, pose);
          body_frames[k].timestamp = static_cast<double>(k) / cfg.fps;
        }

        for (int view = 0; view < cfg.views; ++view) {
          const Camera& cam = cams[view];
          MotionSequence seq;
          seq.subject_id = id;
          seq.action = action;
          seq.label = label;
          seq.view_id = view;
          seq.repetition = rep;
          seq.fps = cfg.fps;
          seq.frames.resize(n_frames);
          for (std::size_t k = 0; k < n_frames; ++k) {
            SkeletonFrame& f = seq.frames[k];
            f.timestamp = body_frames[k].timestamp;
            for (std::size_t j = 0; j < kJointCount; ++j) {
              const Vector3d world = to_eigen(body_frames[k].joint(j)) + seat;
              Vector3d p = cam.world_to_camera * (world - cam.position);
              if (cfg.noise_sigma > 0.0) {
                for (int a = 0; a < 3; ++a) p[a] += cfg.noise_sigma * noise(rng);
              }
              f.set_joint(j, to_vec3(p));
            }
          }
          GenProvenance prov;
          prov.index = out.dataset.sequences.size();
          prov.subject_id = id;
          prov.action = action;
          prov.repetition = rep;
          prov.view_id = view;
          prov.label = label;
          prov.magnitude = magnitude;
          prov.affected_side = affected;
          prov.duration = duration;
          prov.body_scale = body_scale;
          out.provenance.push_back(prov);
          out.dataset.sequences.push_back(std::move(seq));
        }
      }
    }
  }
  return out;
}

CompensationSignature compensation_signature(const MotionSequence& seq) {
  using namespace joints;
  CompensationSignature sig;
  if (seq.frames.empty()) return sig;
  auto vec = [](const SkeletonFrame& f, int j) { return to_eigen(f.joint(static_cast<std::size_t>(j))); };
  auto angle_deg = [](const Vector3d& a, const Vector3d& b) {
    const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
    return std::acos(c) / kDeg;
  };
  const SkeletonFrame& f0 = seq.frames.front();
  const Vector3d trunk0 = vec(f0, kNeck) - vec(f0, kPelvis);
  const Vector3d clav0 = vec(f0, kRightBase + kClavicle) - vec(f0, kLeftBase + kClavicle);
  auto lift_of = [&](const SkeletonFrame& f, int base) {
    const Vector3d up = (vec(f, kSpineChest) - vec(f, kPelvis)).normalized();
    return (vec(f, base + kShoulder) - vec(f, base + kClavicle)).dot(up);
  };
  const double lift0[2] = {lift_of(f0, kLeftBase), lift_of(f0, kRightBase)};
  for (const auto& f : seq.frames) {
    sig.trunk_pitch_deg = std::max(sig.trunk_pitch_deg, angle_deg(vec(f, kNeck) - vec(f, kPelvis), trunk0));
    sig.trunk_yaw_deg = std::max(
        sig.trunk_yaw_deg,
        angle_deg(vec(f, kRightBase + kClavicle) - vec(f, kLeftBase + kClavicle), clav0));
    sig.shoulder_lift_m = std::max({sig.shoulder_lift_m, lift_of(f, kLeftBase) - lift0[0],
                                    lift_of(f, kRightBase) - lift0[1]});
  }
  return sig;
}

std::filesystem::path provenance_path_for(const std::filesystem::path& jsonl_path) {
  auto p = jsonl_path;
  p.replace_extension(".provenance.json");
  return p;
}

void save_generated(const GeneratedData& data, const GenConfig& cfg,
                    const std::filesystem::path& jsonl_path) {
  save_dataset(data.dataset, jsonl_path);
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& p : data.provenance) {
    seqs.push_back({{"index", p.index},
                    {"subject_id", p.subject_id},
                    {"action", action_name(p.action)},
                    {"repetition", p.repetition},
                    {"view_id", p.view_id},
                    {"label", label_name(p.label)},
                    {"magnitude", p.magnitude},
                    {"affected_side", p.affected_side == 0 ? "left" : "right"},
                    {"duration", p.duration},
                    {"body_scale", p.body_scale}});
  }
  const nlohmann::json doc = {{"config", cfg}, {"sequences", std::move(seqs)}};
  const auto prov = provenance_path_for(jsonl_path);
  std::ofstream out(prov);
  if (!out) throw DataError("cannot write provenance file " + prov.string());
  out << doc.dump(1) << '\n';
}

} // namespace compdetect
