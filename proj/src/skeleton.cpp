// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "compdetect/errors.hpp"

namespace compdetect {

Label label_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kClassCount)) {
    throw DataError("label code out of range: " + std::to_string(code));
  }
  return static_cast<Label>(code);
}

std::string_view label_name(Label l) {
  switch (l) {
  case Label::NC: return "NC";
  case Label::TLF: return "TLF";
  case Label::TR: return "TR";
  case Label::SE: return "SE";
  }
  return "?";
}

Label parse_label(std::string_view name) {
  for (Label l : kAllLabels) {
    if (label_name(l) == name) return l;
  }
  throw DataError("unknown label '" + std::string(name) + "'");
}

std::string_view action_name(ActionKind a) {
  switch (a) {
  case ActionKind::TouchMouth: return "touch_mouth";
  case ActionKind::ExtendBackward: return "extend_backward";
  case ActionKind::ArmAbduction: return "arm_abduction";
  }
  return "?";
}

ActionKind parse_action(std::string_view name) {
  for (ActionKind a : kAllActions) {
    if (action_name(a) == name) return a;
  }
  throw DataError("unknown action '" + std::string(name) + "'");
}

Label compensation_for(ActionKind a) {
  switch (a) {
  case ActionKind::TouchMouth: return Label::TLF;
  case ActionKind::ExtendBackward: return Label::TR;
  case ActionKind::ArmAbduction: return Label::SE;
  }
  return Label::NC;
}

std::optional<ActionKind> action_for(Label l) {
  for (ActionKind a : kAllActions) {
    if (compensation_for(a) == l) return a;
  }
  return std::nullopt;
}

double mean_joint_distance(const SkeletonFrame& a, const SkeletonFrame& b) {
  double total = 0.0;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const double dx = a.coords[3 * j] - b.coords[3 * j];
    const double dy = a.coords[3 * j + 1] - b.coords[3 * j + 1];
    const double dz = a.coords[3 * j + 2] - b.coords[3 * j + 2];
    total += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return total / static_cast<double>(kJointCount);
}

std::string MotionSequence::describe() const {
  return "subject=" + subject_id + " action=" + std::string(action_name(action)) +
         " rep=" + std::to_string(repetition) + " view=" + std::to_string(view_id);
}

void MotionSequence::validate(std::size_t min_frames) const {
  if (frames.size() < min_frames) {
    throw DataError("sequence " + describe() + " has " + std::to_string(frames.size()) +
                    " frames, need at least " + std::to_string(min_frames));
  }
  if (view_id < 0 || view_id > 2) {
    throw DataError("sequence " + describe() + " has view_id outside 0..2");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (!std::isfinite(f.timestamp) || f.timestamp < 0.0) {
      throw DataError("sequence " + describe() + ": invalid timestamp at frame " +
                      std::to_string(i));
    }
    if (i > 0 && !(f.timestamp > frames[i - 1].timestamp)) {
      throw DataError("sequence " + describe() + ": timestamps not strictly increasing at frame " +
                      std::to_string(i));
    }
    for (double c : f.coords) {
      if (!std::isfinite(c)) {
        throw DataError("sequence " + describe() + ": non-finite coordinate at frame " +
                        std::to_string(i));
      }
    }
  }
}

std::size_t SkeletonGraph::degree(int node) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [node](const auto& e) {
    return e.first == node || e.second == node;
  }));
}

bool SkeletonGraph::is_connected() const {
  if (n_nodes == 0) return true;
  std::vector<std::vector<int>> adj(n_nodes);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n_nodes, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t visited = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++visited;
        frontier.push(v);
      }
    }
  }
  return visited == n_nodes;
}

void SkeletonGraph::validate() const {
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= static_cast<int>(n_nodes) || b >= static_cast<int>(n_nodes)) {
      throw DataError("graph edge endpoint out of range");
    }
    if (a == b) throw DataError("graph contains a self-loop at node " + std::to_string(a));
    if (!seen.insert(std::minmax(a, b)).second) {
      throw DataError("graph edge stored twice: " + std::to_string(a) + "-" + std::to_string(b));
    }
  }
  if (!joint_names.empty() && joint_names.size() != n_nodes) {
    throw DataError("graph joint_names size does not match n_nodes");
  }
}

SkeletonGraph canonical_upper_limb_graph() {
  using namespace joints;
  SkeletonGraph g;
  g.n_nodes = kJointCount;
  g.joint_names = {"PELVIS", "SPINE_NAVEL", "SPINE_CHEST", "NECK", "HEAD", "NOSE"};
  for (const char* side : {"LEFT", "RIGHT"}) {
    for (const char* part : {"CLAVICLE", "SHOULDER", "ELBOW", "WRIST", "HAND", "HANDTIP", "THUMB"}) {
      g.joint_names.push_back(std::string(part) + "_" + side);
    }
  }
  g.edges = {{kPelvis, kSpineNavel}, {kSpineNavel, kSpineChest}, {kSpineChest, kNeck},
             {kNeck, kHead}, {kHead, kNose}};
  for (int base : {kLeftBase, kRightBase}) {
    g.edges.emplace_back(kSpineChest, base + kClavicle);
    g.edges.emplace_back(base + kClavicle, base + kShoulder);
    g.edges.emplace_back(base + kShoulder, base + kElbow);
    g.edges.emplace_back(base + kElbow, base + kWrist);
    g.edges.emplace_back(base + kWrist, base + kHand);
    g.edges.emplace_back(base + kHand, base + kHandTip);
    g.edges.emplace_back(base + kWrist, base + kThumb);
  }
  return g;
}

} // namespace compdetect
