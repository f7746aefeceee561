// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "compdetect/autodiff.hpp"
#include "compdetect/dataset.hpp"
#include "compdetect/skeleton.hpp"

namespace testutil {

using namespace compdetect;

inline MotionSequence random_sequence(std::mt19937_64& rng, std::size_t n_frames, double spread = 1.0,
                                      Label label = Label::NC) {
  std::normal_distribution<double> nd(0.0, spread);
  MotionSequence s;
  s.label = label;
  s.action = action_for(label).value_or(ActionKind::TouchMouth);
  s.subject_id = "S01";
  s.frames.resize(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) {
    s.frames[t].timestamp = static_cast<double>(t) / 30.0;
    for (auto& c : s.frames[t].coords) c = nd(rng);
  }
  return s;
}

inline ad::Tensor random_tensor(std::mt19937_64& rng, ad::Shape shape, double spread = 1.0) {
  std::normal_distribution<double> nd(0.0, spread);
  ad::Tensor t(std::move(shape));
  for (auto& v : t.values()) v = nd(rng);
  return t;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("compdetect_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace testutil
