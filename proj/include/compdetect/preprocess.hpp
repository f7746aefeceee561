// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "compdetect/dataset.hpp"

namespace compdetect {

struct PreprocessConfig {
  double keyframe_threshold = 0.005; // meters, mean per-joint displacement
  std::size_t window_size = 5;
  std::size_t window_step = 2;
  double similarity_epsilon = 0.002; // meters
  std::optional<std::size_t> target_length; // empty: longest training sequence

  /// Throws ConfigError on non-positive thresholds or window_size < window_step.
  void validate() const;
};

inline constexpr double kDegenerateStd = 1e-12;

/// Per-channel (joint-axis) statistics fitted on the training subset only.
struct ChannelStats {
  std::array<double, kChannelCount> mean{};
  std::array<double, kChannelCount> std{};

  bool degenerate(std::size_t channel) const { return std[channel] < kDegenerateStd; }
};

/// Everything needed to push a raw sequence through the same pipeline at inference time.
struct FittedPreprocess {
  PreprocessConfig config;
  ChannelStats stats;
  std::size_t target_length = 0;
};

/// Natural cubic spline through (knots[i], values[i]); knots strictly increasing.
class NaturalCubicSpline {
public:
  NaturalCubicSpline(std::vector<double> knots, std::vector<double> values);
  double operator()(double x) const;

private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_; // second derivatives at the knots
};

/// Keeps the first frame, then every frame whose mean joint displacement from the last
/// retained frame exceeds `threshold`.
MotionSequence extract_keyframes(const MotionSequence& seq, double threshold);

/// Windows of `window_size` frames start every `window_step` positions of the working
/// sequence; inside a window a frame closer than `similarity_epsilon` (mean joint distance)
/// to an earlier surviving frame of the same window is removed, and later frames shift in.
/// The first frame always survives and the result is idempotent.
MotionSequence dedup_sliding_window(const MotionSequence& seq, const PreprocessConfig& cfg);

/// Fits a natural cubic spline per channel over time rescaled to [0, 1] and samples
/// `target_length` uniform points. Output timestamps span the original interval uniformly.
MotionSequence resample_cubic_spline(const MotionSequence& seq, std::size_t target_length);

/// Population mean/std per channel over all frames of all sequences, fixed summation order.
ChannelStats fit_channel_stats(std::span<const MotionSequence> train);

/// (x - mean) / std per channel; degenerate channels map to 0.
MotionSequence apply_zscore(const MotionSequence& seq, const ChannelStats& stats);

/// keyframes -> dedup -> resample -> zscore with an already fitted pipeline.
MotionSequence transform_sequence(const MotionSequence& seq, const FittedPreprocess& fitted);

struct PreprocessResult {
  Dataset data;
  FittedPreprocess fitted;
};

/// Runs the full chain on a split dataset. The target length (when automatic) and the
/// channel statistics come from the training subset alone.
PreprocessResult preprocess_dataset(const Dataset& ds, const PreprocessConfig& cfg);

/// Applies a stored pipeline to every sequence (split is carried over unchanged).
Dataset preprocess_with(const Dataset& ds, const FittedPreprocess& fitted);

/// Sidecar JSON: {"mean": [60], "std": [60], "target_length": n, "config": {...}}.
void save_fitted(const FittedPreprocess& fitted, const std::filesystem::path& path);
FittedPreprocess load_fitted(const std::filesystem::path& path);

} // namespace compdetect
