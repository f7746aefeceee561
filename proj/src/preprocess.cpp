// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "compdetect/config.hpp"
#include "compdetect/errors.hpp"

namespace compdetect {

void PreprocessConfig::validate() const {
  if (!(keyframe_threshold > 0.0)) throw ConfigError("keyframe_threshold must be > 0");
  if (!(similarity_epsilon > 0.0)) throw ConfigError("similarity_epsilon must be > 0");
  if (window_step < 1) throw ConfigError("window_step must be >= 1");
  if (window_size < window_step) throw ConfigError("window_size must be >= window_step");
  if (target_length && *target_length < 2) throw ConfigError("target_length must be >= 2");
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots, std::vector<double> values)
    : x_(std::move(knots)), y_(std::move(values)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw DataError("spline needs at least 2 matching knots/values");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw DataError("spline knots must be strictly increasing");
  }
  m_.assign(n, 0.0);
  if (n == 2) return;
  // Tridiagonal system for the interior second derivatives (Thomas algorithm).
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x_[i + 1] - x_[i]; // h_{i} couples row i to row i-1
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) {
    m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
  }
}

double NaturalCubicSpline::operator()(double x) const {
  const std::size_t n = x_.size();
  std::size_t i = 0;
  if (x >= x_[n - 1]) {
    i = n - 2;
  } else if (x > x_[0]) {
    i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  }
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
}

MotionSequence extract_keyframes(const MotionSequence& seq, double threshold) {
  MotionSequence out = seq;
  out.frames.clear();
  if (seq.frames.empty()) return out;
  out.frames.push_back(seq.frames.front());
  for (std::size_t i = 1; i < seq.frames.size(); ++i) {
    if (mean_joint_distance(seq.frames[i], out.frames.back()) > threshold) {
      out.frames.push_back(seq.frames[i]);
    }
  }
  return out;
}

MotionSequence dedup_sliding_window(const MotionSequence& seq, const PreprocessConfig& cfg) {
  const std::size_t window = cfg.window_size;
  const std::size_t step = cfg.window_step;
  std::vector<std::size_t> kept; // indices into seq.frames, the working sequence
  std::size_t next = 0;          // first input frame not yet pulled into the working sequence
  const std::size_t n = seq.frames.size();
  for (std::size_t start = 0;; start += step) {
    // Fill the window [start, start + window) of the working sequence, dropping duplicates.
    for (std::size_t pos = start; pos < start + window; ++pos) {
      if (pos < kept.size()) continue; // carried over from the previous window, already checked
      bool placed = false;
      while (!placed && next < n) {
        const auto& cand = seq.frames[next];
        bool duplicate = false;
        for (std::size_t q = start; q < pos; ++q) {
          if (mean_joint_distance(seq.frames[kept[q]], cand) < cfg.similarity_epsilon) {
            duplicate = true;
            break;
          }
        }
        if (!duplicate) {
          kept.push_back(next);
          placed = true;
        }
        ++next;
      }
      if (!placed) break;
    }
    if (next >= n) break; // later windows would only hold frames already checked together
  }
  MotionSequence out = seq;
  out.frames.clear();
  for (std::size_t i : kept) out.frames.push_back(seq.frames[i]);
  return out;
}

MotionSequence resample_cubic_spline(const MotionSequence& seq, std::size_t target_length) {
  if (seq.frames.size() < 2) throw DataError("sequence too short to resample");
  if (target_length < 2) throw DataError("target_length must be >= 2");
  const std::size_t n = seq.frames.size();
  const double t0 = seq.frames.front().timestamp;
  const double span = seq.frames.back().timestamp - t0;
  if (!(span > 0.0)) throw DataError("sequence timestamps do not span a positive interval");
  std::vector<double> knots(n);
  for (std::size_t i = 0; i < n; ++i) knots[i] = (seq.frames[i].timestamp - t0) / span;
  knots.front() = 0.0;
  knots.back() = 1.0;

  MotionSequence out = seq;
  out.frames.assign(target_length, SkeletonFrame{});
  const double denom = static_cast<double>(target_length - 1);
  for (std::size_t j = 0; j < target_length; ++j) {
    out.frames[j].timestamp = t0 + span * (static_cast<double>(j) / denom);
  }
  out.frames.back().timestamp = seq.frames.back().timestamp;
  std::vector<double> values(n);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    for (std::size_t i = 0; i < n; ++i) values[i] = seq.frames[i].coords[c];
    const NaturalCubicSpline spline(knots, values);
    for (std::size_t j = 0; j < target_length; ++j) {
      out.frames[j].coords[c] = spline(static_cast<double>(j) / denom);
    }
  }
  return out;
}

ChannelStats fit_channel_stats(std::span<const MotionSequence> train) {
  std::size_t count = 0;
  for (const auto& s : train) count += s.frames.size();
  if (train.empty() || count == 0) throw DataError("cannot fit channel statistics on an empty training set");
  ChannelStats st;
  for (const auto& s : train) {
    for (const auto& f : s.frames) {
      for (std::size_t c = 0; c < kChannelCount; ++c) st.mean[c] += f.coords[c];
    }
  }
  for (auto& m : st.mean) m /= static_cast<double>(count);
  for (const auto& s : train) {
    for (const auto& f : s.frames) {
      for (std::size_t c = 0; c < kChannelCount; ++c) {
        const double d = f.coords[c] - st.mean[c];
        st.std[c] += d * d;
      }
    }
  }
  for (auto& v : st.std) v = std::sqrt(v / static_cast<double>(count));
  return st;
}

MotionSequence apply_zscore(const MotionSequence& seq, const ChannelStats& stats) {
  MotionSequence out = seq;
  for (auto& f : out.frames) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      f.coords[c] = stats.degenerate(c) ? 0.0 : (f.coords[c] - stats.mean[c]) / stats.std[c];
    }
  }
  return out;
}

namespace {

MotionSequence clean(const MotionSequence& seq, const PreprocessConfig& cfg) {
  MotionSequence out =
      dedup_sliding_window(extract_keyframes(seq, cfg.keyframe_threshold), cfg);
  if (out.frames.size() < 2) {
    throw DataError("sequence " + seq.describe() + " collapsed to " +
                    std::to_string(out.frames.size()) + " frame(s) after keyframe/dedup");
  }
  return out;
}

} // namespace

MotionSequence transform_sequence(const MotionSequence& seq, const FittedPreprocess& fitted) {
  MotionSequence out =
      apply_zscore(resample_cubic_spline(clean(seq, fitted.config), fitted.target_length),
                   fitted.stats);
  out.preprocessed = true;
  return out;
}

PreprocessResult preprocess_dataset(const Dataset& ds, const PreprocessConfig& cfg) {
  cfg.validate();
  ds.validate_split();
  std::vector<MotionSequence> cleaned;
  cleaned.reserve(ds.size());
  for (const auto& s : ds.sequences) cleaned.push_back(clean(s, cfg));

  std::size_t target = 0;
  if (cfg.target_length) {
    target = *cfg.target_length;
  } else {
    for (std::size_t i : ds.split->train) target = std::max(target, cleaned[i].frames.size());
  }

  PreprocessResult res;
  res.fitted.config = cfg;
  res.fitted.target_length = target;
  res.data.split = ds.split;
  res.data.sequences.reserve(ds.size());
  for (const auto& s : cleaned) res.data.sequences.push_back(resample_cubic_spline(s, target));

  std::vector<MotionSequence> train;
  train.reserve(ds.split->train.size());
  for (std::size_t i : ds.split->train) train.push_back(res.data.sequences[i]);
  res.fitted.stats = fit_channel_stats(train);
  for (auto& s : res.data.sequences) {
    s = apply_zscore(s, res.fitted.stats);
    s.preprocessed = true;
  }
  return res;
}

Dataset preprocess_with(const Dataset& ds, const FittedPreprocess& fitted) {
  Dataset out;
  out.split = ds.split;
  out.sequences.reserve(ds.size());
  for (const auto& s : ds.sequences) out.sequences.push_back(transform_sequence(s, fitted));
  return out;
}

void save_fitted(const FittedPreprocess& fitted, const std::filesystem::path& path) {
  nlohmann::json j = {{"mean", fitted.stats.mean},
                      {"std", fitted.stats.std},
                      {"target_length", fitted.target_length},
                      {"config", fitted.config}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write stats file " + path.string());
  out << j.dump(2) << '\n';
}

FittedPreprocess load_fitted(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stats file " + path.string());
  FittedPreprocess f;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto sd = j.at("std").get<std::vector<double>>();
    if (mean.size() != kChannelCount || sd.size() != kChannelCount) {
      throw DataError("stats file " + path.string() + " must hold 60 means and 60 stds");
    }
    std::copy(mean.begin(), mean.end(), f.stats.mean.begin());
    std::copy(sd.begin(), sd.end(), f.stats.std.begin());
    f.target_length = j.at("target_length").get<std::size_t>();
    if (j.contains("config")) f.config = j.at("config").get<PreprocessConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("stats file " + path.string() + ": " + e.what());
  }
  return f;
}

} // namespace compdetect
