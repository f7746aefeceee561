// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "compdetect/baselines.hpp"
#include "compdetect/dataset.hpp"
#include "compdetect/model.hpp"
#include "compdetect/preprocess.hpp"
#include "compdetect/synthgen.hpp"

namespace compdetect {

/// Everything one CLI invocation needs. Every field has a default, so `{}` (or an empty
/// file) is a complete configuration.
///
/// File layout (JSON):
///   {"seed": 0, "out": "out", "split_fraction": 0.8, "split_by": "sequence",
///    "data": "path.jsonl", "repeats": 1, "models": ["SVM", "KNN", "RF", "GCN-LSTM-ATT"],
///    "generate": {...}, "preprocess": {...}, "model": {...}, "train": {...},
///    "baselines": {"knn_k": 5, "svm": {...}, "rf": {...}}}
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  double split_fraction = 0.8;
  SplitMode split_by = SplitMode::Sequence;
  std::optional<std::filesystem::path> data; // empty: generate on the fly
  std::size_t repeats = 1;                   // seeds seed, seed+1, ... averaged by compare/ablate
  std::vector<std::string> models{"SVM", "KNN", "RF", "GCN-LSTM-ATT"};

  GenConfig generate;
  PreprocessConfig preprocess;
  ModelConfig model;
  TrainConfig train;
  BaselineConfig baselines;

  void validate() const;
};

/// Reads a config file; whitespace-only content yields the defaults. Unknown keys are errors.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);
void to_json(nlohmann::json& j, const PreprocessConfig& c);
void from_json(const nlohmann::json& j, PreprocessConfig& c);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const SvmConfig& c);
void from_json(const nlohmann::json& j, SvmConfig& c);
void to_json(nlohmann::json& j, const RfConfig& c);
void from_json(const nlohmann::json& j, RfConfig& c);
void to_json(nlohmann::json& j, const BaselineConfig& c);
void from_json(const nlohmann::json& j, BaselineConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

} // namespace compdetect
