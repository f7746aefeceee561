// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "compdetect/autodiff.hpp"
#include "compdetect/config.hpp"
#include "compdetect/metrics.hpp"

namespace compdetect {

enum class OutputFormat { Text, Csv, Json };

OutputFormat parse_format(std::string_view s);

/// Exit codes: 0 ok, 1 unexpected, 2 config, 3 data, 4 numeric.
int exit_code_for(const std::exception& e);

/// Loads `cfg.data` or generates a synthetic set with `seed`.
Dataset obtain_dataset(const RunConfig& cfg, std::uint64_t seed);

/// FNV-1a over the split indices and every coordinate of the dataset.
std::uint64_t dataset_hash(const Dataset& ds);

struct HistoryRow {
  std::string model;
  std::uint64_t seed = 0;
  EpochRecord record;
};

std::string render_history_csv(std::span<const HistoryRow> rows);
std::string render_report(std::span<const NamedReport> rows, OutputFormat fmt);

struct ExperimentResult {
  std::vector<NamedReport> rows; // means over the repeats
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<NamedReport>> per_seed;
  std::vector<std::uint64_t> data_hashes; // one per seed
  std::vector<HistoryRow> history;

  nlohmann::json to_json() const;
};

/// Table-2 experiment: split, preprocess, then SVM, KNN, RF and GCN-LSTM-ATT (the subset in
/// cfg.models, always in that order) evaluated on the test side, averaged over cfg.repeats seeds.
ExperimentResult run_compare(const RunConfig& cfg, std::ostream* log = nullptr);

/// Table-3 experiment: GCN, GCN-LSTM and GCN-LSTM-ATT trained on the same preprocessed data.
ExperimentResult run_ablate(const RunConfig& cfg, std::ostream* log = nullptr);

struct GradientCheckReport {
  ad::GradCheckResult result;
  std::string worst_param;
  bool passed = false;
};

inline constexpr double kGradientTolerance = 1e-4;

/// GCN-LSTM-ATT on a random tiny instance (T 5, channels [3, 4], hidden 6, attention 5).
/// `corrupt` perturbs one analytic gradient entry as a negative control.
GradientCheckReport run_gradient_check(std::uint64_t seed, bool corrupt = false);

/// Writes report.csv and report.json (and history.csv when `history` is non-empty).
void write_reports(const std::filesystem::path& out, const nlohmann::json& report_doc,
                   std::span<const NamedReport> rows, std::span<const HistoryRow> history);

struct TrainOutcome {
  GcnLstmAttModel model;
  std::vector<EpochRecord> history;
  MetricsReport test_report;
};

/// Split + preprocess + train, with the pipeline stored on the model.
TrainOutcome run_train(const RunConfig& cfg, std::ostream* log = nullptr);

/// Metrics of a stored model on the test side of the configured split. Raw data is pushed
/// through the model's stored pipeline; preprocessed data must already match its length.
MetricsReport run_evaluate(const RunConfig& cfg, const GcnLstmAttModel& model);

// CLI command bodies. Each writes its files under cfg.out, prints the report to `out` in the
// requested format and returns the process exit code.
int cmd_generate(const RunConfig& cfg, OutputFormat fmt, std::ostream& out);
int cmd_preprocess(const RunConfig& cfg, OutputFormat fmt, std::ostream& out);
int cmd_train(const RunConfig& cfg, OutputFormat fmt, std::ostream& out, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& model_path, OutputFormat fmt,
                 std::ostream& out);
int cmd_compare(const RunConfig& cfg, OutputFormat fmt, std::ostream& out, std::ostream& log);
int cmd_ablate(const RunConfig& cfg, OutputFormat fmt, std::ostream& out, std::ostream& log);
int cmd_gradient_check(const RunConfig& cfg, bool corrupt, OutputFormat fmt, std::ostream& out);

} // namespace compdetect
