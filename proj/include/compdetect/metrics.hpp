// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "compdetect/skeleton.hpp"

namespace compdetect {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

  std::uint64_t total() const;
  std::uint64_t trace() const;
};

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

/// Aggregates are support-weighted means of the per-class values, so weighted recall equals
/// accuracy for every matrix.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::array<ClassMetrics, kClassCount> per_class{};
  ConfusionMatrix confusion;
  std::vector<std::string> warnings; // 0/0 cases that were reported as 0
};

MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct NamedReport {
  std::string model;
  MetricsReport report;
};

/// Fixed 4-decimal rendering shared by every output format.
std::string format_metric(double v);

std::string render_text(std::span<const NamedReport> rows);
/// Columns: model,accuracy,precision,recall,f1
std::string render_csv(std::span<const NamedReport> rows);
/// {"models": [{"model", "accuracy", ..., "per_class": {...}, "confusion": [[...]]}]}
nlohmann::json report_json(std::span<const NamedReport> rows);
std::string render_json(std::span<const NamedReport> rows);

/// Element-wise mean of the aggregate metrics (per-class values averaged too; confusion
/// counts summed).
MetricsReport average_reports(std::span<const MetricsReport> reports);

} // namespace compdetect
