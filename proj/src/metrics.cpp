// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "compdetect/errors.hpp"

namespace compdetect {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                    std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DataError("confusion: no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++cm.counts[label_code(y_true[i])][label_code(y_pred[i])];
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  const std::uint64_t total = cm.total();
  if (total == 0) throw DataError("compute_metrics: empty confusion matrix");
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (std::size_t k = 0; k < kClassCount; ++k) {
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (std::size_t j = 0; j < kClassCount; ++j) {
      predicted += cm.counts[j][k];
      actual += cm.counts[k][j];
    }
    const auto tp = static_cast<double>(cm.counts[k][k]);
    ClassMetrics& m = r.per_class[k];
    m.support = actual;
    const std::string name(label_name(static_cast<Label>(k)));
    if (predicted > 0) {
      m.precision = tp / static_cast<double>(predicted);
    } else if (actual > 0) {
      r.warnings.push_back("precision of " + name + " is 0/0 (never predicted); reported as 0");
    }
    if (actual > 0) m.recall = tp / static_cast<double>(actual);
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    const double w = static_cast<double>(actual) / static_cast<double>(total);
    r.precision += w * m.precision;
    r.recall += w * m.recall;
    r.f1 += w * m.f1;
  }
  return r;
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string render_text(std::span<const NamedReport> rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::ostringstream os;
  os << pad("Model", width) << "  " << pad("Accuracy", 9) << " " << pad("Precision", 9) << " "
     << pad("Recall", 9) << " " << "F1-score\n";
  for (const auto& r : rows) {
    os << pad(r.model, width) << "  " << pad(format_metric(r.report.accuracy), 9) << " "
       << pad(format_metric(r.report.precision), 9) << " " << pad(format_metric(r.report.recall), 9)
       << " " << format_metric(r.report.f1) << "\n";
  }
  return os.str();
}

std::string render_csv(std::span<const NamedReport> rows) {
  std::ostringstream os;
  os << "model,accuracy,precision,recall,f1\n";
  for (const auto& r : rows) {
    os << r.model << ',' << format_metric(r.report.accuracy) << ','
       << format_metric(r.report.precision) << ',' << format_metric(r.report.recall) << ','
       << format_metric(r.report.f1) << '\n';
  }
  return os.str();
}

namespace {

// Same rounding as the CSV so both encodings parse to identical doubles.
double rounded(double v) { return std::stod(format_metric(v)); }

} // namespace

nlohmann::json report_json(std::span<const NamedReport> rows) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t k = 0; k < kClassCount; ++k) {
      const auto& m = r.report.per_class[k];
      per_class[std::string(label_name(static_cast<Label>(k)))] = {
          {"precision", rounded(m.precision)},
          {"recall", rounded(m.recall)},
          {"f1", rounded(m.f1)},
          {"support", m.support}};
    }
    nlohmann::json cm = nlohmann::json::array();
    for (const auto& row : r.report.confusion.counts) cm.push_back(row);
    models.push_back({{"model", r.model},
                      {"accuracy", rounded(r.report.accuracy)},
                      {"precision", rounded(r.report.precision)},
                      {"recall", rounded(r.report.recall)},
                      {"f1", rounded(r.report.f1)},
                      {"per_class", std::move(per_class)},
                      {"confusion", std::move(cm)},
                      {"warnings", r.report.warnings}});
  }
  return {{"models", std::move(models)}};
}

std::string render_json(std::span<const NamedReport> rows) { return report_json(rows).dump(2) + "\n"; }

MetricsReport average_reports(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw DataError("average_reports: no reports");
  MetricsReport avg;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    avg.accuracy += r.accuracy / n;
    avg.precision += r.precision / n;
    avg.recall += r.recall / n;
    avg.f1 += r.f1 / n;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      avg.per_class[k].precision += r.per_class[k].precision / n;
      avg.per_class[k].recall += r.per_class[k].recall / n;
      avg.per_class[k].f1 += r.per_class[k].f1 / n;
      avg.per_class[k].support += r.per_class[k].support;
      for (std::size_t j = 0; j < kClassCount; ++j) {
        avg.confusion.counts[k][j] += r.confusion.counts[k][j];
      }
    }
    avg.warnings.insert(avg.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  return avg;
}

} // namespace compdetect
