// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "compdetect/baselines.hpp"
#include "compdetect/config.hpp"
#include "compdetect/errors.hpp"
#include "compdetect/harness.hpp"
#include "compdetect/metrics.hpp"
#include "compdetect/model.hpp"
#include "compdetect/preprocess.hpp"
#include "compdetect/synthgen.hpp"

namespace py = pybind11;
using namespace compdetect;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const ad::Tensor& t) {
  const std::size_t cols = t.dim(t.rank() - 1);
  Rows out;
  for (std::size_t i = 0; i < t.size(); i += cols) out.emplace_back(t.values().begin() + i, t.values().begin() + i + cols);
  return out;
}

MotionSequence sequence_from(const Rows& frames, const std::vector<double>& times) {
  if (frames.size() != times.size()) throw DataError("frames and timestamps differ in length");
  MotionSequence s;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].size() != kChannelCount) throw DataError("each frame needs 60 values");
    SkeletonFrame f;
    f.timestamp = times[t];
    std::copy(frames[t].begin(), frames[t].end(), f.coords.begin());
    s.frames.push_back(f);
  }
  return s;
}

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  py::list per_class;
  for (const auto& c : r.per_class) {
    py::dict e;
    e["precision"] = c.precision;
    e["recall"] = c.recall;
    e["f1"] = c.f1;
    e["support"] = c.support;
    per_class.append(e);
  }
  d["per_class"] = per_class;
  d["warnings"] = r.warnings;
  return d;
}

std::vector<Label> labels_from(const std::vector<int>& codes) {
  std::vector<Label> out;
  for (int c : codes) out.push_back(label_from_code(c));
  return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of compdetect: preprocessing, models, baselines and metrics.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  std::vector<std::string> names;
  for (int k = 0; k < static_cast<int>(kClassCount); ++k) names.emplace_back(label_name(label_from_code(k)));
  m.attr("CLASS_NAMES") = names;

  m.def("canonical_graph", [] {
    const auto g = canonical_upper_limb_graph();
    return py::make_tuple(g.joint_names, g.edges);
  }, "Joint names and undirected edges of the 20-joint upper-limb tree.");

  m.def("normalize_adjacency", [](std::size_t n, const std::vector<std::pair<int, int>>& edges) {
    SkeletonGraph g;
    g.n_nodes = n;
    g.edges = edges;
    g.joint_names.assign(n, "");
    return to_rows(normalize_adjacency(g));
  }, py::arg("n_nodes"), py::arg("edges"), "D^-1/2 (A + I) D^-1/2 as a list of rows.");

  m.def("spline_eval", [](std::vector<double> knots, std::vector<double> values, const std::vector<double>& xs) {
    const NaturalCubicSpline s(std::move(knots), std::move(values));
    std::vector<double> out;
    for (double x : xs) out.push_back(s(x));
    return out;
  }, py::arg("knots"), py::arg("values"), py::arg("xs"), "Natural cubic spline through the knots.");

  m.def("resample", [](const Rows& frames, const std::vector<double>& times, std::size_t target) {
    const auto out = resample_cubic_spline(sequence_from(frames, times), target);
    Rows rows;
    for (const auto& f : out.frames) rows.emplace_back(f.coords.begin(), f.coords.end());
    return rows;
  }, py::arg("frames"), py::arg("timestamps"), py::arg("target_length"),
        "Resamples [T][60] frames to target_length frames.");

  m.def("fit_channel_stats", [](const Rows& frames) {
    std::vector<double> times(frames.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i);
    const std::vector<MotionSequence> seqs{sequence_from(frames, times)};
    const auto st = fit_channel_stats(seqs);
    return py::make_tuple(st.mean, st.std);
  }, py::arg("frames"), "Per-channel population mean and std of [T][60] frames.");

  m.def("compute_metrics", [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    return metrics_dict(compute_metrics(confusion(labels_from(y_true), labels_from(y_pred))));
  }, py::arg("y_true"), py::arg("y_pred"), "Weighted metrics over class codes 0..3.");

  m.def("cross_entropy", [](const Rows& logits, const std::vector<int>& targets) {
    ad::Tensor t({logits.size(), logits.empty() ? 0 : logits.front().size()});
    for (std::size_t i = 0; i < logits.size(); ++i) {
      std::copy(logits[i].begin(), logits[i].end(), t.values().begin() + static_cast<std::ptrdiff_t>(i * t.dim(1)));
    }
    ad::Tape tape;
    return ad::cross_entropy(tape, ad::constant(std::move(t)), targets).value().item();
  }, py::arg("logits"), py::arg("targets"));

  m.def("knn_classify", [](const Rows& train, const std::vector<int>& labels, const std::vector<double>& query,
                           std::size_t k) {
    FeatureMatrix fm;
    for (std::size_t i = 0; i < train.size(); ++i) fm.push(train[i], label_from_code(labels.at(i)));
    return label_code(knn_classify(fm, query, k));
  }, py::arg("train"), py::arg("labels"), py::arg("query"), py::arg("k"));

  m.def("generate", [](const std::string& config_json) {
    GenConfig cfg = nlohmann::json::parse(config_json).get<GenConfig>();
    cfg.validate();
    std::vector<std::string> lines;
    for (const auto& s : generate(cfg).dataset.sequences) lines.push_back(sequence_to_jsonl(s));
    return lines;
  }, py::arg("config_json") = "{}", "Synthetic dataset as JSONL lines.");

  m.def("gradient_check", [](std::uint64_t seed, bool corrupt) {
    const auto rep = run_gradient_check(seed, corrupt);
    py::dict d;
    d["max_rel_error"] = rep.result.max_rel_error;
    d["entries_checked"] = rep.result.entries_checked;
    d["worst_param"] = rep.worst_param;
    d["passed"] = rep.passed;
    return d;
  }, py::arg("seed") = 0, py::arg("corrupt") = false);

  m.def("compare", [](const std::string& config_json) {
    py::gil_scoped_release release;
    return run_compare(parse_config(config_json)).to_json().dump();
  }, py::arg("config_json") = "{}");

  m.def("ablate", [](const std::string& config_json) {
    py::gil_scoped_release release;
    return run_ablate(parse_config(config_json)).to_json().dump();
  }, py::arg("config_json") = "{}");

  m.attr("__version__") = "0.1.0";
}
