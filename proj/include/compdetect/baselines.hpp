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

struct SvmConfig {
  double c = 1.0;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
};

struct RfConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_leaf = 2;
  std::string features_per_split = "sqrt"; // "sqrt", "all" or a positive integer
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct BaselineConfig {
  std::size_t knn_k = 5;
  SvmConfig svm;
  RfConfig rf;

  void validate() const;
};

/// Row-major sample matrix with one label per row.
struct FeatureMatrix {
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<Label> labels;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  void push(std::span<const double> x, Label y);
};

/// Frame-major concatenation of every joint coordinate, length T * 60.
std::vector<double> flatten(const MotionSequence& seq);
/// Inverse of flatten; timestamps are set to the frame index.
std::vector<SkeletonFrame> unflatten(std::span<const double> values);
/// Flattens every sequence; all must share one length.
FeatureMatrix to_features(std::span<const MotionSequence> seqs);

/// Majority vote of the k nearest training rows (Euclidean). Distance ties keep the earlier
/// training index, vote ties go to the lowest class code.
Label knn_classify(const FeatureMatrix& train, std::span<const double> query, std::size_t k);

struct KnnModel {
  std::size_t k = 5;
  FeatureMatrix train;
};

/// One-vs-rest linear SVM on internally standardized features.
struct LinearSvm {
  std::vector<double> mean;
  std::vector<double> scale; // 1 / std, 0 for constant features
  std::array<std::vector<double>, kClassCount> w;
  std::array<double, kClassCount> b{};
  std::array<bool, kClassCount> trained{};

  std::array<double, kClassCount> decision(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;
};

/// Stochastic subgradient descent on the L2-regularized hinge loss, step 1 / (lambda t),
/// lambda = 1 / (C n). The bias is an extra constant feature and is regularized with w.
LinearSvm svm_train(const FeatureMatrix& train, const SvmConfig& cfg);

struct TreeNode {
  int feature = -1; // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  // x[feature] <= threshold
  int right = -1;
  Label label = Label::NC; // majority of the node's samples
};

struct DecisionTree {
  std::vector<TreeNode> nodes; // nodes[0] is the root

  Label predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct RandomForest {
  std::size_t n_features = 0;
  std::vector<DecisionTree> trees;

  Label predict(std::span<const double> x) const;
};

/// Gini impurity 1 - sum p_k^2 of a class histogram.
double gini(std::span<const std::size_t> counts);
/// Number of candidate features per split for p features under the config rule.
std::size_t features_per_split(const RfConfig& cfg, std::size_t p);

RandomForest rf_train(const FeatureMatrix& train, const RfConfig& cfg);

std::vector<Label> predict_all(const KnnModel& m, const FeatureMatrix& x);
std::vector<Label> predict_all(const LinearSvm& m, const FeatureMatrix& x);
std::vector<Label> predict_all(const RandomForest& m, const FeatureMatrix& x);

void to_json(nlohmann::json& j, const LinearSvm& m);
void from_json(const nlohmann::json& j, LinearSvm& m);
void to_json(nlohmann::json& j, const RandomForest& m);
void from_json(const nlohmann::json& j, RandomForest& m);
void to_json(nlohmann::json& j, const KnnModel& m);
void from_json(const nlohmann::json& j, KnnModel& m);

} // namespace compdetect
