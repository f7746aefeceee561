// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "compdetect/errors.hpp"

namespace compdetect {

void BaselineConfig::validate() const {
  if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
  if (!(svm.c > 0.0)) throw ConfigError("svm.C must be > 0");
  if (svm.epochs < 1) throw ConfigError("svm.epochs must be >= 1");
  if (rf.n_trees < 1) throw ConfigError("rf.n_trees must be >= 1");
  if (rf.max_depth < 1) throw ConfigError("rf.max_depth must be >= 1");
  if (rf.min_leaf < 1) throw ConfigError("rf.min_leaf must be >= 1");
  (void)features_per_split(rf, 1);
}

void FeatureMatrix::push(std::span<const double> x, Label y) {
  if (labels.empty() && values.empty()) cols = x.size();
  if (x.size() != cols) {
    throw DataError("feature length " + std::to_string(x.size()) + " differs from " + std::to_string(cols));
  }
  values.insert(values.end(), x.begin(), x.end());
  labels.push_back(y);
}

std::vector<double> flatten(const MotionSequence& seq) {
  std::vector<double> out;
  out.reserve(seq.frames.size() * kChannelCount);
  for (const auto& f : seq.frames) out.insert(out.end(), f.coords.begin(), f.coords.end());
  return out;
}

std::vector<SkeletonFrame> unflatten(std::span<const double> values) {
  if (values.size() % kChannelCount != 0) {
    throw DataError("flattened length " + std::to_string(values.size()) + " is not a multiple of 60");
  }
  std::vector<SkeletonFrame> frames(values.size() / kChannelCount);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].timestamp = static_cast<double>(t);
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(t * kChannelCount), kChannelCount,
                frames[t].coords.begin());
  }
  return frames;
}

FeatureMatrix to_features(std::span<const MotionSequence> seqs) {
  FeatureMatrix m;
  for (const auto& s : seqs) m.push(flatten(s), s.label);
  return m;
}

namespace {

Label vote(const std::array<std::size_t, kClassCount>& counts) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kClassCount; ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return label_from_code(static_cast<int>(best));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

} // namespace

Label knn_classify(const FeatureMatrix& train, std::span<const double> query, std::size_t k) {
  if (train.rows() == 0) throw DataError("knn: empty training set");
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  if (query.size() != train.cols) throw DataError("knn: query length does not match training features");
  if (k > train.rows()) {
    throw ConfigError("knn: k = " + std::to_string(k) + " exceeds the " + std::to_string(train.rows()) +
                      " training samples");
  }
  std::vector<std::pair<double, std::size_t>> dist(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) dist[i] = {squared_distance(train.row(i), query), i};
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::array<std::size_t, kClassCount> counts{};
  for (std::size_t i = 0; i < k; ++i) ++counts[label_code(train.labels[dist[i].second])];
  return vote(counts);
}

std::array<double, kClassCount> LinearSvm::decision(std::span<const double> x) const {
  if (x.size() != mean.size()) throw DataError("svm: feature length does not match the model");
  std::array<double, kClassCount> out;
  out.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < kClassCount; ++k) {
    if (!trained[k]) continue;
    double s = b[k];
    for (std::size_t i = 0; i < x.size(); ++i) s += w[k][i] * (x[i] - mean[i]) * scale[i];
    out[k] = s;
  }
  return out;
}

Label LinearSvm::predict(std::span<const double> x) const {
  const auto d = decision(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < kClassCount; ++k) {
    if (d[k] > d[best]) best = k;
  }
  return label_from_code(static_cast<int>(best));
}

LinearSvm svm_train(const FeatureMatrix& train, const SvmConfig& cfg) {
  const std::size_t n = train.rows(), d = train.cols;
  if (n == 0) throw DataError("svm: empty training set");
  std::array<std::size_t, kClassCount> present{};
  for (auto y : train.labels) ++present[label_code(y)];
  if (std::count_if(present.begin(), present.end(), [](auto c) { return c > 0; }) < 2) {
    throw DataError("svm: training set holds a single class");
  }

  LinearSvm m;
  m.mean.assign(d, 0.0);
  m.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += r[j];
  }
  for (auto& v : m.mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) m.scale[j] += (r[j] - m.mean[j]) * (r[j] - m.mean[j]);
  }
  for (auto& v : m.scale) {
    const double sd = std::sqrt(v / static_cast<double>(n));
    v = sd < 1e-12 ? 0.0 : 1.0 / sd;
  }
  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) z[i * d + j] = (r[j] - m.mean[j]) * m.scale[j];
  }

  const double lambda = 1.0 / (cfg.c * static_cast<double>(n));
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < kClassCount; ++k) {
    m.w[k].assign(d, 0.0);
    if (present[k] == 0) continue;
    m.trained[k] = true;
    auto rng = derived_rng(cfg.seed, k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto& w = m.w[k];
    double bias = 0.0;
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double y = label_code(train.labels[i]) == static_cast<int>(k) ? 1.0 : -1.0;
        const double* zi = z.data() + i * d;
        double s = bias;
        for (std::size_t j = 0; j < d; ++j) s += w[j] * zi[j];
        const double shrink = 1.0 - eta * lambda;
        for (auto& wj : w) wj *= shrink;
        bias *= shrink;
        if (y * s < 1.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * zi[j];
          bias += eta * y;
        }
      }
    }
    m.b[k] = bias;
  }
  return m;
}

double gini(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  double s = 1.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    s -= p * p;
  }
  return s;
}

std::size_t features_per_split(const RfConfig& cfg, std::size_t p) {
  const auto& rule = cfg.features_per_split;
  if (rule == "sqrt") return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p)))));
  if (rule == "all") return p;
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(rule, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != rule.size() || v < 1) {
    throw ConfigError("rf.features_per_split must be \"sqrt\", \"all\" or a positive integer, got '" + rule + "'");
  }
  return std::min(p, static_cast<std::size_t>(v));
}

Label DecisionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].label;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

Label RandomForest::predict(std::span<const double> x) const {
  if (x.size() != n_features) throw DataError("rf: feature length does not match the model");
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& t : trees) ++counts[label_code(t.predict(x))];
  return vote(counts);
}

namespace {

struct TreeBuilder {
  const FeatureMatrix& data;
  const RfConfig& cfg;
  std::size_t mtry;
  std::mt19937_64 rng;
  DecisionTree tree;
  std::vector<std::size_t> feature_pool;
  std::vector<std::pair<double, std::size_t>> column;

  int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::array<std::size_t, kClassCount> counts{};
    for (std::size_t i = begin; i < end; ++i) ++counts[label_code(data.labels[idx[i]])];
    tree.nodes[static_cast<std::size_t>(id)].label = vote(counts);
    const std::size_t n = end - begin;
    const bool pure = std::count(counts.begin(), counts.end(), std::size_t{0}) == kClassCount - 1;
    if (pure || depth >= cfg.max_depth || n < 2 * cfg.min_leaf) return id;

    // Partial Fisher-Yates draw of the candidate features.
    for (std::size_t i = 0; i < mtry; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, feature_pool.size() - 1);
      std::swap(feature_pool[i], feature_pool[pick(rng)]);
    }
    double best_impurity = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t c = 0; c < mtry; ++c) {
      const std::size_t f = feature_pool[c];
      column.clear();
      for (std::size_t i = begin; i < end; ++i) column.emplace_back(data.row(idx[i])[f], idx[i]);
      std::sort(column.begin(), column.end());
      std::array<std::size_t, kClassCount> left{};
      std::array<std::size_t, kClassCount> right = counts;
      for (std::size_t i = 1; i < n; ++i) {
        const int y = label_code(data.labels[column[i - 1].second]);
        ++left[y];
        --right[y];
        if (column[i - 1].first == column[i].first) continue;
        if (i < cfg.min_leaf || n - i < cfg.min_leaf) continue;
        const double imp = (static_cast<double>(i) * gini(left) + static_cast<double>(n - i) * gini(right)) /
                           static_cast<double>(n);
        if (imp < best_impurity) {
          best_impurity = imp;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (column[i - 1].first + column[i].first);
        }
      }
    }
    if (best_feature < 0) return id;

    const auto mid = std::stable_partition(
        idx.begin() + static_cast<std::ptrdiff_t>(begin), idx.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t s) { return data.row(s)[static_cast<std::size_t>(best_feature)] <= best_threshold; });
    const std::size_t split = static_cast<std::size_t>(mid - idx.begin());
    const int l = build(idx, begin, split, depth + 1);
    const int r = build(idx, split, end, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

} // namespace

RandomForest rf_train(const FeatureMatrix& train, const RfConfig& cfg) {
  if (train.rows() == 0) throw DataError("rf: empty training set");
  const std::size_t n = train.rows();
  RandomForest forest;
  forest.n_features = train.cols;
  const std::size_t mtry = features_per_split(cfg, train.cols);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    TreeBuilder b{train, cfg, mtry, derived_rng(cfg.seed, t), {}, {}, {}};
    b.feature_pool.resize(train.cols);
    std::iota(b.feature_pool.begin(), b.feature_pool.end(), std::size_t{0});
    std::vector<std::size_t> idx(n);
    if (cfg.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& i : idx) i = pick(b.rng);
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    b.build(idx, 0, n, 0);
    forest.trees.push_back(std::move(b.tree));
  }
  return forest;
}

std::vector<Label> predict_all(const KnnModel& m, const FeatureMatrix& x) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(knn_classify(m.train, x.row(i), m.k));
  return out;
}

std::vector<Label> predict_all(const LinearSvm& m, const FeatureMatrix& x) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(m.predict(x.row(i)));
  return out;
}

std::vector<Label> predict_all(const RandomForest& m, const FeatureMatrix& x) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(m.predict(x.row(i)));
  return out;
}

void to_json(nlohmann::json& j, const LinearSvm& m) {
  j = {{"kind", "linear_svm"}, {"mean", m.mean}, {"scale", m.scale},
       {"w", m.w},             {"b", m.b},       {"trained", m.trained}};
}

void from_json(const nlohmann::json& j, LinearSvm& m) {
  m.mean = j.at("mean").get<std::vector<double>>();
  m.scale = j.at("scale").get<std::vector<double>>();
  m.w = j.at("w").get<std::array<std::vector<double>, kClassCount>>();
  m.b = j.at("b").get<std::array<double, kClassCount>>();
  m.trained = j.at("trained").get<std::array<bool, kClassCount>>();
  for (const auto& w : m.w) {
    if (w.size() != m.mean.size()) throw DataError("svm json: weight length mismatch");
  }
}

void to_json(nlohmann::json& j, const RandomForest& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, label_code(n.label)});
    trees.push_back(std::move(nodes));
  }
  j = {{"kind", "random_forest"}, {"n_features", m.n_features}, {"trees", std::move(trees)}};
}

void from_json(const nlohmann::json& j, RandomForest& m) {
  m.n_features = j.at("n_features").get<std::size_t>();
  m.trees.clear();
  for (const auto& t : j.at("trees")) {
    DecisionTree tree;
    for (const auto& n : t) {
      TreeNode node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<double>();
      node.left = n.at(2).get<int>();
      node.right = n.at(3).get<int>();
      node.label = label_from_code(n.at(4).get<int>());
      tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) throw DataError("rf json: empty tree");
    m.trees.push_back(std::move(tree));
  }
}

void to_json(nlohmann::json& j, const KnnModel& m) {
  std::vector<int> labels;
  for (auto l : m.train.labels) labels.push_back(label_code(l));
  j = {{"kind", "knn"}, {"k", m.k}, {"cols", m.train.cols}, {"values", m.train.values}, {"labels", labels}};
}

void from_json(const nlohmann::json& j, KnnModel& m) {
  m.k = j.at("k").get<std::size_t>();
  m.train = {};
  m.train.cols = j.at("cols").get<std::size_t>();
  m.train.values = j.at("values").get<std::vector<double>>();
  for (int c : j.at("labels").get<std::vector<int>>()) m.train.labels.push_back(label_from_code(c));
  if (m.train.values.size() != m.train.cols * m.train.labels.size()) throw DataError("knn json: size mismatch");
}

} // namespace compdetect
