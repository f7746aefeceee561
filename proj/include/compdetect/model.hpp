// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "compdetect/autodiff.hpp"
#include "compdetect/dataset.hpp"
#include "compdetect/preprocess.hpp"

namespace compdetect {

enum class Variant { GcnOnly, GcnLstm, GcnLstmAtt };

std::string_view variant_name(Variant v); // "GCN", "GCN-LSTM", "GCN-LSTM-ATT"
Variant parse_variant(std::string_view name);

struct ModelConfig {
  std::vector<std::size_t> gcn_channels{3, 32, 64};
  std::size_t lstm_hidden = 64;
  std::size_t attention_dim = 64;
  std::size_t n_classes = kClassCount;
  double dropout = 0.0; // applied to the pooled feature during training
  Variant variant = Variant::GcnLstmAtt;

  void validate() const;
  /// Width of the vector fed to the classifier.
  std::size_t feature_dim() const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;

  void validate() const;
};

/// D^-1/2 (A + I) D^-1/2 for the graph's undirected edges.
ad::Tensor normalize_adjacency(const SkeletonGraph& g);

struct GcnLayer {
  ad::Var weight; // [C_in, C_out]
  ad::Var bias;   // [C_out]
};

/// Fused LSTM weights; column blocks are the input, forget, output and candidate gates.
struct LstmParams {
  ad::Var w_input;  // [C, 4H]
  ad::Var w_hidden; // [H, 4H]
  ad::Var bias;     // [4H]
  std::size_t hidden = 0;
};

struct AttentionParams {
  ad::Var w; // [H, A]
  ad::Var b; // [A]
  ad::Var v; // [A, 1]
};

struct LinearParams {
  ad::Var w; // [F, K]
  ad::Var b; // [K]
};

/// x: [..., J, C_in]. Each layer: relu(adj * H * W + b), identical weights at every frame.
ad::Var gcn_forward(ad::Tape& tape, const ad::Var& x, const ad::Tensor& adj,
                    std::span<const GcnLayer> layers);
/// [B, T, J, C] -> [B, T, C], mean over joints.
ad::Var frame_embed(ad::Tape& tape, const ad::Var& h);
/// [B, T, C] -> all hidden states [B, T, H], starting from h0 = c0 = 0.
ad::Var lstm_forward(ad::Tape& tape, const ad::Var& e, const LstmParams& p);

struct AttentionOutput {
  ad::Var context; // [B, H]
  ad::Var alpha;   // [B, T]
};

/// Additive temporal attention: e_t = v' tanh(W h_t + b), alpha = softmax(e), context = sum alpha_t h_t.
AttentionOutput attention_pool(ad::Tape& tape, const ad::Var& h, const AttentionParams& p);

struct NamedParam {
  std::string name;
  ad::Var var;
};

struct ForwardResult {
  ad::Var logits;              // [B, K]
  std::optional<ad::Var> alpha; // [B, T] for the attention variant
};

class GcnLstmAttModel {
public:
  GcnLstmAttModel(ModelConfig cfg, const SkeletonGraph& graph, std::uint64_t seed);
  GcnLstmAttModel(ModelConfig cfg, ad::Tensor adjacency, std::uint64_t seed);

  // Copies are deep: the copy owns fresh parameter tensors.
  GcnLstmAttModel(const GcnLstmAttModel& other);
  GcnLstmAttModel& operator=(const GcnLstmAttModel& other);
  GcnLstmAttModel(GcnLstmAttModel&&) noexcept = default;
  GcnLstmAttModel& operator=(GcnLstmAttModel&&) noexcept = default;

  const ModelConfig& config() const { return cfg_; }
  const ad::Tensor& adjacency() const { return adj_; }

  /// All trainable tensors in declaration order (the serialization order).
  std::vector<NamedParam> parameters() const;

  /// x: [B, T, 20, 3]. `dropout_rng` enables dropout when the config asks for it.
  ForwardResult forward(ad::Tape& tape, const ad::Var& x, std::mt19937_64* dropout_rng = nullptr) const;

  /// Logits of a single preprocessed sequence. Throws DataError on a length mismatch
  /// once target_length is set.
  std::array<double, kClassCount> logits(const MotionSequence& seq) const;

  /// Length every input must have (0: not fixed yet).
  std::size_t target_length = 0;
  /// Pipeline that produced the training data; needed to preprocess raw inputs.
  std::optional<FittedPreprocess> preprocess;

private:
  void init(std::uint64_t seed);
  template <typename Fn>
  void visit_params(Fn&& fn);
  template <typename Fn>
  void visit_params(Fn&& fn) const;

  ModelConfig cfg_;
  ad::Tensor adj_;
  std::vector<GcnLayer> gcn_;
  std::optional<LstmParams> lstm_;
  std::optional<AttentionParams> att_;
  LinearParams head_;
};

/// Packs preprocessed sequences into [B, T, 20, 3]; all must share one length.
ad::Tensor batch_tensor(std::span<const MotionSequence* const> seqs);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0; // running accuracy of the minibatch forward passes
  double test_accuracy = 0.0;  // NaN when the split has no test side
};

struct TrainResult {
  GcnLstmAttModel model;
  std::vector<EpochRecord> history;
};

/// Minibatch Adam on mean softmax cross-entropy over the training side of the split.
/// Deterministic in (data, configs, seed).
/// `on_epoch` is called after every epoch (progress reporting).
TrainResult train(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const SkeletonGraph& graph = canonical_upper_limb_graph(),
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Argmax with ties toward the lowest class code.
Label argmax_label(std::span<const double> logits);

std::vector<Label> predict(const GcnLstmAttModel& model, std::span<const MotionSequence> seqs);

/// Adam with bias correction; weight decay is added to the gradient.
class Adam {
public:
  Adam(std::vector<ad::Var> params, const TrainConfig& cfg);
  void zero_grad();
  void step();

private:
  std::vector<ad::Var> params_;
  std::vector<std::vector<double>> m_, v_;
  TrainConfig cfg_;
  std::size_t t_ = 0;
};

} // namespace compdetect
