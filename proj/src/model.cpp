// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "compdetect/errors.hpp"

namespace compdetect {

using ad::Tape;
using ad::Tensor;
using ad::Var;

std::string_view variant_name(Variant v) {
  switch (v) {
  case Variant::GcnOnly: return "GCN";
  case Variant::GcnLstm: return "GCN-LSTM";
  case Variant::GcnLstmAtt: return "GCN-LSTM-ATT";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string key;
  for (char ch : name) key.push_back(ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (key == "GCN" || key == "GCN_ONLY") return Variant::GcnOnly;
  if (key == "GCN_LSTM") return Variant::GcnLstm;
  if (key == "GCN_LSTM_ATT") return Variant::GcnLstmAtt;
  throw ConfigError("unknown model variant '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (gcn_channels.size() < 2) throw ConfigError("gcn_channels needs at least an input and an output width");
  if (gcn_channels.front() != 3) throw ConfigError("gcn_channels[0] must be 3 (xyz)");
  for (auto c : gcn_channels) {
    if (c < 1) throw ConfigError("gcn_channels entries must be >= 1");
  }
  if (lstm_hidden < 1 || attention_dim < 1) throw ConfigError("lstm_hidden and attention_dim must be >= 1");
  if (n_classes != kClassCount) throw ConfigError("n_classes must be 4");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::size_t ModelConfig::feature_dim() const {
  return variant == Variant::GcnOnly ? gcn_channels.back() : lstm_hidden;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

Tensor normalize_adjacency(const SkeletonGraph& g) {
  g.validate();
  const std::size_t n = g.n_nodes;
  Tensor a({n, n});
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (const auto& [u, v] : g.edges) {
    a[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = 1.0;
    a[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = 1.0;
  }
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i * n + j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] /= std::sqrt(deg[i] * deg[j]);
  }
  return a;
}

Var gcn_forward(Tape& tape, const Var& x, const Tensor& adj, std::span<const GcnLayer> layers) {
  Var h = x;
  for (const auto& layer : layers) {
    h = ad::relu(tape, ad::linear(tape, ad::left_matmul(tape, adj, h), layer.weight, layer.bias));
  }
  return h;
}

Var frame_embed(Tape& tape, const Var& h) { return ad::mean(tape, h, -2); }

Var lstm_forward(Tape& tape, const Var& e, const LstmParams& p) {
  const auto& s = e.shape();
  if (s.size() != 3) throw NumericError("lstm_forward expects [B, T, C], got " + ad::shape_str(s));
  const std::size_t batch = s[0], steps = s[1], hid = p.hidden;
  const Var projected = ad::linear(tape, e, p.w_input, p.bias);
  Var h, c;
  std::vector<Var> states;
  states.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Var gates = ad::reshape(tape, ad::slice(tape, projected, 1, t, t + 1), {batch, 4 * hid});
    if (t > 0) gates = ad::add(tape, gates, ad::matmul(tape, h, p.w_hidden));
    const Var sig = ad::sigmoid(tape, ad::slice(tape, gates, 1, 0, 3 * hid));
    const Var in_gate = ad::slice(tape, sig, 1, 0, hid);
    const Var out_gate = ad::slice(tape, sig, 1, 2 * hid, 3 * hid);
    const Var cand = ad::tanh(tape, ad::slice(tape, gates, 1, 3 * hid, 4 * hid));
    if (t == 0) {
      c = ad::mul(tape, in_gate, cand);
    } else {
      const Var forget = ad::slice(tape, sig, 1, hid, 2 * hid);
      c = ad::add(tape, ad::mul(tape, forget, c), ad::mul(tape, in_gate, cand));
    }
    h = ad::mul(tape, out_gate, ad::tanh(tape, c));
    states.push_back(ad::reshape(tape, h, {batch, 1, hid}));
  }
  return ad::concat(tape, states, 1);
}

AttentionOutput attention_pool(Tape& tape, const Var& h, const AttentionParams& p) {
  const auto& s = h.shape();
  if (s.size() != 3) throw NumericError("attention_pool expects [B, T, H], got " + ad::shape_str(s));
  const std::size_t batch = s[0], steps = s[1], hid = s[2];
  const Var proj = ad::tanh(tape, ad::linear(tape, h, p.w, p.b));
  const Var scores = ad::reshape(tape, ad::matmul(tape, proj, p.v), {batch, steps});
  AttentionOutput out;
  out.alpha = ad::softmax(tape, scores);
  out.context = ad::reshape(
      tape, ad::bmm(tape, ad::reshape(tape, out.alpha, {batch, 1, steps}), h), {batch, hid});
  return out;
}

template <typename Fn>
void GcnLstmAttModel::visit_params(Fn&& fn) {
  for (std::size_t l = 0; l < gcn_.size(); ++l) {
    fn("gcn." + std::to_string(l) + ".weight", gcn_[l].weight);
    fn("gcn." + std::to_string(l) + ".bias", gcn_[l].bias);
  }
  if (lstm_) {
    fn(std::string("lstm.w_input"), lstm_->w_input);
    fn(std::string("lstm.w_hidden"), lstm_->w_hidden);
    fn(std::string("lstm.bias"), lstm_->bias);
  }
  if (att_) {
    fn(std::string("attention.w"), att_->w);
    fn(std::string("attention.b"), att_->b);
    fn(std::string("attention.v"), att_->v);
  }
  fn(std::string("classifier.w"), head_.w);
  fn(std::string("classifier.b"), head_.b);
}

template <typename Fn>
void GcnLstmAttModel::visit_params(Fn&& fn) const {
  const_cast<GcnLstmAttModel*>(this)->visit_params(
      [&](const std::string& name, Var& v) { fn(name, static_cast<const Var&>(v)); });
}

GcnLstmAttModel::GcnLstmAttModel(ModelConfig cfg, const SkeletonGraph& graph, std::uint64_t seed)
    : GcnLstmAttModel(std::move(cfg), normalize_adjacency(graph), seed) {}

GcnLstmAttModel::GcnLstmAttModel(ModelConfig cfg, Tensor adjacency, std::uint64_t seed)
    : cfg_(std::move(cfg)), adj_(std::move(adjacency)) {
  cfg_.validate();
  if (adj_.rank() != 2 || adj_.dim(0) != kJointCount || adj_.dim(1) != kJointCount) {
    throw ConfigError("adjacency must be 20 x 20, got " + ad::shape_str(adj_.shape()));
  }
  init(seed);
}

GcnLstmAttModel::GcnLstmAttModel(const GcnLstmAttModel& other)
    : target_length(other.target_length), preprocess(other.preprocess), cfg_(other.cfg_),
      adj_(other.adj_), gcn_(other.gcn_), lstm_(other.lstm_), att_(other.att_), head_(other.head_) {
  visit_params([](const std::string&, Var& v) { v = ad::parameter(v.value()); });
}

GcnLstmAttModel& GcnLstmAttModel::operator=(const GcnLstmAttModel& other) {
  if (this != &other) *this = GcnLstmAttModel(other);
  return *this;
}

void GcnLstmAttModel::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto weight = [&rng](std::size_t rows, std::size_t cols) {
    const double bound = std::sqrt(1.0 / static_cast<double>(rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t({rows, cols});
    for (auto& x : t.values()) x = dist(rng);
    return ad::parameter(std::move(t));
  };
  auto zeros = [](std::size_t n) { return ad::parameter(Tensor({n})); };

  gcn_.clear();
  for (std::size_t l = 0; l + 1 < cfg_.gcn_channels.size(); ++l) {
    gcn_.push_back({weight(cfg_.gcn_channels[l], cfg_.gcn_channels[l + 1]),
                    zeros(cfg_.gcn_channels[l + 1])});
  }
  const std::size_t hid = cfg_.lstm_hidden;
  lstm_.reset();
  att_.reset();
  if (cfg_.variant != Variant::GcnOnly) {
    LstmParams p;
    p.hidden = hid;
    p.w_input = weight(cfg_.gcn_channels.back(), 4 * hid);
    p.w_hidden = weight(hid, 4 * hid);
    Tensor b({4 * hid});
    for (std::size_t i = hid; i < 2 * hid; ++i) b[i] = 1.0; // forget gate
    p.bias = ad::parameter(std::move(b));
    lstm_ = std::move(p);
  }
  if (cfg_.variant == Variant::GcnLstmAtt) {
    AttentionParams p;
    p.w = weight(hid, cfg_.attention_dim);
    p.b = zeros(cfg_.attention_dim);
    p.v = weight(cfg_.attention_dim, 1);
    att_ = std::move(p);
  }
  head_.w = weight(cfg_.feature_dim(), cfg_.n_classes);
  head_.b = zeros(cfg_.n_classes);
}

std::vector<NamedParam> GcnLstmAttModel::parameters() const {
  std::vector<NamedParam> out;
  visit_params([&out](const std::string& name, const Var& v) { out.push_back({name, v}); });
  return out;
}

ForwardResult GcnLstmAttModel::forward(Tape& tape, const Var& x, std::mt19937_64* dropout_rng) const {
  const auto& s = x.shape();
  if (s.size() != 4 || s[2] != kJointCount || s[3] != cfg_.gcn_channels.front()) {
    throw DataError("model input must be [B, T, 20, 3], got " + ad::shape_str(s));
  }
  if (target_length != 0 && s[1] != target_length) {
    throw DataError("sequence length " + std::to_string(s[1]) + " does not match the model's target_length " +
                    std::to_string(target_length));
  }
  const Var h = gcn_forward(tape, x, adj_, gcn_);
  const Var frames = frame_embed(tape, h);
  ForwardResult res;
  Var feat;
  switch (cfg_.variant) {
  case Variant::GcnOnly: feat = ad::mean(tape, frames, 1); break;
  case Variant::GcnLstm: feat = ad::mean(tape, lstm_forward(tape, frames, *lstm_), 1); break;
  case Variant::GcnLstmAtt: {
    auto att = attention_pool(tape, lstm_forward(tape, frames, *lstm_), *att_);
    feat = att.context;
    res.alpha = att.alpha;
    break;
  }
  }
  if (dropout_rng && cfg_.dropout > 0.0) {
    std::bernoulli_distribution keep(1.0 - cfg_.dropout);
    Tensor mask(feat.shape());
    for (auto& m : mask.values()) m = keep(*dropout_rng) ? 1.0 / (1.0 - cfg_.dropout) : 0.0;
    feat = ad::mul(tape, feat, ad::constant(std::move(mask)));
  }
  res.logits = ad::linear(tape, feat, head_.w, head_.b);
  return res;
}

Tensor batch_tensor(std::span<const MotionSequence* const> seqs) {
  if (seqs.empty()) throw DataError("empty batch");
  const std::size_t steps = seqs.front()->frames.size();
  Tensor x({seqs.size(), steps, kJointCount, 3});
  double* dst = x.data().data();
  for (const auto* s : seqs) {
    if (s->frames.size() != steps) {
      throw DataError("batch mixes sequence lengths " + std::to_string(steps) + " and " +
                      std::to_string(s->frames.size()) + "; preprocess first");
    }
    for (const auto& f : s->frames) dst = std::copy(f.coords.begin(), f.coords.end(), dst);
  }
  return x;
}

std::array<double, kClassCount> GcnLstmAttModel::logits(const MotionSequence& seq) const {
  const MotionSequence* ptr = &seq;
  Tape tape;
  tape.set_grad_enabled(false);
  const auto out = forward(tape, ad::constant(batch_tensor({&ptr, 1})));
  std::array<double, kClassCount> res{};
  std::copy_n(out.logits.value().data().begin(), kClassCount, res.begin());
  return res;
}

Label argmax_label(std::span<const double> logits) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return label_from_code(static_cast<int>(best));
}

std::vector<Label> predict(const GcnLstmAttModel& model, std::span<const MotionSequence> seqs) {
  constexpr std::size_t kChunk = 32;
  std::vector<Label> out;
  out.reserve(seqs.size());
  for (std::size_t start = 0; start < seqs.size(); start += kChunk) {
    std::vector<const MotionSequence*> batch;
    for (std::size_t i = start; i < std::min(seqs.size(), start + kChunk); ++i) batch.push_back(&seqs[i]);
    Tape tape;
    tape.set_grad_enabled(false);
    const auto res = model.forward(tape, ad::constant(batch_tensor(batch)));
    const auto& lv = res.logits.value();
    const std::size_t k = lv.dim(1);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      out.push_back(argmax_label(lv.data().subspan(b * k, k)));
    }
  }
  return out;
}

Adam::Adam(std::vector<Var> params, const TrainConfig& cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value().size(), 0.0);
    v_.emplace_back(p.value().size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) continue;
    auto& w = p.mutable_value().values();
    const auto& g = p.grad().values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g[j] + cfg_.weight_decay * w[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
      w[j] -= cfg_.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
    }
  }
}

namespace {

double accuracy_of(const GcnLstmAttModel& model, const std::vector<MotionSequence>& seqs) {
  if (seqs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto pred = predict(model, seqs);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) hit += pred[i] == seqs[i].label ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(seqs.size());
}

} // namespace

TrainResult train(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const SkeletonGraph& graph, const std::function<void(const EpochRecord&)>& on_epoch) {
  mcfg.validate();
  tcfg.validate();
  ds.validate_split();
  if (ds.split->train.empty()) throw DataError("training split is empty");
  const std::size_t steps = ds.sequences[ds.split->train.front()].frames.size();
  for (const auto& s : ds.sequences) {
    if (s.frames.size() != steps) throw DataError("train: sequences differ in length; preprocess first");
  }

  TrainResult res{GcnLstmAttModel(mcfg, graph, tcfg.seed), {}};
  GcnLstmAttModel& model = res.model;
  model.target_length = steps;
  std::vector<Var> params;
  for (auto& np : model.parameters()) params.push_back(np.var);
  Adam opt(params, tcfg);

  std::mt19937_64 rng(tcfg.seed + 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order = ds.split->train;
  const auto test = ds.test_sequences();

  for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      std::vector<const MotionSequence*> batch;
      std::vector<int> targets;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&ds.sequences[order[i]]);
        targets.push_back(label_code(ds.sequences[order[i]].label));
      }
      Tape tape;
      try {
        const auto fwd = model.forward(tape, ad::constant(batch_tensor(batch)), &rng);
        const Var loss = ad::cross_entropy(tape, fwd.logits, targets);
        const auto& lv = fwd.logits.value();
        for (std::size_t b = 0; b < batch.size(); ++b) {
          const auto row = lv.data().subspan(b * kClassCount, kClassCount);
          correct += label_code(argmax_label(row)) == targets[b] ? 1 : 0;
        }
        loss_sum += loss.value().item() * static_cast<double>(batch.size());
        opt.zero_grad();
        tape.backward(loss);
        opt.step();
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_no + 1) + ": " + e.what());
      }
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    rec.test_accuracy = accuracy_of(model, test);
    res.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return res;
}

} // namespace compdetect
