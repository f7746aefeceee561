// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace compdetect::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles. Plain value type, no gradient bookkeeping.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Value of a single-element tensor.
  double item() const;
  Tensor reshaped(Shape shape) const;
  void fill(double v);
  bool all_finite() const;

private:
  Shape shape_;
  std::vector<double> data_;
};

class Tape;

/// Graph node: a value, its adjoint, and the rule that pushes the adjoint to its parents.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Node&)> backward;

  /// Allocates a zero adjoint of the value's shape if not present yet.
  Tensor& ensure_grad();
};

/// Shared handle to a graph node. Copies alias the same node.
class Var {
public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  /// Mutable access for optimizers and finite-difference probes; never call while a tape
  /// referencing this node is still awaiting backward().
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& mutable_grad() { return node_->ensure_grad(); }
  bool has_grad() const { return node_->grad.size() == node_->value.size() && node_->grad.size() > 0; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

private:
  std::shared_ptr<Node> node_;
};

/// Leaf that accumulates gradients (a trainable parameter).
Var parameter(Tensor value);
/// Leaf without gradient (input data, masks).
Var constant(Tensor value);

/// Records operations in execution order so backward() can replay adjoints in exact reverse
/// order. A tape is single-use: build, call backward() once, discard (or reset()).
class Tape {
public:
  Var record(Tensor value, std::vector<Var> parents, std::function<void(const Node&)> backward,
             const char* op_name);

  /// Seeds d(loss)/d(loss) = 1 and propagates. Leaf gradients accumulate additively.
  void backward(const Var& loss);
  void reset();
  /// With gradients disabled nothing is retained: results carry values only (inference).
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

private:
  std::vector<std::shared_ptr<Node>> nodes_;
  bool consumed_ = false;
  bool grad_enabled_ = true;
};

// Core ops. Shape errors and non-finite results raise NumericError.

/// [..., m, k] x [k, n] -> [..., m, n]; leading dims of `a` are flattened.
Var matmul(Tape& tape, const Var& a, const Var& b);
/// Fused x * w + b with x [..., k], w [k, n], b [n].
Var linear(Tape& tape, const Var& x, const Var& w, const Var& b);
/// Batched [B, m, k] x [B, k, n] -> [B, m, n].
Var bmm(Tape& tape, const Var& a, const Var& b);
/// Left-multiplies every trailing [J, C] block of `x` by the constant matrix `m` [J, J].
Var left_matmul(Tape& tape, const Tensor& m, const Var& x);
/// Elementwise sum. `b` may equal `a` in shape or match a trailing suffix of it (bias add).
Var add(Tape& tape, const Var& a, const Var& b);
Var sub(Tape& tape, const Var& a, const Var& b);
/// Elementwise product of equal shapes.
Var mul(Tape& tape, const Var& a, const Var& b);
Var scale(Tape& tape, const Var& a, double factor);
Var sigmoid(Tape& tape, const Var& a);
Var tanh(Tape& tape, const Var& a);
Var relu(Tape& tape, const Var& a);
/// Softmax over the last dimension.
Var softmax(Tape& tape, const Var& a);
/// Concatenation along `axis` (default: last).
Var concat(Tape& tape, const std::vector<Var>& parts, int axis = -1);
/// Reductions remove `axis` from the shape (a rank-1 input yields shape [1]).
Var sum(Tape& tape, const Var& a, int axis);
Var mean(Tape& tape, const Var& a, int axis);
/// Sum of every element, shape [1].
Var sum_all(Tape& tape, const Var& a);
/// Keeps indices [begin, end) along `axis`.
Var slice(Tape& tape, const Var& a, int axis, std::size_t begin, std::size_t end);
Var reshape(Tape& tape, const Var& a, Shape shape);
/// Mean softmax cross-entropy of logits [B, K] against integer targets, shape [1].
Var cross_entropy(Tape& tape, const Var& logits, std::span<const int> targets);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Builds a scalar loss on the given tape from the current parameter values.
using LossFn = std::function<Var(Tape&)>;
/// Optional hook applied to the analytic gradients before comparison (negative controls).
using GradientHook = std::function<void(std::vector<Tensor>&)>;

/// Compares backward() against central differences over every parameter entry.
/// Relative error per entry: |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckResult gradient_check(const LossFn& f, std::vector<Var> params, double eps = 1e-5,
                               const GradientHook& hook = {});

} // namespace compdetect::ad
