// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Core>

#include "compdetect/errors.hpp"

namespace compdetect::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap cmap(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
}

MutMap mmap(Tensor& t, std::size_t rows, std::size_t cols) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw NumericError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                     shape_str(b));
}

std::size_t norm_axis(int axis, std::size_t rank, const char* op) {
  const int r = static_cast<int>(rank);
  const int ax = axis < 0 ? axis + r : axis;
  if (ax < 0 || ax >= r) {
    throw NumericError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " +
                       std::to_string(rank));
  }
  return static_cast<std::size_t>(ax);
}

// View of a shape as [outer, n, inner] around `axis`.
struct AxisView {
  std::size_t outer = 1;
  std::size_t n = 1;
  std::size_t inner = 1;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

Shape drop_axis(const Shape& s, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != axis) out.push_back(s[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

// Accumulates `g` into the parent's adjoint when the parent participates in differentiation.
template <typename Fn>
void with_grad(const std::shared_ptr<Node>& parent, Fn&& fn) {
  if (parent->requires_grad) fn(parent->ensure_grad());
}

template <typename Fn>
Var unary(Tape& tape, const Var& a, const char* op, Fn&& f,
          std::function<void(const Node&)> backward) {
  Tensor out(a.shape());
  const auto& in = a.value().values();
  auto& o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return tape.record(std::move(out), {a}, std::move(backward), op);
}

} // namespace

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {
  if (shape_.empty()) throw NumericError("tensor shape must have at least one dimension");
  for (auto d : shape_) {
    if (d == 0) throw NumericError("tensor dimensions must be positive: " + shape_str(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.empty()) throw NumericError("tensor shape must have at least one dimension");
  if (numel(shape_) != data_.size()) {
    throw NumericError("tensor of shape " + shape_str(shape_) + " cannot hold " +
                       std::to_string(data_.size()) + " values");
  }
}

double Tensor::item() const {
  if (data_.size() != 1) throw NumericError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return Eigen::Map<const Eigen::ArrayXd>(data_.data(), static_cast<Eigen::Index>(data_.size())).allFinite();
}

Tensor& Node::ensure_grad() {
  if (grad.size() != value.size() || grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

void Var::zero_grad() {
  if (node_->grad.size() > 0) node_->grad.fill(0.0);
}

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Tape::record(Tensor value, std::vector<Var> parents, std::function<void(const Node&)> backward,
                 const char* op_name) {
  if (consumed_) throw NumericError(std::string(op_name) + ": tape already consumed by backward()");
  if (!value.all_finite()) {
    throw NumericError(std::string(op_name) + ": non-finite value in result of shape " +
                       shape_str(value.shape()));
  }
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = grad_enabled_ && std::any_of(parents.begin(), parents.end(),
                                                  [](const Var& p) { return p.requires_grad(); });
  if (!grad_enabled_) return Var(std::move(n));
  if (n->requires_grad) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  nodes_.push_back(n);
  return Var(std::move(n));
}

void Tape::backward(const Var& loss) {
  if (consumed_) throw NumericError("backward() called twice on the same tape; reset() first");
  if (loss.value().size() != 1) {
    throw NumericError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  consumed_ = true;
  if (!loss.requires_grad()) return;
  loss.node()->ensure_grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
    if (!n.grad.all_finite()) throw NumericError("backward(): non-finite gradient encountered");
    n.backward(n);
  }
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

Var matmul(Tape& tape, const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() != 2 || sa.back() != sb[0]) shape_error("matmul", sa, sb);
  const std::size_t k = sb[0];
  const std::size_t n = sb[1];
  const std::size_t m = a.value().size() / k;
  Shape so = sa;
  so.back() = n;
  Tensor out(so);
  mmap(out, m, n).noalias() = cmap(a.value(), m, k) * cmap(b.value(), k, n);
  auto pa = a.node();
  auto pb = b.node();
  return tape.record(std::move(out), {a, b}, [pa, pb, m, k, n](const Node& self) {
    auto g = cmap(self.grad, m, n);
    with_grad(pa, [&](Tensor& ga) { mmap(ga, m, k).noalias() += g * cmap(pb->value, k, n).transpose(); });
    with_grad(pb, [&](Tensor& gb) { mmap(gb, k, n).noalias() += cmap(pa->value, m, k).transpose() * g; });
  }, "matmul");
}

Var linear(Tape& tape, const Var& x, const Var& w, const Var& b) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  if (sw.size() != 2 || sx.back() != sw[0]) shape_error("linear", sx, sw);
  const std::size_t k = sw[0];
  const std::size_t n = sw[1];
  if (b.shape() != Shape{n}) shape_error("linear", sw, b.shape());
  const std::size_t m = x.value().size() / k;
  Shape so = sx;
  so.back() = n;
  Tensor out(so);
  auto om = mmap(out, m, n);
  om.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(b.value().data().data(), static_cast<Eigen::Index>(n));
  om.noalias() += cmap(x.value(), m, k) * cmap(w.value(), k, n);
  auto px = x.node();
  auto pw = w.node();
  auto pb = b.node();
  return tape.record(std::move(out), {x, w, b}, [px, pw, pb, m, k, n](const Node& self) {
    auto g = cmap(self.grad, m, n);
    with_grad(px, [&](Tensor& gx) { mmap(gx, m, k).noalias() += g * cmap(pw->value, k, n).transpose(); });
    with_grad(pw, [&](Tensor& gw) { mmap(gw, k, n).noalias() += cmap(px->value, m, k).transpose() * g; });
    with_grad(pb, [&](Tensor& gb) {
      // Fixed row order; Eigen's partial reductions may regroup by buffer alignment.
      const double* gv = self.grad.data().data();
      double* bv = gb.data().data();
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) bv[c] += gv[r * n + c];
      }
    });
  }, "linear");
}

Var bmm(Tape& tape, const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 3 || sb.size() != 3 || sa[0] != sb[0] || sa[2] != sb[1]) shape_error("bmm", sa, sb);
  const std::size_t batch = sa[0], m = sa[1], k = sa[2], n = sb[2];
  Tensor out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    MutMap(out.data().data() + i * m * n, m, n).noalias() =
        ConstMap(a.value().data().data() + i * m * k, m, k) *
        ConstMap(b.value().data().data() + i * k * n, k, n);
  }
  auto pa = a.node();
  auto pb = b.node();
  return tape.record(std::move(out), {a, b}, [pa, pb, batch, m, k, n](const Node& self) {
    for (std::size_t i = 0; i < batch; ++i) {
      ConstMap g(self.grad.data().data() + i * m * n, m, n);
      with_grad(pa, [&](Tensor& ga) {
        MutMap(ga.data().data() + i * m * k, m, k).noalias() +=
            g * ConstMap(pb->value.data().data() + i * k * n, k, n).transpose();
      });
      with_grad(pb, [&](Tensor& gb) {
        MutMap(gb.data().data() + i * k * n, k, n).noalias() +=
            ConstMap(pa->value.data().data() + i * m * k, m, k).transpose() * g;
      });
    }
  }, "bmm");
}

Var left_matmul(Tape& tape, const Tensor& m, const Var& x) {
  const Shape& sx = x.shape();
  if (m.rank() != 2 || m.dim(0) != m.dim(1) || sx.size() < 2 || sx[sx.size() - 2] != m.dim(0)) {
    shape_error("left_matmul", m.shape(), sx);
  }
  const std::size_t rows = m.dim(0);
  const std::size_t cols = sx.back();
  const std::size_t blocks = x.value().size() / (rows * cols);
  // Skeleton adjacency is sparse; iterate over its non-zeros only.
  struct Entry {
    std::size_t i, j;
    double w;
  };
  auto entries = std::make_shared<std::vector<Entry>>();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      if (m[i * rows + j] != 0.0) entries->push_back({i, j, m[i * rows + j]});
    }
  }
  Tensor out(sx);
  const double* xv = x.value().data().data();
  double* ov = out.data().data();
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t off = b * rows * cols;
    for (const auto& e : *entries) {
      const double* src = xv + off + e.j * cols;
      double* dst = ov + off + e.i * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += e.w * src[c];
    }
  }
  auto px = x.node();
  return tape.record(std::move(out), {x}, [px, entries, rows, cols, blocks](const Node& self) {
    with_grad(px, [&](Tensor& gx) {
      const double* g = self.grad.data().data();
      double* gv = gx.data().data();
      for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t off = b * rows * cols;
        for (const auto& e : *entries) {
          const double* src = g + off + e.i * cols;
          double* dst = gv + off + e.j * cols;
          for (std::size_t c = 0; c < cols; ++c) dst[c] += e.w * src[c];
        }
      }
    });
  }, "left_matmul");
}

Var add(Tape& tape, const Var& a_in, const Var& b_in) {
  const bool swap = b_in.value().size() > a_in.value().size();
  const Var& a = swap ? b_in : a_in;
  const Var& b = swap ? a_in : b_in;
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() > sa.size() || !std::equal(sb.rbegin(), sb.rend(), sa.rbegin())) {
    shape_error("add", a_in.shape(), b_in.shape());
  }
  const std::size_t inner = b.value().size();
  const std::size_t outer = a.value().size() / inner;
  Tensor out = a.value();
  const auto& bv = b.value().values();
  auto& o = out.values();
  for (std::size_t r = 0; r < outer; ++r) {
    for (std::size_t i = 0; i < inner; ++i) o[r * inner + i] += bv[i];
  }
  auto pa = a.node();
  auto pb = b.node();
  return tape.record(std::move(out), {a, b}, [pa, pb, outer, inner](const Node& self) {
    const auto& g = self.grad.values();
    with_grad(pa, [&](Tensor& ga) {
      auto& gv = ga.values();
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    });
    with_grad(pb, [&](Tensor& gb) {
      auto& gv = gb.values();
      for (std::size_t r = 0; r < outer; ++r) {
        for (std::size_t i = 0; i < inner; ++i) gv[i] += g[r * inner + i];
      }
    });
  }, "add");
}

Var sub(Tape& tape, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  auto pa = a.node();
  auto pb = b.node();
  return tape.record(std::move(out), {a, b}, [pa, pb](const Node& self) {
    const auto& g = self.grad.values();
    with_grad(pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
    with_grad(pb, [&](Tensor& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    });
  }, "sub");
}

Var mul(Tape& tape, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  auto pa = a.node();
  auto pb = b.node();
  return tape.record(std::move(out), {a, b}, [pa, pb](const Node& self) {
    const auto& g = self.grad.values();
    with_grad(pa, [&](Tensor& ga) {
      const auto& bv = pb->value.values();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    });
    with_grad(pb, [&](Tensor& gb) {
      const auto& av = pa->value.values();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    });
  }, "mul");
}

Var scale(Tape& tape, const Var& a, double factor) {
  auto pa = a.node();
  return unary(tape, a, "scale", [factor](double x) { return factor * x; },
               [pa, factor](const Node& self) {
                 with_grad(pa, [&](Tensor& ga) {
                   for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * self.grad[i];
                 });
               });
}

Var sigmoid(Tape& tape, const Var& a) {
  auto pa = a.node();
  return unary(tape, a, "sigmoid",
               [](double x) {
                 if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [pa](const Node& self) {
                 with_grad(pa, [&](Tensor& ga) {
                   for (std::size_t i = 0; i < ga.size(); ++i) {
                     const double y = self.value[i];
                     ga[i] += self.grad[i] * y * (1.0 - y);
                   }
                 });
               });
}

Var tanh(Tape& tape, const Var& a) {
  auto pa = a.node();
  return unary(tape, a, "tanh", [](double x) { return std::tanh(x); }, [pa](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) {
        const double y = self.value[i];
        ga[i] += self.grad[i] * (1.0 - y * y);
      }
    });
  });
}

Var relu(Tape& tape, const Var& a) {
  auto pa = a.node();
  return unary(tape, a, "relu", [](double x) { return x > 0.0 ? x : 0.0; }, [pa](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      const auto& x = pa->value.values();
      for (std::size_t i = 0; i < ga.size(); ++i) {
        if (x[i] > 0.0) ga[i] += self.grad[i];
      }
    });
  });
}

Var softmax(Tape& tape, const Var& a) {
  const std::size_t k = a.shape().back();
  const std::size_t rows = a.value().size() / k;
  Tensor out(a.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = a.value().data().data() + r * k;
    double* y = out.data().data() + r * k;
    const double mx = *std::max_element(x, x + k);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = std::exp(x[i] - mx);
      z += y[i];
    }
    for (std::size_t i = 0; i < k; ++i) y[i] /= z;
  }
  auto pa = a.node();
  return tape.record(std::move(out), {a}, [pa, rows, k](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* y = self.value.data().data() + r * k;
        const double* g = self.grad.data().data() + r * k;
        double dot = 0.0;
        for (std::size_t i = 0; i < k; ++i) dot += g[i] * y[i];
        double* gx = ga.data().data() + r * k;
        for (std::size_t i = 0; i < k; ++i) gx[i] += y[i] * (g[i] - dot);
      }
    });
  }, "softmax");
}

Var concat(Tape& tape, const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw NumericError("concat: no inputs");
  const Shape& s0 = parts.front().shape();
  const std::size_t ax = norm_axis(axis, s0.size(), "concat");
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != s0.size()) shape_error("concat", s0, s);
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != ax && s[d] != s0[d]) shape_error("concat", s0, s);
    }
    total += s[ax];
  }
  Shape so = s0;
  so[ax] = total;
  const AxisView ov = axis_view(so, ax);
  Tensor out(so);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const AxisView pv = axis_view(p.shape(), ax);
    offsets.push_back(off);
    for (std::size_t o = 0; o < pv.outer; ++o) {
      std::copy_n(p.value().data().data() + o * pv.n * pv.inner, pv.n * pv.inner,
                  out.data().data() + (o * ov.n + off) * ov.inner);
    }
    off += pv.n;
  }
  std::vector<std::shared_ptr<Node>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  return tape.record(std::move(out), parts, [nodes, offsets, ax, ov](const Node& self) {
    for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
      with_grad(nodes[idx], [&](Tensor& gp) {
        const AxisView pv = axis_view(nodes[idx]->value.shape(), ax);
        for (std::size_t o = 0; o < pv.outer; ++o) {
          const double* src = self.grad.data().data() + (o * ov.n + offsets[idx]) * ov.inner;
          double* dst = gp.data().data() + o * pv.n * pv.inner;
          for (std::size_t i = 0; i < pv.n * pv.inner; ++i) dst[i] += src[i];
        }
      });
    }
  }, "concat");
}

Var sum(Tape& tape, const Var& a, int axis) {
  const std::size_t ax = norm_axis(axis, a.shape().size(), "sum");
  const AxisView v = axis_view(a.shape(), ax);
  Tensor out(drop_axis(a.shape(), ax));
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t n = 0; n < v.n; ++n) {
      const double* src = a.value().data().data() + (o * v.n + n) * v.inner;
      double* dst = out.data().data() + o * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
  }
  auto pa = a.node();
  return tape.record(std::move(out), {a}, [pa, v](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      for (std::size_t o = 0; o < v.outer; ++o) {
        const double* g = self.grad.data().data() + o * v.inner;
        for (std::size_t n = 0; n < v.n; ++n) {
          double* dst = ga.data().data() + (o * v.n + n) * v.inner;
          for (std::size_t i = 0; i < v.inner; ++i) dst[i] += g[i];
        }
      }
    });
  }, "sum");
}

Var mean(Tape& tape, const Var& a, int axis) {
  const std::size_t ax = norm_axis(axis, a.shape().size(), "mean");
  return scale(tape, sum(tape, a, axis), 1.0 / static_cast<double>(a.shape()[ax]));
}

Var sum_all(Tape& tape, const Var& a) {
  double s = 0.0;
  for (double x : a.value().values()) s += x;
  auto pa = a.node();
  return tape.record(Tensor::scalar(s), {a}, [pa](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      const double g = self.grad[0];
      for (auto& x : ga.values()) x += g;
    });
  }, "sum_all");
}

Var slice(Tape& tape, const Var& a, int axis, std::size_t begin, std::size_t end) {
  const std::size_t ax = norm_axis(axis, a.shape().size(), "slice");
  if (begin >= end || end > a.shape()[ax]) {
    throw NumericError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                       ") invalid for shape " + shape_str(a.shape()));
  }
  const AxisView v = axis_view(a.shape(), ax);
  Shape so = a.shape();
  so[ax] = end - begin;
  const std::size_t len = (end - begin) * v.inner;
  Tensor out(so);
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(a.value().data().data() + (o * v.n + begin) * v.inner, len,
                out.data().data() + o * len);
  }
  auto pa = a.node();
  return tape.record(std::move(out), {a}, [pa, v, begin, len](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      for (std::size_t o = 0; o < v.outer; ++o) {
        const double* src = self.grad.data().data() + o * len;
        double* dst = ga.data().data() + (o * v.n + begin) * v.inner;
        for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
      }
    });
  }, "slice");
}

Var reshape(Tape& tape, const Var& a, Shape shape) {
  if (numel(shape) != a.value().size()) shape_error("reshape", a.shape(), shape);
  auto pa = a.node();
  return tape.record(a.value().reshaped(std::move(shape)), {a}, [pa](const Node& self) {
    with_grad(pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    });
  }, "reshape");
}

Var cross_entropy(Tape& tape, const Var& logits, std::span<const int> targets) {
  const Shape& s = logits.shape();
  if (s.size() != 2 || s[0] != targets.size()) {
    throw NumericError("cross_entropy: logits " + shape_str(s) + " vs " +
                       std::to_string(targets.size()) + " targets");
  }
  const std::size_t batch = s[0], k = s[1];
  auto probs = std::make_shared<std::vector<double>>(batch * k);
  auto tgt = std::make_shared<std::vector<int>>(targets.begin(), targets.end());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int t = targets[b];
    if (t < 0 || static_cast<std::size_t>(t) >= k) throw NumericError("cross_entropy: target out of range");
    const double* z = logits.value().data().data() + b * k;
    const double mx = *std::max_element(z, z + k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      (*probs)[b * k + i] = std::exp(z[i] - mx);
      total += (*probs)[b * k + i];
    }
    for (std::size_t i = 0; i < k; ++i) (*probs)[b * k + i] /= total;
    loss += (mx + std::log(total)) - z[t];
  }
  loss /= static_cast<double>(batch);
  auto pl = logits.node();
  return tape.record(Tensor::scalar(loss), {logits}, [pl, probs, tgt, batch, k](const Node& self) {
    with_grad(pl, [&](Tensor& gl) {
      const double g = self.grad[0] / static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < k; ++i) {
          const double onehot = static_cast<int>(i) == (*tgt)[b] ? 1.0 : 0.0;
          gl[b * k + i] += g * ((*probs)[b * k + i] - onehot);
        }
      }
    });
  }, "cross_entropy");
}

GradCheckResult gradient_check(const LossFn& f, std::vector<Var> params, double eps,
                               const GradientHook& hook) {
  for (auto& p : params) p.zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.has_grad() ? p.grad() : Tensor(p.shape()));
  if (hook) hook(analytic);

  auto eval = [&f]() {
    Tape tape;
    tape.set_grad_enabled(false);
    return f(tape).value().item();
  };

  GradCheckResult res;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& v = params[pi].mutable_value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + eps;
      const double fp = eval();
      v[i] = orig - eps;
      const double fm = eval();
      v[i] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double an = analytic[pi][i];
      const double denom = std::max({1.0, std::abs(an), std::abs(numeric)});
      const double rel = std::abs(an - numeric) / denom;
      ++res.entries_checked;
      if (rel > res.max_rel_error || res.entries_checked == 1) {
        res.max_rel_error = rel;
        res.worst_param = pi;
        res.worst_index = i;
        res.analytic = an;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

} // namespace compdetect::ad
