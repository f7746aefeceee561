// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include <doctest.h>

#include <cmath>
#include <limits>

#include "compdetect/autodiff.hpp"
#include "compdetect/errors.hpp"
#include "helpers.hpp"

using namespace compdetect;
using namespace compdetect::ad;

namespace {

// Weighted sum with fixed random weights so every output entry gets a distinct adjoint.
Var probe_loss(Tape& tape, const Var& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum_all(tape, mul(tape, out, constant(testutil::random_tensor(rng, out.shape()))));
}

double op_error(const std::function<Var(Tape&, const std::vector<Var>&)>& op, std::vector<Var> params) {
  auto res = gradient_check([&](Tape& t) { return probe_loss(t, op(t, params), 99); }, params);
  return res.max_rel_error;
}

// Values bounded away from zero so relu has no kink inside the finite-difference stencil.
Tensor away_from_zero(std::mt19937_64& rng, Shape shape) {
  auto t = testutil::random_tensor(rng, std::move(shape));
  for (auto& v : t.values()) v = (v >= 0 ? 0.1 : -0.1) + v;
  return t;
}

} // namespace

TEST_SUITE("autodiff") {

TEST_CASE("forward values of the basic ops") {
  Tape tape;
  auto a = constant(Tensor({2, 2}, {1, 2, 3, 4}));
  auto id = constant(Tensor({2, 2}, {1, 0, 0, 1}));
  CHECK(matmul(tape, a, id).value().values() == std::vector<double>{1, 2, 3, 4});

  auto sm = softmax(tape, constant(Tensor({4}, 0.0)));
  for (double v : sm.value().values()) CHECK(v == 0.25);

  CHECK(sigmoid(tape, constant(Tensor::scalar(0.0))).value().item() == 0.5);
  CHECK(tanh(tape, constant(Tensor::scalar(0.0))).value().item() == 0.0);
  CHECK(relu(tape, constant(Tensor({2}, {-1.0, 2.0}))).value().values() == std::vector<double>{0.0, 2.0});

  auto m = constant(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  CHECK(sum(tape, m, 0).value().values() == std::vector<double>{5, 7, 9});
  CHECK(mean(tape, m, 1).value().values() == std::vector<double>{2, 5});
  CHECK(slice(tape, m, 1, 1, 3).value().values() == std::vector<double>{2, 3, 5, 6});
  CHECK(concat(tape, {m, m}, 0).value().shape() == Shape{4, 3});
  CHECK(concat(tape, {m, m}).value().values() == std::vector<double>{1, 2, 3, 1, 2, 3, 4, 5, 6, 4, 5, 6});
  CHECK(add(tape, m, constant(Tensor({3}, {10, 20, 30}))).value().values() ==
        std::vector<double>{11, 22, 33, 14, 25, 36});
  CHECK(linear(tape, m, constant(Tensor({3, 1}, {1, 1, 1})), constant(Tensor({1}, {0.5}))).value().values() ==
        std::vector<double>{6.5, 15.5});
}

TEST_CASE("softmax rows are distributions") {
  std::mt19937_64 rng(7);
  Tape tape;
  tape.set_grad_enabled(false);
  auto sm = softmax(tape, constant(testutil::random_tensor(rng, {50, 9}, 20.0)));
  for (std::size_t r = 0; r < 50; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 9; ++c) {
      CHECK(sm.value()[r * 9 + c] >= 0.0);
      s += sm.value()[r * 9 + c];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("backward on simple losses") {
  std::mt19937_64 rng(8);
  auto w = parameter(testutil::random_tensor(rng, {2, 2}));
  {
    Tape tape;
    tape.backward(sum_all(tape, w));
    for (double g : w.grad().values()) CHECK(g == 1.0);
  }
  w.zero_grad();
  {
    Tape tape;
    tape.backward(sum_all(tape, mul(tape, w, w)));
    for (std::size_t i = 0; i < 4; ++i) CHECK(w.grad()[i] == doctest::Approx(2.0 * w.value()[i]).epsilon(1e-15));
  }
}

TEST_CASE("backward contract") {
  auto w = parameter(Tensor({3}, 1.0));
  Tape tape;
  auto loss = sum_all(tape, w);
  tape.backward(loss);
  CHECK(tape.consumed());
  CHECK_THROWS(tape.backward(loss));

  Tape t2;
  auto vec = scale(t2, w, 2.0);
  CHECK_THROWS(t2.backward(vec));
}

TEST_CASE("gradient accumulates over two consumers") {
  std::mt19937_64 rng(9);
  auto x = parameter(testutil::random_tensor(rng, {3, 4}));
  Tape tape;
  // x feeds both terms: d/dx sum(x*x) + sum(3x) = 2x + 3.
  tape.backward(add(tape, sum_all(tape, mul(tape, x, x)), sum_all(tape, scale(tape, x, 3.0))));
  for (std::size_t i = 0; i < x.value().size(); ++i) {
    CHECK(x.grad()[i] == doctest::Approx(2.0 * x.value()[i] + 3.0).epsilon(1e-14));
  }
}

TEST_CASE("no-grad mode records nothing") {
  auto w = parameter(Tensor({2}, 1.0));
  Tape tape;
  tape.set_grad_enabled(false);
  auto y = scale(tape, w, 2.0);
  CHECK(tape.size() == 0);
  CHECK(y.value().values() == std::vector<double>{2.0, 2.0});
}

TEST_CASE("shape mismatch names both shapes") {
  Tape tape;
  auto a = constant(Tensor({2, 3}));
  auto b = constant(Tensor({4, 5}));
  try {
    matmul(tape, a, b);
    FAIL("expected a shape error");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(shape_str({2, 3})) != std::string::npos);
    CHECK(msg.find(shape_str({4, 5})) != std::string::npos);
  }
  CHECK_THROWS_AS(mul(tape, a, constant(Tensor({3, 2}))), NumericError);
  CHECK_THROWS_AS(add(tape, a, constant(Tensor({2}))), NumericError);
}

TEST_CASE("non-finite results raise") {
  Tape tape;
  auto big = constant(Tensor({1, 1}, 1e200));
  CHECK_THROWS_AS(matmul(tape, big, big), NumericError);
  CHECK_THROWS_AS(scale(tape, big, 1e200), NumericError);
}

TEST_CASE("every op passes a central-difference check") {
  std::mt19937_64 rng(10);
  auto P = [&](Shape s) { return parameter(testutil::random_tensor(rng, std::move(s))); };
  const double tol = 1e-6;

  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return matmul(t, p[0], p[1]); }, {P({2, 3, 4}), P({4, 5})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return linear(t, p[0], p[1], p[2]); },
                 {P({2, 3, 4}), P({4, 5}), P({5})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return bmm(t, p[0], p[1]); }, {P({3, 2, 4}), P({3, 4, 2})}) < tol);
  const Tensor m = testutil::random_tensor(rng, {4, 4});
  CHECK(op_error([&](Tape& t, const std::vector<Var>& p) { return left_matmul(t, m, p[0]); }, {P({2, 3, 4, 5})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return add(t, p[0], p[1]); }, {P({3, 4}), P({3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return add(t, p[0], p[1]); }, {P({2, 3, 4}), P({4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return sub(t, p[0], p[1]); }, {P({3, 4}), P({3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return mul(t, p[0], p[1]); }, {P({3, 4}), P({3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return scale(t, p[0], -1.7); }, {P({5})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return sigmoid(t, p[0]); }, {P({3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return tanh(t, p[0]); }, {P({3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return relu(t, p[0]); },
                 {parameter(away_from_zero(rng, {3, 4}))}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return softmax(t, p[0]); }, {P({3, 5})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return concat(t, {p[0], p[1]}); }, {P({2, 3}), P({2, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return concat(t, {p[0], p[1]}, 1); },
                 {P({2, 3, 2}), P({2, 1, 2})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return sum(t, p[0], 1); }, {P({2, 3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return mean(t, p[0], -2); }, {P({2, 3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return slice(t, p[0], 2, 1, 3); }, {P({2, 3, 4})}) < tol);
  CHECK(op_error([](Tape& t, const std::vector<Var>& p) { return reshape(t, p[0], {6, 4}); }, {P({2, 3, 4})}) < tol);

  const std::vector<int> targets{0, 3, 1};
  auto logits = P({3, 4});
  CHECK(gradient_check([&](Tape& t) { return cross_entropy(t, logits, targets); }, {logits}).max_rel_error < tol);
}

TEST_CASE("cross-entropy of uniform logits is ln 4") {
  Tape tape;
  const std::vector<int> targets{2};
  auto ce = cross_entropy(tape, constant(Tensor({1, 4}, 0.3)), targets);
  CHECK(std::abs(ce.value().item() - std::log(4.0)) < 1e-12);
}

TEST_CASE("gradient_check oracles") {
  std::mt19937_64 rng(11);
  auto w = parameter(testutil::random_tensor(rng, {4, 3}));
  const auto sq = gradient_check([&](Tape& t) { return sum_all(t, mul(t, w, w)); }, {w});
  CHECK(sq.max_rel_error < 1e-8);
  CHECK(sq.entries_checked == 12);

  const auto flat = gradient_check([&](Tape& t) { return sum_all(t, scale(t, w, 0.0)); }, {w});
  CHECK(flat.max_rel_error == 0.0);

  // A corrupted adjoint must be caught.
  const auto bad = gradient_check([&](Tape& t) { return sum_all(t, mul(t, w, w)); }, {w}, 1e-5,
                                  [](std::vector<Tensor>& g) { g[0][0] += 0.1; });
  CHECK(bad.max_rel_error > 1e-2);
}

} // TEST_SUITE
