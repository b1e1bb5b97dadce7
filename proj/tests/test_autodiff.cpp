// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/autodiff.hpp"

#include <doctest.h>

#include "pansharp/gradcheck.hpp"
#include "pansharp/tensorops.hpp"

using namespace pansharp;
using ad::Shape;
using ad::Tensor;

namespace {

Tensor<double> random_tensor(Shape s, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(static_cast<size_t>(s.numel()));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor<double>::from_values(s, std::move(v));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

TEST_CASE("activations: values at reference points") {
  auto x = Tensor<double>::from_values({1, 1, 1, 4}, {-1.0, 0.0, 2.0, -0.5});
  auto r = ad::relu(x);
  CHECK(r.values() == std::vector<double>{0.0, 0.0, 2.0, 0.0});
  auto l = ad::lrelu(x, 0.2);
  CHECK(l.values()[0] == doctest::Approx(-0.2));
  CHECK(l.values()[1] == 0.0);
  CHECK(l.values()[2] == 2.0);   // identity for x >= 0
  CHECK(l.values()[3] == doctest::Approx(-0.1));
}

TEST_CASE("backward: linear case is exact and repeated calls accumulate") {
  auto w = Tensor<double>::from_values({1, 1, 1, 3}, {0.5, -1.0, 2.0});
  w.set_requires_grad(true);
  auto x = Tensor<double>::from_values({1, 1, 1, 3}, {3.0, 4.0, 5.0});
  auto loss = ad::scale(ad::mean_all(ad::mul(w, x)), 3.0);  // = sum w.x
  ad::backward(loss);
  CHECK(w.grad()[0] == 3.0);
  CHECK(w.grad()[1] == 4.0);
  CHECK(w.grad()[2] == 5.0);
  ad::backward(loss);  // accumulation contract: second call doubles
  CHECK(w.grad()[0] == 6.0);
  CHECK(w.grad()[2] == 10.0);
}

TEST_CASE("backward: diamond graph counts each path once") {
  auto x = Tensor<double>::from_values({1, 1, 1, 1}, {3.0});
  x.set_requires_grad(true);
  auto y = ad::mul(x, x);              // x^2
  auto z = ad::add(y, ad::scale(x, 4.0));  // x^2 + 4x -> dz/dx = 2x + 4 = 10
  ad::backward(z);
  CHECK(x.grad()[0] == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("backward rejects non-scalar losses") {
  auto x = random_tensor({1, 1, 2, 2}, 5);
  x.set_requires_grad(true);
  auto y = ad::mul(x, x);
  CHECK_THROWS_AS(ad::backward(y), std::invalid_argument);
}

TEST_CASE("conv2d: identity, impulse support, stride arithmetic") {
  SUBCASE("1x1 kernel with weight 1, bias 0 is the identity") {
    auto x = random_tensor({2, 1, 5, 5}, 6);
    auto w = Tensor<double>::from_values({1, 1, 1, 1}, {1.0});
    auto b = Tensor<double>::zeros({1, 1, 1, 1});
    auto y = ad::conv2d(x, w, b, 1, 1, ad::PadMode::kReflect);
    for (size_t i = 0; i < x.values().size(); ++i) CHECK(y.values()[i] == x.values()[i]);
  }
  SUBCASE("3x3 dilation-2 kernel spreads a centered impulse to offsets {-2,0,2}^2") {
    auto x = Tensor<double>::zeros({1, 1, 9, 9});
    x.values()[static_cast<size_t>(4 * 9 + 4)] = 1.0;
    auto w = Tensor<double>::full({1, 1, 3, 3}, 1.0);
    auto y = ad::conv2d(x, w, Tensor<double>(), 1, 2, ad::PadMode::kZero);
    for (int iy = 0; iy < 9; ++iy) {
      for (int ix = 0; ix < 9; ++ix) {
        bool support = (std::abs(iy - 4) == 0 || std::abs(iy - 4) == 2) &&
                       (std::abs(ix - 4) == 0 || std::abs(ix - 4) == 2);
        CHECK(y.values()[static_cast<size_t>(iy * 9 + ix)] == (support ? 1.0 : 0.0));
      }
    }
  }
  SUBCASE("stride 2 halves even spatial dims") {
    auto x = random_tensor({1, 3, 12, 8}, 7);
    auto w = random_tensor({5, 3, 3, 3}, 8);
    auto y = ad::conv2d(x, w, Tensor<double>(), 2, 1, ad::PadMode::kZero);
    CHECK(y.shape().h == 6);
    CHECK(y.shape().w == 4);
    CHECK(y.shape().c == 5);
  }
}

TEST_CASE("deconv2d: shape doubling, constant-bias case, adjoint identity") {
  SUBCASE("output spatial dims are twice the input dims") {
    auto x = random_tensor({2, 3, 5, 7}, 9);
    auto w = random_tensor({3, 4, 3, 3}, 10);
    auto y = ad::deconv2d(x, w, Tensor<double>());
    CHECK(y.shape().h == 10);
    CHECK(y.shape().w == 14);
    CHECK(y.shape().c == 4);
  }
  SUBCASE("zero weights with bias beta give a constant-beta output") {
    auto x = random_tensor({1, 2, 4, 4}, 11);
    auto w = Tensor<double>::zeros({2, 3, 3, 3});
    auto b = Tensor<double>::from_values({1, 3, 1, 1}, {0.3, -0.1, 0.8});
    auto y = ad::deconv2d(x, w, b);
    for (int c = 0; c < 3; ++c)
      for (int64_t i = 0; i < 64; ++i)
        CHECK(y.values()[static_cast<size_t>(c * 64 + i)] == b.values()[static_cast<size_t>(c)]);
  }
  SUBCASE("deconv is the exact adjoint of the zero-padded stride-2 conv") {
    // <conv_s2(x), y> == <x, deconv(y)> for shared zero-bias weights.
    auto x = random_tensor({1, 3, 8, 8}, 12);
    auto w = random_tensor({2, 3, 3, 3}, 13);  // conv: 3 -> 2 channels
    auto y = random_tensor({1, 2, 4, 4}, 14);
    auto cx = ad::conv2d(x, w, Tensor<double>(), 2, 1, ad::PadMode::kZero);
    auto dy = ad::deconv2d(y, w, Tensor<double>());
    CHECK(dot(cx.values(), y.values()) == doctest::Approx(dot(x.values(), dy.values())).epsilon(1e-12));
  }
}

TEST_CASE("fixed resampler tensor ops satisfy the adjoint identity to 1e-10 relative") {
  struct Case {
    const char* name;
    Shape in;
    std::function<Tensor<double>(const Tensor<double>&)> op;
  };
  std::vector<Case> cases = {
      {"pyr_u2", {2, 3, 6, 5}, [](const Tensor<double>& t) { return ad::pyr_u2_t(t); }},
      {"pyr_d2", {2, 3, 8, 6}, [](const Tensor<double>& t) { return ad::pyr_d2_t(t); }},
      {"bilinear_up3", {1, 2, 5, 4}, [](const Tensor<double>& t) { return ad::bilinear_up_t(t, 3); }},
      {"box_mean2", {1, 2, 7, 7}, [](const Tensor<double>& t) { return ad::box_mean_t(t, 2); }},
      {"pad_reflect", {1, 2, 6, 6}, [](const Tensor<double>& t) { return ad::pad2d(t, 2, 2, 2, 2, ad::PadMode::kReflect); }},
  };
  for (auto& c : cases) {
    CAPTURE(c.name);
    auto x = random_tensor(c.in, fnv1a64(c.name));
    x.set_requires_grad(true);
    auto ax = c.op(x);
    auto y = random_tensor(ax.shape(), fnv1a64(c.name) + 1);
    // <A x, y>
    double lhs = dot(ax.values(), y.values());
    // A^T y via the backward pass of loss = <A x, y>.
    auto loss = ad::scale(ad::mean_all(ad::mul(ax, y)), static_cast<double>(ax.numel()));
    ad::backward(loss);
    double rhs = dot(x.values(), x.grad());
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1e-3}));
  }
}

TEST_CASE("gradient-check suite: every primitive passes at 1e-6 (double)") {
  for (const auto& r : gradcheck::run_primitive_gradchecks(gradcheck::Precision::kDouble)) {
    CAPTURE(r.name);
    CAPTURE(r.max_rel_err);
    CHECK(r.pass);
  }
}

TEST_CASE("random 3-layer net matches central finite differences below 1e-6") {
  auto builder = []<typename T>(std::vector<Tensor<T>>& l) {
    auto h1 = ad::lrelu(ad::conv2d(l[0], l[1], l[2], 1, 1, ad::PadMode::kReflect), 0.2);
    auto h2 = ad::relu(ad::conv2d(h1, l[3], l[4], 2, 1, ad::PadMode::kZero));
    auto h3 = ad::conv2d(h2, l[5], l[6], 1, 2, ad::PadMode::kReflect);
    return ad::mse_mean(h3, l[7]);
  };
  std::vector<gradcheck::LeafSpec> leaves = {
      {{1, 1, 8, 8}}, {{4, 1, 3, 3}}, {{1, 4, 1, 1}}, {{4, 4, 3, 3}},
      {{1, 4, 1, 1}}, {{2, 4, 3, 3}}, {{1, 2, 1, 1}}, {{1, 2, 4, 4}},
  };
  auto res = gradcheck::check<double>("net3", leaves, builder, builder, 77, 1e-5, 1e-6);
  CAPTURE(res.max_rel_err);
  CHECK(res.pass);
}

TEST_CASE("adam: zero grad is a no-op, defaults match, one hand-checked step") {
  ad::Param<double> p({1, 1, 1, 1}, "p");
  p.tensor.values()[0] = 0.5;
  ad::Adam<double> opt;
  CHECK(opt.beta1 == 0.5);
  CHECK(opt.beta2 == 0.999);
  SUBCASE("zero gradient leaves the parameter unchanged") {
    std::vector<ad::Param<double>*> ps = {&p};
    opt.step(ps);  // grad never materialized
    CHECK(p.tensor.values()[0] == 0.5);
    p.tensor.grad().assign(1, 0.0);
    opt.step(ps);
    CHECK(p.tensor.values()[0] == 0.5);
  }
  SUBCASE("single step with g=1, lr=0.1 moves by ~0.1") {
    opt.lr = 0.1;
    p.tensor.grad().assign(1, 1.0);
    std::vector<ad::Param<double>*> ps = {&p};
    opt.step(ps);
    // mhat = 1, vhat = 1 -> delta = 0.1/(1 + 1e-8)
    CHECK(p.tensor.values()[0] == doctest::Approx(0.5 - 0.1).epsilon(1e-7));
  }
}

TEST_CASE("sgd: plain descent") {
  ad::Param<double> p({1, 1, 1, 2}, "p");
  p.tensor.values() = {1.0, -2.0};
  p.tensor.grad().assign(2, 0.0);
  p.tensor.grad()[0] = 0.5;
  p.tensor.grad()[1] = -1.0;
  ad::Sgd<double> opt;
  opt.lr = 0.2;
  std::vector<ad::Param<double>*> ps = {&p};
  opt.step(ps);
  CHECK(p.tensor.values()[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(p.tensor.values()[1] == doctest::Approx(-1.8).epsilon(1e-15));
}

TEST_CASE("determinism: same seed gives bitwise-identical forward values and gradients") {
  auto run_once = [](uint64_t seed) {
    auto x = random_tensor({2, 3, 10, 10}, seed);
    x.set_requires_grad(true);
    auto w = random_tensor({4, 3, 3, 3}, seed + 1);
    w.set_requires_grad(true);
    auto y = ad::conv2d(x, w, Tensor<double>(), 1, 2, ad::PadMode::kReflect);
    auto loss = ad::mean_all(ad::mul(y, y));
    ad::backward(loss);
    return std::tuple(y.values(), x.grad(), w.grad());
  };
  auto [v1, gx1, gw1] = run_once(123);
  auto [v2, gx2, gw2] = run_once(123);
  CHECK(v1 == v2);
  CHECK(gx1 == gx2);
  CHECK(gw1 == gw2);
}

TEST_CASE("detach cuts the graph") {
  auto x = random_tensor({1, 1, 2, 2}, 31);
  x.set_requires_grad(true);
  auto y = ad::mul(x, x).detach();
  CHECK_FALSE(y.requires_grad());
  auto z = ad::mean_all(y);
  CHECK_FALSE(z.requires_grad());
}
