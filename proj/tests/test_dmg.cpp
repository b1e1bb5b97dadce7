// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/dmg.hpp"

#include <doctest.h>

#include "pansharp/errors.hpp"
#include "pansharp/gradcheck.hpp"

using namespace pansharp;
using ad::Shape;
using ad::Tensor;

namespace {

Tensor<double> random_tensor(Shape s, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(static_cast<size_t>(s.numel()));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor<double>::from_values(s, std::move(v));
}

// Independent route: per-window 2x2 normal equations of the ridge objective,
// solved by Cramer's rule on sums gathered from the reflect-padded window.
void window_normal_equations(const Tensor<double>& guide, const Tensor<double>& ms, int ch, int cy,
                             int cx, int radius, double lambda, double& m_out, double& n_out) {
  const Shape s = guide.shape();
  double sum_g = 0, sum_x = 0, sum_gg = 0, sum_gx = 0;
  int count = 0;
  for (int dy = -radius; dy <= radius; ++dy) {
    int y = reflect101_index(cy + dy, s.h);
    for (int dx = -radius; dx <= radius; ++dx) {
      int x = reflect101_index(cx + dx, s.w);
      double g = guide.values()[static_cast<size_t>((ch * s.h + y) * s.w + x)];
      double v = ms.values()[static_cast<size_t>((ch * s.h + y) * s.w + x)];
      sum_g += g;
      sum_x += v;
      sum_gg += g * g;
      sum_gx += g * v;
      ++count;
    }
  }
  // [sum_gg + lambda*|w|, sum_g; sum_g, |w|] [m; n] = [sum_gx; sum_x]
  double a = sum_gg + lambda * count, b = sum_g, c = sum_g, d = count;
  double det = a * d - b * c;
  m_out = (sum_gx * d - b * sum_x) / det;
  n_out = (a * sum_x - sum_gx * c) / det;
}

// Center-pixel gradient-support probe through the first `layers` layers of
// the feature stack; returns the bounding-box side and nonzero count.
std::pair<int, int64_t> rf_probe(int layers, uint64_t seed) {
  DmgNet<double> net(4, 32, seed);
  int n = 128;
  auto x = Tensor<double>::zeros({1, 1, n, n});
  {
    Rng rng(seed + 1);
    for (double& v : x.values()) v = rng.uniform(0.1, 0.9);
  }
  x.set_requires_grad(true);
  auto out = net.forward_layers(x, layers);
  auto mask = Tensor<double>::zeros(out.shape());
  mask.values()[static_cast<size_t>((0 * out.shape().h + n / 2) * out.shape().w + n / 2)] = 1.0;
  auto loss = ad::scale(ad::mean_all(ad::mul(out, mask)), static_cast<double>(out.numel()));
  ad::backward(loss);
  int ymin = n, ymax = -1, xmin = n, xmax = -1;
  int64_t nonzero = 0;
  for (int y = 0; y < n; ++y)
    for (int xcol = 0; xcol < n; ++xcol)
      if (x.grad()[static_cast<size_t>(y * n + xcol)] != 0.0) {
        ++nonzero;
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
        xmin = std::min(xmin, xcol);
        xmax = std::max(xmax, xcol);
      }
  CHECK(ymax - ymin == xmax - xmin);
  return {ymax - ymin + 1, nonzero};
}

}  // namespace

TEST_CASE("feature net: 4 output channels, spatial size preserved") {
  DmgNet<double> net(4, 32, 99);
  auto x = random_tensor({1, 1, 24, 24}, 1);
  auto y = net.forward(x);
  CHECK(y.shape().c == 4);
  CHECK(y.shape().h == 24);
  CHECK(y.shape().w == 24);
}

TEST_CASE("receptive field: 65x65 after layer six, 67x67 after layer seven") {
  auto [side7, count7] = rf_probe(7, 301);
  CHECK(side7 == 67);
  CHECK(count7 == 67 * 67);
  auto [side6, count6] = rf_probe(6, 302);
  CHECK(side6 == 65);
  CHECK(count6 == 65 * 65);
}

TEST_CASE("guided coefficients: constant guide window forces m = 0, n = window mean") {
  auto guide = Tensor<double>::full({1, 1, 8, 8}, 0.4);
  auto ms = random_tensor({1, 1, 8, 8}, 21);
  auto gc = guided_coeffs(guide, ms, 2, 1e-4, 2);
  auto mean_x = ad::box_mean_t(ms, 2);
  // m is 0/(0+lambda) up to roundoff in the covariance numerator (amplified
  // by 1/lambda), so the comparison is absolute.
  for (size_t i = 0; i < gc.m_raw.values().size(); ++i) {
    CHECK(std::abs(gc.m_raw.values()[i]) <= 1e-10);
    CHECK(std::abs(gc.n_raw.values()[i] - mean_x.values()[i]) <= 1e-10);
  }
}

TEST_CASE("guided coefficients: exact global linear model recovered with lambda = 0") {
  auto guide = random_tensor({1, 2, 10, 10}, 22, 0.1, 0.9);
  std::vector<double> msv(guide.values().size());
  for (size_t i = 0; i < msv.size(); ++i) msv[i] = 2.0 * guide.values()[i] + 3.0;
  auto ms = Tensor<double>::from_values(guide.shape(), std::move(msv));
  auto gc = guided_coeffs(guide, ms, 2, 0.0, 2);
  for (size_t i = 0; i < gc.m_raw.values().size(); ++i) {
    CHECK(gc.m_raw.values()[i] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(gc.n_raw.values()[i] == doctest::Approx(3.0).epsilon(1e-9));
  }
  // Window averaging preserves the constant coefficients.
  for (size_t i = 0; i < gc.m_l.values().size(); ++i) {
    CHECK(gc.m_l.values()[i] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(gc.n_l.values()[i] == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("guided coefficients match the normal-equations oracle to 1e-8 relative") {
  for (double lambda : {0.0, 1e-4, 1e-2}) {
    CAPTURE(lambda);
    auto guide = random_tensor({1, 2, 8, 8}, 23, 0.05, 0.95);
    auto ms = random_tensor({1, 2, 8, 8}, 24, 0.05, 0.95);
    auto gc = guided_coeffs(guide, ms, 2, lambda, 2);
    const Shape s = guide.shape();
    for (int ch = 0; ch < 2; ++ch) {
      for (int cy = 0; cy < 8; ++cy) {
        for (int cx = 0; cx < 8; ++cx) {
          double m, n;
          window_normal_equations(guide, ms, ch, cy, cx, 2, lambda, m, n);
          double mi = gc.m_raw.values()[static_cast<size_t>((ch * s.h + cy) * s.w + cx)];
          double ni = gc.n_raw.values()[static_cast<size_t>((ch * s.h + cy) * s.w + cx)];
          CHECK(std::abs(mi - m) <= 1e-8 * std::max(1.0, std::abs(m)));
          CHECK(std::abs(ni - n) <= 1e-8 * std::max(1.0, std::abs(n)));
        }
      }
    }
  }
}

TEST_CASE("guided coefficients: singular window raises a numeric error") {
  auto guide = Tensor<double>::full({1, 1, 6, 6}, 0.5);
  auto ms = random_tensor({1, 1, 6, 6}, 25);
  CHECK_THROWS_AS(guided_coeffs(guide, ms, 2, 0.0, 2), numeric_error);
}

TEST_CASE("dmg_combine: identity coefficients return the feature map") {
  auto feat = random_tensor({1, 4, 8, 8}, 26);
  auto ones = Tensor<double>::full(feat.shape(), 1.0);
  auto zeros = Tensor<double>::zeros(feat.shape());
  auto out = dmg_combine(ones, feat, zeros);
  CHECK(out.values() == feat.values());
}

TEST_CASE("dmg_fuse: output shape and exact constant-scene behavior") {
  DmgNet<double> net(4, 8, 42);
  Kernel pk = mtf_gaussian_kernel(0.15, 4);
  SUBCASE("output is (N, b, M, M)") {
    auto pan = random_tensor({2, 1, 32, 32}, 27);
    auto ms = random_tensor({2, 4, 8, 8}, 28);
    auto fusion = dmg_fuse(net, pan, ms, 2, 1e-4, 4, pk);
    CHECK(fusion.fused.shape() == Shape{2, 4, 32, 32});
  }
  SUBCASE("constant pan and constant ms give a constant F_d equal to the ms level") {
    auto pan = Tensor<double>::full({1, 1, 32, 32}, 0.6);
    std::vector<double> msv;
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 64; ++i) msv.push_back(0.1 * (b + 1));
    auto ms = Tensor<double>::from_values({1, 4, 8, 8}, std::move(msv));
    auto fusion = dmg_fuse(net, pan, ms, 2, 1e-4, 4, pk);
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 32 * 32; ++i)
        CHECK(fusion.fused.values()[static_cast<size_t>(b * 1024 + i)] ==
              doctest::Approx(0.1 * (b + 1)).epsilon(1e-9));
  }
  SUBCASE("size contract violations rejected") {
    auto pan = random_tensor({1, 1, 32, 32}, 29);
    auto ms = random_tensor({1, 4, 9, 9}, 30);
    CHECK_THROWS_AS(dmg_fuse(net, pan, ms, 2, 1e-4, 4, pk), std::invalid_argument);
  }
}

TEST_CASE("dmg_loss: fixed points and batch invariance") {
  auto a = random_tensor({1, 4, 6, 6}, 31);
  CHECK(dmg_loss(a, a).item() == 0.0);
  auto x = Tensor<double>::full({1, 1, 1, 1}, 1.0);
  auto y = Tensor<double>::full({1, 1, 1, 1}, 0.5);
  CHECK(dmg_loss(x, y).item() == doctest::Approx(0.25).epsilon(1e-15));

  //

  // Replicating the sample across the batch leaves the mean loss unchanged.
  auto b = random_tensor({1, 4, 6, 6}, 32);
  double single = dmg_loss(a, b).item();
  std::vector<double> av = a.values(), bv = b.values();
  av.insert(av.end(), a.values().begin(), a.values().end());
  bv.insert(bv.end(), b.values().begin(), b.values().end());
  auto a2 = Tensor<double>::from_values({2, 4, 6, 6}, std::move(av));
  auto b2 = Tensor<double>::from_values({2, 4, 6, 6}, std::move(bv));
  CHECK(dmg_loss(a2, b2).item() == doctest::Approx(single).epsilon(1e-12));
}

TEST_CASE("end-to-end differentiability of the supervised DMG loss (toy sample)") {
  // 16x16 pan / 4x4 ms, double precision, FD vs AD.
  DmgNet<double> net(4, 4, 55);
  gradcheck::condition_params(net.params(), 56);
  Kernel pk = mtf_gaussian_kernel(0.15, 4);
  auto pan = random_tensor({1, 1, 16, 16}, 33, 0.1, 0.9);
  auto ms = random_tensor({1, 4, 4, 4}, 34, 0.1, 0.9);
  auto ref = random_tensor({1, 4, 16, 16}, 35, 0.1, 0.9);
  auto loss_of = [&]() {
    auto fusion = dmg_fuse(net, pan, ms, 1, 1e-2, 4, pk);
    return dmg_loss(fusion.fused, ref);
  };
  auto loss = loss_of();
  ad::backward(loss);
  Rng rng(36);
  auto params = net.params();
  double max_resid = 0.0, norm = 1e-8;
  for (auto* p : params) {
    auto& vals = p->tensor.values();
    size_t i = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(vals.size()) - 1));
    double ad_grad = p->tensor.grad()[i];
    double orig = vals[i];
    double eps = 1e-5;
    ad::NoGradGuard ng;
    vals[i] = orig + eps;
    double fp = loss_of().item();
    vals[i] = orig - eps;
    double fm = loss_of().item();
    vals[i] = orig + 0.5 * eps;
    double fph = loss_of().item();
    vals[i] = orig - 0.5 * eps;
    double fmh = loss_of().item();
    vals[i] = orig;
    double fd = (fp - fm) / (2 * eps);
    double fd_half = (fph - fmh) / eps;
    norm = std::max({norm, std::abs(fd), std::abs(ad_grad)});
    max_resid = std::max(max_resid, std::abs(fd - ad_grad) - 2.0 * std::abs(fd - fd_half));
  }
  CHECK(max_resid / norm < 1e-5);
}
