// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/losses.hpp"

#include <doctest.h>

#include "pansharp/gradcheck.hpp"
#include "pansharp/ssrc.hpp"

using namespace pansharp;
using ad::Tensor;

namespace {
Tensor<double> constmap(double v) { return Tensor<double>::full({1, 1, 4, 4}, v); }
}  // namespace

TEST_CASE("LSGAN fixed points with (a,b,c) = (1,0,1)") {
  LsganLabels l;
  CHECK(l.a == 1.0);
  CHECK(l.b == 0.0);
  CHECK(l.c == 1.0);
  CHECK(adv_gen_loss(constmap(1.0), l.a).item() == 0.0);
  CHECK(disc_loss(constmap(1.0), constmap(0.0), l.b, l.c).item() == 0.0);
  CHECK(adv_gen_loss(constmap(0.5), l.a).item() == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("D_C role swap: definitions, symmetry, inverted-label penalty") {
  LsganLabels l;
  SUBCASE("constant 0.5 score gives 0.25 for both pairings") {
    auto s = constmap(0.5);
    CHECK(dc_dmg_loss(s, s, l).item() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(dc_f2c_loss(s, s, l).item() == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("role swap identity: L_dmg(x, y) == L_f2c(y, x)") {
    Rng rng(5);
    std::vector<double> xv(16), yv(16);
    for (auto& v : xv) v = rng.uniform();
    for (auto& v : yv) v = rng.uniform();
    auto x = Tensor<double>::from_values({1, 1, 4, 4}, std::move(xv));
    auto y = Tensor<double>::from_values({1, 1, 4, 4}, std::move(yv));
    CHECK(dc_dmg_loss(x, y, l).item() == doctest::Approx(dc_f2c_loss(y, x, l).item()).epsilon(1e-15));
  }
  SUBCASE("perfect discrimination for one pairing costs 1 on the swapped pairing") {
    auto score_fdc = constmap(0.0);  // judged fake
    auto score_fc = constmap(1.0);   // judged real
    CHECK(dc_dmg_loss(score_fdc, score_fc, l).item() == 0.0);
    CHECK(dc_f2c_loss(score_fdc, score_fc, l).item() == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("reconstruction and cycle losses") {
  auto a = constmap(0.4);
  CHECK(recon_loss(a, a).item() == 0.0);
  auto x = Tensor<double>::full({1, 1, 1, 1}, 3.0);
  auto y = Tensor<double>::full({1, 1, 1, 1}, 1.0);
  CHECK(recon_loss(x, y).item() == doctest::Approx(2.0).epsilon(1e-15));  // 1/2 * 2^2
  CHECK(recon_loss(y, x).item() == doctest::Approx(2.0).epsilon(1e-15));  // sign-symmetric
  CHECK(cycle_loss(x, y).item() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cycle_loss(a, a).item() == 0.0);
}

TEST_CASE("cycle of zero-detail generators attenuates a constant to k/16") {
  PyramidGenerator<double> c2f(4, 2, 1, 3, 61, "c2f");
  PyramidGenerator<double> f2c(4, 2, 1, 3, 62, "f2c");
  for (auto& b : c2f.blocks) b.zero_output_head();
  for (auto& b : f2c.blocks) b.zero_output_head();
  double k = 0.8;
  auto origin = Tensor<double>::full({1, 4, 16, 16}, k);
  auto rt = f2c_forward(f2c, c2f_forward(c2f, origin));
  for (double v : rt.values()) CHECK(v == doctest::Approx(k / 16.0).epsilon(1e-12));
  double expect = 0.5 * (k - k / 16.0) * (k - k / 16.0);
  CHECK(cycle_loss(rt, origin).item() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("joint loss weighting") {
  LossWeights w;
  CHECK(w.lambda1 == 10.0);
  CHECK(w.lambda2 == 5.0);
  auto zero = Tensor<double>::zeros({1, 1, 1, 1});
  CHECK(joint_loss(zero, zero, zero, w).item() == 0.0);
  auto one = Tensor<double>::full({1, 1, 1, 1}, 1.0);
  CHECK(joint_loss(one, one, one, w).item() == doctest::Approx(16.0).epsilon(1e-15));
  LossWeights bad;
  bad.lambda1 = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("every loss in the family is differentiable (FD, double, 1e-6)") {
  for (const auto& r : gradcheck::run_loss_gradchecks(gradcheck::Precision::kDouble)) {
    CAPTURE(r.name);
    CAPTURE(r.max_rel_err);
    CHECK(r.pass);
  }
}
