// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Joint compensation loss family: LSGAN adversarial terms over score maps,
// reconstruction and cycle-consistency terms, and their weighted sum. All
// reductions are means over every element, so losses are invariant under
// sample replication within a batch.
#pragma once

#include "pansharp/autodiff.hpp"

namespace pansharp {

// a: value generators want discriminators to believe; b: fake label;
// c: real label.
struct LsganLabels {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
};

struct LossWeights {
  double lambda1 = 10.0;  // cycle
  double lambda2 = 5.0;   // reconstruction

  void validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0) throw std::invalid_argument("loss weights must be nonnegative");
  }
};

// 1/2 * mean((score - a)^2)
template <typename T>
ad::Tensor<T> adv_gen_loss(const ad::Tensor<T>& score, double a) {
  return ad::half_mse_const(score, a);
}

// 1/2 * mean((real - c)^2) + 1/2 * mean((fake - b)^2)
template <typename T>
ad::Tensor<T> disc_loss(const ad::Tensor<T>& real_score, const ad::Tensor<T>& fake_score, double b, double c) {
  return ad::add(ad::half_mse_const(real_score, c), ad::half_mse_const(fake_score, b));
}

// Role-swapped D_C objectives: in the {DMG, D_C} pair the coarse DMG product
// is fake and F_c is real; the {F2C, D_C} pair inverts both labels.
template <typename T>
ad::Tensor<T> dc_dmg_loss(const ad::Tensor<T>& score_fdc, const ad::Tensor<T>& score_fc,
                          const LsganLabels& l) {
  return disc_loss(/*real=*/score_fc, /*fake=*/score_fdc, l.b, l.c);
}

template <typename T>
ad::Tensor<T> dc_f2c_loss(const ad::Tensor<T>& score_fdc, const ad::Tensor<T>& score_fc,
                          const LsganLabels& l) {
  return disc_loss(/*real=*/score_fdc, /*fake=*/score_fc, l.b, l.c);
}

// 1/2 * mean((pred - target)^2)
template <typename T>
ad::Tensor<T> recon_loss(const ad::Tensor<T>& pred, const ad::Tensor<T>& target) {
  return ad::weighted_mse(pred, target, 0.5);
}

// 1/2 * mean((round_trip - origin)^2)
template <typename T>
ad::Tensor<T> cycle_loss(const ad::Tensor<T>& round_trip, const ad::Tensor<T>& origin) {
  return ad::weighted_mse(round_trip, origin, 0.5);
}

// adv + lambda1 * cyc + lambda2 * rec
template <typename T>
ad::Tensor<T> joint_loss(const ad::Tensor<T>& adv, const ad::Tensor<T>& cyc, const ad::Tensor<T>& rec,
                         const LossWeights& w) {
  return ad::add(adv, ad::add(ad::scale(cyc, w.lambda1), ad::scale(rec, w.lambda2)));
}

}  // namespace pansharp
