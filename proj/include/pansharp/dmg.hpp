// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Deep multiscale guidance fusion: ridge-regression guided-filter
// coefficients from windowed moments, coefficient averaging and upsampling,
// and the supervised fusion loss. Everything is differentiable w.r.t. the
// guide (and through it the feature net); the MS raster enters as a constant.
#pragma once

#include "pansharp/errors.hpp"
#include "pansharp/nets.hpp"
#include "pansharp/resample.hpp"

namespace pansharp {

template <typename T>
struct GuidedCoeffs {
  // Per-pixel ridge solutions before window averaging (the closed form that
  // oracle tests solve independently)...
  Tensor<T> m_raw, n_raw;
  // ...their window means (one value per pixel, averaged over all covering
  // windows), still at the coarse m x m scale...
  Tensor<T> m_l, n_l;
  // ...and the bilinearly upsampled M x M coefficient fields.
  Tensor<T> m_h, n_h;
  int radius = 2;
  double lambda = 1e-4;
};

// Closed-form per-window ridge regression between guide channel j and MS band
// j over (2*radius+1)^2 windows:
//   m = (mean(g*x) - mean(g)*mean(x)) / (var(g) + lambda)
//   n = mean(x) - m * mean(g)
// followed by window-averaging of both coefficient maps and bilinear
// upsampling by `ratio`.
template <typename T>
GuidedCoeffs<T> guided_coeffs(const Tensor<T>& guide, const Tensor<T>& ms, int radius, double lambda,
                              int ratio) {
  ad::check_same_shape(guide, ms, "guided_coeffs");
  if (lambda < 0.0) throw std::invalid_argument("guided_coeffs: lambda must be >= 0");
  GuidedCoeffs<T> gc;
  gc.radius = radius;
  gc.lambda = lambda;
  Tensor<T> mean_g = ad::box_mean_t(guide, radius);
  Tensor<T> mean_x = ad::box_mean_t(ms, radius);
  Tensor<T> mean_gx = ad::box_mean_t(ad::mul(guide, ms), radius);
  Tensor<T> mean_gg = ad::box_mean_t(ad::mul(guide, guide), radius);
  Tensor<T> var_g = ad::sub(mean_gg, ad::mul(mean_g, mean_g));
  Tensor<T> denom = ad::add_scalar(var_g, lambda);
  for (T d : denom.values()) {
    if (!(static_cast<double>(d) > 0.0))
      throw numeric_error("guided_coeffs: singular window (sigma^2 + lambda <= 0)");
  }
  gc.m_raw = ad::div(ad::sub(mean_gx, ad::mul(mean_g, mean_x)), denom);
  gc.n_raw = ad::sub(mean_x, ad::mul(gc.m_raw, mean_g));
  gc.m_l = ad::box_mean_t(gc.m_raw, radius);
  gc.n_l = ad::box_mean_t(gc.n_raw, radius);
  gc.m_h = ad::bilinear_up_t(gc.m_l, ratio);
  gc.n_h = ad::bilinear_up_t(gc.n_l, ratio);
  return gc;
}

// Element-wise fusion: F_d = m_h (x) feat + n_h.
template <typename T>
Tensor<T> dmg_combine(const Tensor<T>& m_h, const Tensor<T>& feat, const Tensor<T>& n_h) {
  return ad::add(ad::mul(m_h, feat), n_h);
}

template <typename T>
struct DmgFusion {
  Tensor<T> fused;  // (N, b, M, M)
  GuidedCoeffs<T> coeffs;
};

// Full DMG forward for a batch: the PAN tensor is downsampled with the PAN
// MTF kernel (a fixed input transform; no gradient path), both resolutions go
// through the shared feature net, coefficients come from the coarse pair, and
// the fusion applies the upsampled coefficients to the fine features.
template <typename T>
DmgFusion<T> dmg_fuse(const DmgNet<T>& net, const Tensor<T>& pan, const Tensor<T>& ms, int radius,
                      double lambda, int ratio, const Kernel& pan_mtf) {
  const ad::Shape sp = pan.shape();
  const ad::Shape sm = ms.shape();
  if (sp.c != 1) throw std::invalid_argument("dmg_fuse: pan must be 1-channel");
  if (sp.h != ratio * sm.h || sp.w != ratio * sm.w)
    throw std::invalid_argument("dmg_fuse: size contract M = r*m violated");
  // I1^l = d_r(I1): constant w.r.t. parameters, computed outside the graph.
  ad::Shape sl{sp.n, 1, sp.h / ratio, sp.w / ratio};
  std::vector<T> low(static_cast<size_t>(sl.numel()));
  for (int n = 0; n < sp.n; ++n) {
    planeops::plane_conv_decimate(pan.values().data() + static_cast<int64_t>(n) * sp.plane(), sp.h, sp.w,
                                  pan_mtf.taps.data(), static_cast<int>(pan_mtf.taps.size()), ratio,
                                  low.data() + static_cast<int64_t>(n) * sl.plane());
  }
  Tensor<T> pan_low = Tensor<T>::from_values(sl, std::move(low));

  DmgFusion<T> out;
  Tensor<T> guide_low = net.forward(pan_low);
  Tensor<T> feat_high = net.forward(pan);
  out.coeffs = guided_coeffs(guide_low, ms, radius, lambda, ratio);
  out.fused = dmg_combine(out.coeffs.m_h, feat_high, out.coeffs.n_h);
  return out;
}

// L_DMG: mean squared error between the pre-fused image and the reference
// (mean over samples, bands and pixels).
template <typename T>
Tensor<T> dmg_loss(const Tensor<T>& fused, const Tensor<T>& reference) {
  return ad::mse_mean(fused, reference);
}

}  // namespace pansharp
