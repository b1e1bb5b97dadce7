// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Fixed (non-learned) resampling: MTF-matched Gaussian blur + decimation,
// EXP interpolation, the pyramid operators u2/d2, differentiable bilinear
// upsampling, and the Wald-protocol degradation pipeline.
#pragma once

#include <vector>

#include "pansharp/raster.hpp"

namespace pansharp {

// Odd-length symmetric separable filter taps.
struct Kernel {
  std::vector<double> taps;
  double dc_gain = 1.0;

  int radius() const { return static_cast<int>(taps.size() / 2); }
  void validate() const;  // odd length, symmetric, taps sum to dc_gain
};

// Separable Gaussian whose continuous frequency response at the
// post-decimation Nyquist frequency equals nyquist_gain:
//   sigma = ratio * sqrt(-2 ln(nyquist_gain)) / pi.
// Taps normalized to dc_gain = 1. size 0 selects 2*ceil(3*sigma)+1 capped
// at 41; an explicit size must be odd and >= 6*sigma rounded up to odd.
Kernel mtf_gaussian_kernel(double nyquist_gain, int ratio, int size = 0);

// 23-tap symmetric half-band interpolator (Hamming-windowed ideal low-pass),
// per-stage gain 2 per axis. Even-offset taps are zero and the center tap is
// exactly 1, so original samples pass through unchanged. Tap values are
// printed by the CLI's --dump-kernels.
Kernel exp_halfband_kernel();

// 5-tap binomial [1,4,6,4,1]/16 used by the pyramid operators.
Kernel binomial5_kernel();

// Convolve (reflect-101 borders) with a separable kernel, then keep every
// factor-th sample per axis. Dimensions must be divisible by factor.
Raster blur_decimate(const Raster& img, const Kernel& kernel, int factor);

// EXP interpolation: per x2 stage, zero-insertion followed by the 23-tap
// half-band filter. factor must be 2 or 4.
Raster exp_upsample(const Raster& ms, int factor);

// Pyramid operators: u2 smooths-and-expands jxj -> 2jx2j, d2 blurs-and-
// decimates jxj -> j/2xj/2 (even dimensions required).
Raster pyr_u2(const Raster& img);
Raster pyr_d2(const Raster& img);

// Align-corners-false bilinear enlargement by an integer factor >= 2.
Raster bilinear_up(const Raster& img, int factor);

// MTF Nyquist gains for the Wald degradation. ms applies to every band
// unless ms_per_band is non-empty (then it must have one entry per band).
struct WaldGains {
  double pan = 0.15;
  double ms = 0.30;
  std::vector<double> ms_per_band;
};

// Wald's protocol: MTF-blur and decimate PAN and each MS band by the sample's
// ratio; the original MS becomes the reference. full.reference must be absent
// and dimensions divisible by the ratio.
Sample wald_degrade(const Sample& full, const WaldGains& gains = {});

}  // namespace pansharp
