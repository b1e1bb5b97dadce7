// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/resample.hpp"

#include <cmath>
#include <stdexcept>

#include "pansharp/planeops.hpp"

namespace pansharp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void Kernel::validate() const {
  if (taps.empty() || taps.size() % 2 == 0) throw std::invalid_argument("kernel: taps must have odd length");
  size_t k = taps.size();
  for (size_t i = 0; i < k / 2; ++i) {
    if (taps[i] != taps[k - 1 - i]) throw std::invalid_argument("kernel: taps must be symmetric");
  }
  double s = 0.0;
  for (double t : taps) s += t;
  if (std::abs(s - dc_gain) > 1e-12) throw std::invalid_argument("kernel: taps do not sum to dc_gain");
}

Kernel mtf_gaussian_kernel(double nyquist_gain, int ratio, int size) {
  if (!(nyquist_gain > 0.0 && nyquist_gain < 1.0))
    throw std::invalid_argument("mtf_gaussian_kernel: nyquist gain must lie in (0,1)");
  if (ratio < 1) throw std::invalid_argument("mtf_gaussian_kernel: ratio must be >= 1");
  double sigma = ratio * std::sqrt(-2.0 * std::log(nyquist_gain)) / kPi;
  if (size == 0) {
    size = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
    if (size > 41) size = 41;
  } else {
    if (size % 2 == 0) throw std::invalid_argument("mtf_gaussian_kernel: size must be odd");
    int min_size = static_cast<int>(std::ceil(6.0 * sigma));
    if (min_size % 2 == 0) ++min_size;
    if (size < min_size) throw std::invalid_argument("mtf_gaussian_kernel: size below 6*sigma");
  }
  Kernel k;
  k.taps.resize(static_cast<size_t>(size));
  int c = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    double d = i - c;
    double v = sigma > 0.0 ? std::exp(-d * d / (2.0 * sigma * sigma)) : (d == 0.0 ? 1.0 : 0.0);
    k.taps[static_cast<size_t>(i)] = v;
    sum += v;
  }
  for (double& t : k.taps) t /= sum;
  // Force exact symmetry after the division (guards the validate() contract).
  for (int i = 0; i < c; ++i) k.taps[static_cast<size_t>(size - 1 - i)] = k.taps[static_cast<size_t>(i)];
  k.dc_gain = 0.0;
  for (double t : k.taps) k.dc_gain += t;
  return k;
}

// Ideal half-band low-pass windowed by Hamming, then the odd taps are
// renormalized to sum exactly 1 so a constant image stays constant. Center
// tap is w(0)*1 = 1, even offsets are zero (half-band), dc gain 2.
Kernel exp_halfband_kernel() {
  constexpr int kHalf = 11;  // 23 taps
  Kernel k;
  k.taps.assign(2 * kHalf + 1, 0.0);
  double odd_sum = 0.0;
  for (int n = -kHalf; n <= kHalf; ++n) {
    double ideal;
    if (n == 0) {
      ideal = 1.0;
    } else if (n % 2 == 0) {
      ideal = 0.0;
    } else {
      ideal = 2.0 * std::sin(kPi * n / 2.0) / (kPi * n);
    }
    double window = 0.54 + 0.46 * std::cos(kPi * n / kHalf);
    double v = ideal * window;
    k.taps[static_cast<size_t>(n + kHalf)] = v;
    if (n % 2 != 0) odd_sum += v;
  }
  for (int n = -kHalf; n <= kHalf; ++n) {
    if (n % 2 != 0) k.taps[static_cast<size_t>(n + kHalf)] /= odd_sum;
  }
  // Symmetrize bit-exactly.
  for (int i = 0; i < kHalf; ++i) k.taps[static_cast<size_t>(2 * kHalf - i)] = k.taps[static_cast<size_t>(i)];
  k.dc_gain = 2.0;
  return k;
}

Kernel binomial5_kernel() {
  Kernel k;
  k.taps = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  k.dc_gain = 1.0;
  return k;
}

Raster blur_decimate(const Raster& img, const Kernel& kernel, int factor) {
  kernel.validate();
  if (factor < 1) throw std::invalid_argument("blur_decimate: factor must be >= 1");
  if (img.height % factor != 0 || img.width % factor != 0)
    throw std::invalid_argument("blur_decimate: dimensions not divisible by factor");
  Raster out(img.height / factor, img.width / factor, img.bands);
  for (int b = 0; b < img.bands; ++b) {
    planeops::plane_conv_decimate(img.band_ptr(b), img.height, img.width, kernel.taps.data(),
                                  static_cast<int>(kernel.taps.size()), factor, out.band_ptr(b));
  }
  return out;
}

Raster exp_upsample(const Raster& ms, int factor) {
  if (factor != 2 && factor != 4) throw std::invalid_argument("exp_upsample: factor must be 2 or 4");
  Kernel k = exp_halfband_kernel();
  Raster cur = ms;
  for (int f = factor; f > 1; f /= 2) {
    Raster next(cur.height * 2, cur.width * 2, cur.bands);
    for (int b = 0; b < cur.bands; ++b) {
      planeops::plane_up2(cur.band_ptr(b), cur.height, cur.width, k.taps.data(),
                          static_cast<int>(k.taps.size()), next.band_ptr(b));
    }
    cur = std::move(next);
  }
  return cur;
}

Raster pyr_u2(const Raster& img) {
  Kernel k = binomial5_kernel();
  // Gain 2 per axis on the zero-stuffed grid.
  std::vector<double> taps8(k.taps);
  for (double& t : taps8) t *= 2.0;
  Raster out(img.height * 2, img.width * 2, img.bands);
  for (int b = 0; b < img.bands; ++b)
    planeops::plane_up2(img.band_ptr(b), img.height, img.width, taps8.data(), 5, out.band_ptr(b));
  return out;
}

Raster pyr_d2(const Raster& img) {
  if (img.height % 2 != 0 || img.width % 2 != 0)
    throw std::invalid_argument("pyr_d2: dimensions must be even");
  Kernel k = binomial5_kernel();
  Raster out(img.height / 2, img.width / 2, img.bands);
  for (int b = 0; b < img.bands; ++b)
    planeops::plane_conv_decimate(img.band_ptr(b), img.height, img.width, k.taps.data(), 5, 2, out.band_ptr(b));
  return out;
}

Raster bilinear_up(const Raster& img, int factor) {
  if (factor < 2) throw std::invalid_argument("bilinear_up: factor must be >= 2");
  Raster out(img.height * factor, img.width * factor, img.bands);
  for (int b = 0; b < img.bands; ++b)
    planeops::plane_bilinear_up(img.band_ptr(b), img.height, img.width, factor, out.band_ptr(b));
  return out;
}

Sample wald_degrade(const Sample& full, const WaldGains& gains) {
  full.validate("wald_degrade input");
  if (full.reference) throw std::invalid_argument("wald_degrade: input already carries a reference");
  int r = full.ratio;
  if (full.pan.height % r != 0 || full.ms.height % r != 0)
    throw std::invalid_argument("wald_degrade: dimensions not divisible by ratio");
  if (!gains.ms_per_band.empty() && gains.ms_per_band.size() != static_cast<size_t>(full.ms.bands))
    throw std::invalid_argument("wald_degrade: ms_per_band gain count does not match band count");
  Kernel pan_kernel = mtf_gaussian_kernel(gains.pan, r);
  Sample out;
  out.ratio = r;
  out.pan = blur_decimate(full.pan, pan_kernel, r);
  out.ms = Raster(full.ms.height / r, full.ms.width / r, full.ms.bands);
  for (int b = 0; b < full.ms.bands; ++b) {
    double g = gains.ms_per_band.empty() ? gains.ms : gains.ms_per_band[static_cast<size_t>(b)];
    Kernel kb = mtf_gaussian_kernel(g, r);
    planeops::plane_conv_decimate(full.ms.band_ptr(b), full.ms.height, full.ms.width, kb.taps.data(),
                                  static_cast<int>(kb.taps.size()), r, out.ms.band_ptr(b));
  }
  out.reference = full.ms;
  out.validate("wald_degrade output");
  return out;
}

}  // namespace pansharp
