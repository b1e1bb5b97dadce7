// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Separable fixed linear operators on single image planes (row-major h x w),
// each paired with its exact adjoint so reverse-mode differentiation of the
// fixed resamplers is transpose-exact rather than approximated.
//
// Border handling is reflect-101 (edge sample not repeated) with periodic
// folding, which stays defined for margins >= the image size.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace pansharp {

// Reflect-101 index with periodic folding: ... 2 1 | 0 1 2 3 | 2 1 0 1 ...
inline int reflect101_index(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace planeops {

// y[o] = sum_j taps[j] * x[fold(o + j - c)], o in [0, n); c = k/2. Same-size.
template <typename T>
void line_conv_reflect(const T* x, int n, int xs, const double* taps, int k, T* y, int ys) {
  int c = k / 2;
  for (int o = 0; o < n; ++o) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += taps[j] * static_cast<double>(x[reflect101_index(o + j - c, n) * xs]);
    y[o * ys] = static_cast<T>(acc);
  }
}

template <typename T>
void line_conv_reflect_adjoint(const T* gy, int n, int ys, const double* taps, int k, T* gx, int xs) {
  int c = k / 2;
  for (int o = 0; o < n; ++o) {
    double g = static_cast<double>(gy[o * ys]);
    for (int j = 0; j < k; ++j) gx[reflect101_index(o + j - c, n) * xs] += static_cast<T>(taps[j] * g);
  }
}

// Strided decimating conv: y[i] = sum_j taps[j] * x[fold(f*i + j - c)], i in [0, n/f).
template <typename T>
void line_conv_decimate(const T* x, int n, int xs, const double* taps, int k, int f, T* y, int ys) {
  int c = k / 2;
  int m = n / f;
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += taps[j] * static_cast<double>(x[reflect101_index(f * i + j - c, n) * xs]);
    y[i * ys] = static_cast<T>(acc);
  }
}

template <typename T>
void line_conv_decimate_adjoint(const T* gy, int n, int ys, const double* taps, int k, int f, T* gx, int xs) {
  int c = k / 2;
  int m = n / f;
  for (int i = 0; i < m; ++i) {
    double g = static_cast<double>(gy[i * ys]);
    for (int j = 0; j < k; ++j) gx[reflect101_index(f * i + j - c, n) * xs] += static_cast<T>(taps[j] * g);
  }
}

// Zero-insertion upsample2 followed by same-size conv on the 2n grid.
// y[o] = sum_j taps[j] * z[fold2n(o + j - c)] with z[2i] = x[i], z[odd] = 0.
// Folding preserves index parity, so only even folded positions contribute.
template <typename T>
void line_up2(const T* x, int n, int xs, const double* taps, int k, T* y, int ys) {
  int c = k / 2;
  int n2 = 2 * n;
  for (int o = 0; o < n2; ++o) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
      int q = reflect101_index(o + j - c, n2);
      if ((q & 1) == 0) acc += taps[j] * static_cast<double>(x[(q >> 1) * xs]);
    }
    y[o * ys] = static_cast<T>(acc);
  }
}

template <typename T>
void line_up2_adjoint(const T* gy, int n, int ys, const double* taps, int k, T* gx, int xs) {
  int c = k / 2;
  int n2 = 2 * n;
  for (int o = 0; o < n2; ++o) {
    double g = static_cast<double>(gy[o * ys]);
    for (int j = 0; j < k; ++j) {
      int q = reflect101_index(o + j - c, n2);
      if ((q & 1) == 0) gx[(q >> 1) * xs] += static_cast<T>(taps[j] * g);
    }
  }
}

// Bilinear enlargement by integer factor, align-corners-false, edge clamp.
// src = (o + 0.5)/f - 0.5; y[o] = (1-t)*x[i0] + t*x[i0+1] (clamped).
template <typename T>
void line_bilinear_up(const T* x, int n, int xs, int f, T* y, int ys) {
  for (int o = 0; o < n * f; ++o) {
    double src = (o + 0.5) / f - 0.5;
    int i0 = static_cast<int>(std::floor(src));
    double t = src - i0;
    int a = i0 < 0 ? 0 : (i0 > n - 1 ? n - 1 : i0);
    int b = i0 + 1 < 0 ? 0 : (i0 + 1 > n - 1 ? n - 1 : i0 + 1);
    y[o * ys] = static_cast<T>((1.0 - t) * static_cast<double>(x[a * xs]) + t * static_cast<double>(x[b * xs]));
  }
}

template <typename T>
void line_bilinear_up_adjoint(const T* gy, int n, int ys, int f, T* gx, int xs) {
  for (int o = 0; o < n * f; ++o) {
    double src = (o + 0.5) / f - 0.5;
    int i0 = static_cast<int>(std::floor(src));
    double t = src - i0;
    int a = i0 < 0 ? 0 : (i0 > n - 1 ? n - 1 : i0);
    int b = i0 + 1 < 0 ? 0 : (i0 + 1 > n - 1 ? n - 1 : i0 + 1);
    double g = static_cast<double>(gy[o * ys]);
    gx[a * xs] += static_cast<T>((1.0 - t) * g);
    gx[b * xs] += static_cast<T>(t * g);
  }
}

// ---- Plane wrappers (h x w row-major planes). ----

// Same-size separable conv, reflect-101 borders.
template <typename T>
void plane_sepconv_reflect(const T* x, int h, int w, const double* taps, int k, T* y) {
  std::vector<T> tmp(static_cast<size_t>(h) * w);
  for (int col = 0; col < w; ++col) line_conv_reflect(x + col, h, w, taps, k, tmp.data() + col, w);
  for (int row = 0; row < h; ++row) line_conv_reflect(tmp.data() + row * w, w, 1, taps, k, y + row * w, 1);
}

template <typename T>
void plane_sepconv_reflect_adjoint(const T* gy, int h, int w, const double* taps, int k, T* gx_accum) {
  std::vector<T> tmp(static_cast<size_t>(h) * w, T(0));
  for (int row = 0; row < h; ++row) line_conv_reflect_adjoint(gy + row * w, w, 1, taps, k, tmp.data() + row * w, 1);
  for (int col = 0; col < w; ++col) line_conv_reflect_adjoint(tmp.data() + col, h, w, taps, k, gx_accum + col, w);
}

// Separable conv + decimation by factor f: (h, w) -> (h/f, w/f).
template <typename T>
void plane_conv_decimate(const T* x, int h, int w, const double* taps, int k, int f, T* y) {
  int hh = h / f;
  std::vector<T> tmp(static_cast<size_t>(hh) * w);
  for (int col = 0; col < w; ++col) line_conv_decimate(x + col, h, w, taps, k, f, tmp.data() + col, w);
  for (int row = 0; row < hh; ++row) line_conv_decimate(tmp.data() + row * w, w, 1, taps, k, f, y + row * (w / f), 1);
}

template <typename T>
void plane_conv_decimate_adjoint(const T* gy, int h, int w, const double* taps, int k, int f, T* gx_accum) {
  int hh = h / f, ww = w / f;
  std::vector<T> tmp(static_cast<size_t>(hh) * w, T(0));
  for (int row = 0; row < hh; ++row) line_conv_decimate_adjoint(gy + row * ww, w, 1, taps, k, f, tmp.data() + row * w, 1);
  for (int col = 0; col < w; ++col) line_conv_decimate_adjoint(tmp.data() + col, h, w, taps, k, f, gx_accum + col, w);
}

// Zero-insert upsample by 2 with post-filter: (h, w) -> (2h, 2w).
template <typename T>
void plane_up2(const T* x, int h, int w, const double* taps, int k, T* y) {
  std::vector<T> tmp(static_cast<size_t>(2 * h) * w);
  for (int col = 0; col < w; ++col) line_up2(x + col, h, w, taps, k, tmp.data() + col, w);
  for (int row = 0; row < 2 * h; ++row) line_up2(tmp.data() + row * w, w, 1, taps, k, y + row * 2 * w, 1);
}

template <typename T>
void plane_up2_adjoint(const T* gy, int h, int w, const double* taps, int k, T* gx_accum) {
  std::vector<T> tmp(static_cast<size_t>(2 * h) * w, T(0));
  for (int row = 0; row < 2 * h; ++row) line_up2_adjoint(gy + row * 2 * w, w, 1, taps, k, tmp.data() + row * w, 1);
  for (int col = 0; col < w; ++col) line_up2_adjoint(tmp.data() + col, h, w, taps, k, gx_accum + col, w);
}

template <typename T>
void plane_bilinear_up(const T* x, int h, int w, int f, T* y) {
  std::vector<T> tmp(static_cast<size_t>(h) * f * w);
  for (int col = 0; col < w; ++col) line_bilinear_up(x + col, h, w, f, tmp.data() + col, w);
  for (int row = 0; row < h * f; ++row) line_bilinear_up(tmp.data() + row * w, w, 1, f, y + row * w * f, 1);
}

template <typename T>
void plane_bilinear_up_adjoint(const T* gy, int h, int w, int f, T* gx_accum) {
  std::vector<T> tmp(static_cast<size_t>(h) * f * w, T(0));
  for (int row = 0; row < h * f; ++row) line_bilinear_up_adjoint(gy + row * w * f, w, 1, f, tmp.data() + row * w, 1);
  for (int col = 0; col < w; ++col) line_bilinear_up_adjoint(tmp.data() + col, h, w, f, gx_accum + col, w);
}

// Windowed mean over (2r+1)^2 neighborhoods, reflect-101 borders, same size.
// Summed-area table in double; window sums are O(1) per pixel.
template <typename T>
void plane_box_mean(const T* x, int h, int w, int r, T* y) {
  int hp = h + 2 * r, wp = w + 2 * r;
  std::vector<double> sat(static_cast<size_t>(hp + 1) * (wp + 1), 0.0);
  for (int i = 0; i < hp; ++i) {
    int sy = reflect101_index(i - r, h);
    double rowsum = 0.0;
    for (int j = 0; j < wp; ++j) {
      rowsum += static_cast<double>(x[sy * w + reflect101_index(j - r, w)]);
      sat[(i + 1) * (wp + 1) + (j + 1)] = sat[i * (wp + 1) + (j + 1)] + rowsum;
    }
  }
  int win = 2 * r + 1;
  // True division (not reciprocal) keeps window means exact for dyadic inputs.
  double count = static_cast<double>(win) * win;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double s = sat[(i + win) * (wp + 1) + (j + win)] - sat[i * (wp + 1) + (j + win)] -
                 sat[(i + win) * (wp + 1) + j] + sat[i * (wp + 1) + j];
      y[i * w + j] = static_cast<T>(s / count);
    }
  }
}

// Adjoint of plane_box_mean: fold the padded-window contributions back through
// the reflect map. Direct scatter; bandwidth-bound but exact.
template <typename T>
void plane_box_mean_adjoint(const T* gy, int h, int w, int r, T* gx_accum) {
  int win = 2 * r + 1;
  double count = static_cast<double>(win) * win;
  // grad wrt padded pixel (i,j) of the virtual padded plane is the window-sum
  // of gy over windows covering it; route it to the source pixel.
  for (int i = -r; i < h + r; ++i) {
    int sy = reflect101_index(i, h);
    for (int j = -r; j < w + r; ++j) {
      int sx = reflect101_index(j, w);
      int i0 = i - r < 0 ? 0 : i - r, i1 = i + r > h - 1 ? h - 1 : i + r;
      int j0 = j - r < 0 ? 0 : j - r, j1 = j + r > w - 1 ? w - 1 : j + r;
      double acc = 0.0;
      for (int oy = i0; oy <= i1; ++oy)
        for (int ox = j0; ox <= j1; ++ox) acc += static_cast<double>(gy[oy * w + ox]);
      gx_accum[sy * w + sx] += static_cast<T>(acc / count);
    }
  }
}

}  // namespace planeops
}  // namespace pansharp
