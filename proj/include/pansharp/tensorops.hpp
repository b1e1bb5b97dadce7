// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Structured tensor ops on the autodiff engine: reflection/zero padding,
// im2col + GEMM convolution (stride, dilation), transposed convolution as the
// exact adjoint of the zero-padded stride-2 conv, windowed box means, the
// pyramid operators u2/d2 and bilinear upsampling (all with exact adjoints),
// plus Raster bridges.
//
// Work is split into fixed contiguous chunks per worker (see threading.hpp);
// weight-gradient reductions run per-thread scratch buffers reduced in thread
// order, so results are bitwise stable for a fixed thread count.
#pragma once

#include <Eigen/Core>

#include "pansharp/autodiff.hpp"
#include "pansharp/planeops.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/resample.hpp"
#include "pansharp/threading.hpp"

namespace pansharp::ad {

enum class PadMode { kReflect, kZero };

// ---- Padding ----

// Asymmetric 2-D padding. Reflect mode is reflect-101 with periodic folding,
// defined for any margin.
template <typename T>
Tensor<T> pad2d(const Tensor<T>& x, int top, int bottom, int left, int right, PadMode mode) {
  const Shape s = x.shape();
  Shape so{s.n, s.c, s.h + top + bottom, s.w + left + right};
  std::vector<T> v(static_cast<size_t>(so.numel()), T(0));
  const T* xv = x.values().data();
  T* ov = v.data();
  int64_t planes = static_cast<int64_t>(s.n) * s.c;
  parallel_for(planes, [&](int64_t pl) {
    const T* src = xv + pl * s.plane();
    T* dst = ov + pl * so.plane();
    for (int y = 0; y < so.h; ++y) {
      int sy = y - top;
      if (mode == PadMode::kReflect) sy = reflect101_index(sy, s.h);
      for (int xcol = 0; xcol < so.w; ++xcol) {
        int sx = xcol - left;
        if (mode == PadMode::kReflect) sx = reflect101_index(sx, s.w);
        bool inside = sy >= 0 && sy < s.h && sx >= 0 && sx < s.w;
        dst[y * so.w + xcol] = inside ? src[sy * s.w + sx] : T(0);
      }
    }
  });
  auto xn = x.node();
  return make_op<T>(so, std::move(v), {x}, [xn, s, so, top, left, mode](Node<T>& self) {
    xn->ensure_grad();
    int64_t planes = static_cast<int64_t>(s.n) * s.c;
    parallel_for(planes, [&](int64_t pl) {
      const T* g = self.g.data() + pl * so.plane();
      T* gx = xn->g.data() + pl * s.plane();
      for (int y = 0; y < so.h; ++y) {
        int sy = y - top;
        if (mode == PadMode::kReflect) sy = reflect101_index(sy, s.h);
        if (sy < 0 || sy >= s.h) continue;
        for (int xcol = 0; xcol < so.w; ++xcol) {
          int sx = xcol - left;
          if (mode == PadMode::kReflect) sx = reflect101_index(sx, s.w);
          if (sx < 0 || sx >= s.w) continue;
          gx[sy * s.w + sx] += g[y * so.w + xcol];
        }
      }
    });
  });
}

// ---- Convolution ----

namespace detail {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

struct ConvGeom {
  int c, h, w;       // input sample dims
  int oc, kh, kw;    // filter dims
  int stride, dil;
  int oh, ow;        // output dims

  int64_t patch() const { return static_cast<int64_t>(c) * kh * kw; }
  int64_t opix() const { return static_cast<int64_t>(oh) * ow; }
};

inline ConvGeom conv_geom_valid(int c, int h, int w, int oc, int kh, int kw, int stride, int dil) {
  ConvGeom g{c, h, w, oc, kh, kw, stride, dil, 0, 0};
  int eh = dil * (kh - 1) + 1;
  int ew = dil * (kw - 1) + 1;
  if (h < eh || w < ew) throw std::invalid_argument("conv: input smaller than dilated kernel");
  g.oh = (h - eh) / stride + 1;
  g.ow = (w - ew) / stride + 1;
  return g;
}

template <typename T>
void im2col(const T* x, const ConvGeom& g, int64_t p0, int64_t p1, Mat<T>& col) {
  for (int64_t p = p0; p < p1; ++p) {
    int oy = static_cast<int>(p / g.ow);
    int ox = static_cast<int>(p % g.ow);
    T* dst = col.data() + (p - p0) * g.patch();
    for (int ic = 0; ic < g.c; ++ic) {
      const T* plane = x + static_cast<int64_t>(ic) * g.h * g.w;
      for (int ky = 0; ky < g.kh; ++ky) {
        const T* row = plane + static_cast<int64_t>(oy * g.stride + ky * g.dil) * g.w + ox * g.stride;
        for (int kx = 0; kx < g.kw; ++kx) *dst++ = row[kx * g.dil];
      }
    }
  }
}

template <typename T>
void col2im_accum(const Mat<T>& col, const ConvGeom& g, int64_t p0, int64_t p1, T* gx) {
  for (int64_t p = p0; p < p1; ++p) {
    int oy = static_cast<int>(p / g.ow);
    int ox = static_cast<int>(p % g.ow);
    const T* src = col.data() + (p - p0) * g.patch();
    for (int ic = 0; ic < g.c; ++ic) {
      T* plane = gx + static_cast<int64_t>(ic) * g.h * g.w;
      for (int ky = 0; ky < g.kh; ++ky) {
        T* row = plane + static_cast<int64_t>(oy * g.stride + ky * g.dil) * g.w + ox * g.stride;
        for (int kx = 0; kx < g.kw; ++kx) row[kx * g.dil] += *src++;
      }
    }
  }
}

// Owned, aligned copy of the weight matrix (oc x K); row-major source.
template <typename T>
Mat<T> weight_matrix(const std::vector<T>& w, int oc, int64_t patch) {
  Mat<T> m(oc, patch);
  for (int r = 0; r < oc; ++r)
    for (int64_t k = 0; k < patch; ++k) m(r, k) = w[r * patch + k];
  return m;
}

// Valid conv forward on one sample pixel range: y = W * col(x) + b.
template <typename T>
void conv_forward_range(const T* x, const Mat<T>& wm, const T* bias, const ConvGeom& g, int64_t p0,
                        int64_t p1, T* y) {
  Mat<T> col(g.patch(), p1 - p0);
  im2col(x, g, p0, p1, col);
  Mat<T> out = wm * col;
  for (int64_t p = p0; p < p1; ++p) {
    for (int oc = 0; oc < g.oc; ++oc) {
      T v = out(oc, p - p0);
      if (bias) v += bias[oc];
      y[static_cast<int64_t>(oc) * g.opix() + p] = v;
    }
  }
}

// Splits batch x pixel work into chunks; fn(sample, p0, p1, chunk_slot).
inline void for_conv_chunks(int n, int64_t opix, const std::function<void(int, int64_t, int64_t, int)>& fn) {
  int threads = ThreadPool::instance().threads();
  int per_sample = n >= threads ? 1 : (threads + n - 1) / n;
  int64_t items = static_cast<int64_t>(n) * per_sample;
  ThreadPool::instance().run_chunks(items, [&](int64_t b, int64_t e, int slot) {
    for (int64_t it = b; it < e; ++it) {
      int sample = static_cast<int>(it / per_sample);
      int piece = static_cast<int>(it % per_sample);
      int64_t p0 = opix * piece / per_sample;
      int64_t p1 = opix * (piece + 1) / per_sample;
      if (p0 < p1) fn(sample, p0, p1, slot);
    }
  });
}

}  // namespace detail

// Valid cross-correlation with stride/dilation on a pre-padded input.
// x: (N, C, H, W); w: (OC, C, KH, KW); bias: (1, OC, 1, 1) or undefined.
template <typename T>
Tensor<T> conv2d_valid(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride,
                       int dilation) {
  const Shape sx = x.shape();
  const Shape sw = w.shape();
  if (sw.c != sx.c)
    throw std::invalid_argument("conv2d: channel mismatch, input " + sx.str() + " weight " + sw.str());
  if (bias.defined() && (bias.shape().c != sw.n || bias.shape().numel() != sw.n))
    throw std::invalid_argument("conv2d: bias shape mismatch");
  auto g = detail::conv_geom_valid(sx.c, sx.h, sx.w, sw.n, sw.h, sw.w, stride, dilation);
  Shape so{sx.n, g.oc, g.oh, g.ow};
  std::vector<T> out(static_cast<size_t>(so.numel()));

  detail::Mat<T> wm = detail::weight_matrix(w.values(), g.oc, g.patch());
  const T* bptr = bias.defined() ? bias.values().data() : nullptr;
  const T* xv = x.values().data();
  T* ov = out.data();
  detail::for_conv_chunks(sx.n, g.opix(), [&](int s, int64_t p0, int64_t p1, int) {
    detail::conv_forward_range(xv + static_cast<int64_t>(s) * sx.c * sx.plane(), wm, bptr, g, p0, p1,
                               ov + static_cast<int64_t>(s) * so.c * so.plane());
  });

  auto xn = x.node();
  auto wn = w.node();
  auto bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Tensor<T>> parents = {x, w};
  if (bias.defined()) parents.push_back(bias);
  return make_op<T>(so, std::move(out), parents, [xn, wn, bn, g, sx, so](Node<T>& self) {
    int threads = ThreadPool::instance().threads();
    detail::Mat<T> wm = detail::weight_matrix(wn->v, g.oc, g.patch());
    detail::Mat<T> wmt = wm.transpose();

    // Per-sample copies of the output gradient as (oc x P) matrices are read
    // twice (dX and dW); rebuild them on the fly per sample.
    auto gy_matrix = [&](int s) {
      detail::Mat<T> gy(g.oc, g.opix());
      const T* base = self.g.data() + static_cast<int64_t>(s) * so.c * so.plane();
      for (int oc = 0; oc < g.oc; ++oc)
        for (int64_t p = 0; p < g.opix(); ++p) gy(oc, p) = base[static_cast<int64_t>(oc) * g.opix() + p];
      return gy;
    };

    if (xn->requires_grad) {
      xn->ensure_grad();
      // Sample-parallel only: col2im scatters overlap within a sample.
      parallel_for(sx.n, [&](int64_t s) {
        detail::Mat<T> gy = gy_matrix(static_cast<int>(s));
        detail::Mat<T> colg = wmt * gy;
        detail::col2im_accum(colg, g, 0, g.opix(), xn->g.data() + s * sx.c * sx.plane());
      });
    }
    if (wn->requires_grad || (bn && bn->requires_grad)) {
      std::vector<detail::Mat<T>> dw_slots(static_cast<size_t>(threads));
      std::vector<std::vector<T>> db_slots(static_cast<size_t>(threads));
      ThreadPool::instance().run_chunks(sx.n, [&](int64_t b, int64_t e, int slot) {
        auto& dw = dw_slots[static_cast<size_t>(slot)];
        auto& db = db_slots[static_cast<size_t>(slot)];
        dw.setZero(g.oc, g.patch());
        db.assign(static_cast<size_t>(g.oc), T(0));
        detail::Mat<T> col(g.patch(), g.opix());
        for (int64_t s = b; s < e; ++s) {
          detail::Mat<T> gy = gy_matrix(static_cast<int>(s));
          detail::im2col(xn->v.data() + s * sx.c * sx.plane(), g, 0, g.opix(), col);
          dw.noalias() += gy * col.transpose();
          for (int oc = 0; oc < g.oc; ++oc) {
            T acc = T(0);
            for (int64_t p = 0; p < g.opix(); ++p) acc += gy(oc, p);
            db[static_cast<size_t>(oc)] += acc;
          }
        }
      });
      if (wn->requires_grad) {
        wn->ensure_grad();
        for (int slot = 0; slot < threads; ++slot) {
          if (dw_slots[static_cast<size_t>(slot)].size() == 0) continue;
          const auto& dw = dw_slots[static_cast<size_t>(slot)];
          for (int oc = 0; oc < g.oc; ++oc)
            for (int64_t k = 0; k < g.patch(); ++k) wn->g[oc * g.patch() + k] += dw(oc, k);
        }
      }
      if (bn && bn->requires_grad) {
        bn->ensure_grad();
        for (int slot = 0; slot < threads; ++slot) {
          if (db_slots[static_cast<size_t>(slot)].empty()) continue;
          for (int oc = 0; oc < g.oc; ++oc) bn->g[oc] += db_slots[static_cast<size_t>(slot)][oc];
        }
      }
    }
  });
}

// SAME-padded conv: output spatial size = ceil(input/stride). Stride-2 with a
// 3x3 kernel pads (0,1) per axis (the TF convention the architecture tables
// assume); stride-1 pads symmetrically by dilation*(k-1)/2.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride = 1,
                 int dilation = 1, PadMode pad = PadMode::kReflect) {
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  const Shape sx = x.shape();
  const Shape sw = w.shape();
  int oh = (sx.h + stride - 1) / stride;
  int ow = (sx.w + stride - 1) / stride;
  int pad_h = std::max(0, (oh - 1) * stride + dilation * (sw.h - 1) + 1 - sx.h);
  int pad_w = std::max(0, (ow - 1) * stride + dilation * (sw.w - 1) + 1 - sx.w);
  Tensor<T> xin = x;
  if (pad_h > 0 || pad_w > 0)
    xin = pad2d(x, pad_h / 2, pad_h - pad_h / 2, pad_w / 2, pad_w - pad_w / 2, pad);
  return conv2d_valid(xin, w, bias, stride, dilation);
}

// Transposed convolution doubling the spatial dims; exact adjoint of the
// zero-padded SAME stride-2 conv2d sharing the same weights.
// x: (N, C, H, W); w: (C, OC, 3, 3); bias: (1, OC, 1, 1) or undefined.
template <typename T>
Tensor<T> deconv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  const Shape sx = x.shape();
  const Shape sw = w.shape();
  if (sw.n != sx.c)
    throw std::invalid_argument("deconv2d: channel mismatch, input " + sx.str() + " weight " + sw.str());
  if (sw.h != 3 || sw.w != 3) throw std::invalid_argument("deconv2d: kernel must be 3x3");
  int oc = sw.c;
  if (bias.defined() && (bias.shape().c != oc || bias.shape().numel() != oc))
    throw std::invalid_argument("deconv2d: bias shape mismatch");
  Shape so{sx.n, oc, 2 * sx.h, 2 * sx.w};
  // Geometry of the adjoint conv: maps (2H+1, 2W+1) zero-padded grid -> (H, W).
  auto g = detail::conv_geom_valid(oc, 2 * sx.h + 1, 2 * sx.w + 1, sx.c, 3, 3, 2, 1);

  detail::Mat<T> wm = detail::weight_matrix(w.values(), sx.c, g.patch());
  detail::Mat<T> wmt = wm.transpose();
  std::vector<T> out(static_cast<size_t>(so.numel()), T(0));
  const T* bptr = bias.defined() ? bias.values().data() : nullptr;
  const T* xv = x.values().data();
  T* ov = out.data();
  parallel_for(sx.n, [&](int64_t s) {
    detail::Mat<T> xs(sx.c, sx.plane());
    const T* base = xv + s * sx.c * sx.plane();
    for (int ic = 0; ic < sx.c; ++ic)
      for (int64_t p = 0; p < sx.plane(); ++p) xs(ic, p) = base[static_cast<int64_t>(ic) * sx.plane() + p];
    detail::Mat<T> colx = wmt * xs;  // (oc*9) x P_in
    // Scatter onto the (2H+1, 2W+1) padded grid, dropping the pad row/col.
    T* dst = ov + s * so.c * so.plane();
    for (int64_t p = 0; p < sx.plane(); ++p) {
      int iy = static_cast<int>(p / sx.w), ix = static_cast<int>(p % sx.w);
      const T* src = colx.data() + p * g.patch();
      for (int c = 0; c < oc; ++c) {
        for (int ky = 0; ky < 3; ++ky) {
          int ty = 2 * iy + ky;
          if (ty >= so.h) { src += 3; continue; }
          for (int kx = 0; kx < 3; ++kx) {
            int tx = 2 * ix + kx;
            if (tx < so.w) dst[(static_cast<int64_t>(c) * so.h + ty) * so.w + tx] += src[kx];
          }
          src += 3;
        }
      }
    }
    if (bptr) {
      for (int c = 0; c < oc; ++c) {
        T* plane = dst + static_cast<int64_t>(c) * so.plane();
        for (int64_t p = 0; p < so.plane(); ++p) plane[p] += bptr[c];
      }
    }
  });

  auto xn = x.node();
  auto wn = w.node();
  auto bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Tensor<T>> parents = {x, w};
  if (bias.defined()) parents.push_back(bias);
  return make_op<T>(so, std::move(out), parents, [xn, wn, bn, g, sx, so, oc](Node<T>& self) {
    int threads = ThreadPool::instance().threads();
    detail::Mat<T> wm = detail::weight_matrix(wn->v, sx.c, g.patch());
    // Zero-pad the output gradient to the (2H+1, 2W+1) grid per sample, then
    // the same im2col machinery as the paired conv.
    auto padded_gout = [&](int s, std::vector<T>& buf) {
      buf.assign(static_cast<size_t>(oc) * g.h * g.w, T(0));
      const T* src = self.g.data() + static_cast<int64_t>(s) * so.c * so.plane();
      for (int c = 0; c < oc; ++c)
        for (int y = 0; y < so.h; ++y)
          for (int x2 = 0; x2 < so.w; ++x2)
            buf[(static_cast<int64_t>(c) * g.h + y) * g.w + x2] =
                src[(static_cast<int64_t>(c) * so.h + y) * so.w + x2];
    };
    if (xn->requires_grad) {
      xn->ensure_grad();
      parallel_for(sx.n, [&](int64_t s) {
        std::vector<T> buf;
        padded_gout(static_cast<int>(s), buf);
        detail::Mat<T> col(g.patch(), g.opix());
        detail::im2col(buf.data(), g, 0, g.opix(), col);
        detail::Mat<T> gx = wm * col;  // (C x P_in)
        T* dst = xn->g.data() + s * sx.c * sx.plane();
        for (int ic = 0; ic < sx.c; ++ic)
          for (int64_t p = 0; p < sx.plane(); ++p) dst[static_cast<int64_t>(ic) * sx.plane() + p] += gx(ic, p);
      });
    }
    if (wn->requires_grad || (bn && bn->requires_grad)) {
      std::vector<detail::Mat<T>> dw_slots(static_cast<size_t>(threads));
      std::vector<std::vector<T>> db_slots(static_cast<size_t>(threads));
      ThreadPool::instance().run_chunks(sx.n, [&](int64_t b, int64_t e, int slot) {
        auto& dw = dw_slots[static_cast<size_t>(slot)];
        auto& db = db_slots[static_cast<size_t>(slot)];
        dw.setZero(sx.c, g.patch());
        db.assign(static_cast<size_t>(oc), T(0));
        std::vector<T> buf;
        detail::Mat<T> col(g.patch(), g.opix());
        for (int64_t s = b; s < e; ++s) {
          padded_gout(static_cast<int>(s), buf);
          detail::im2col(buf.data(), g, 0, g.opix(), col);
          detail::Mat<T> xs(sx.c, sx.plane());
          const T* base = xn->v.data() + s * sx.c * sx.plane();
          for (int ic = 0; ic < sx.c; ++ic)
            for (int64_t p = 0; p < sx.plane(); ++p)
              xs(ic, p) = base[static_cast<int64_t>(ic) * sx.plane() + p];
          dw.noalias() += xs * col.transpose();
          const T* gsrc = self.g.data() + s * so.c * so.plane();
          for (int c = 0; c < oc; ++c) {
            T acc = T(0);
            for (int64_t p = 0; p < so.plane(); ++p) acc += gsrc[static_cast<int64_t>(c) * so.plane() + p];
            db[static_cast<size_t>(c)] += acc;
          }
        }
      });
      if (wn->requires_grad) {
        wn->ensure_grad();
        for (int slot = 0; slot < threads; ++slot) {
          if (dw_slots[static_cast<size_t>(slot)].size() == 0) continue;
          const auto& dw = dw_slots[static_cast<size_t>(slot)];
          for (int ic = 0; ic < sx.c; ++ic)
            for (int64_t k = 0; k < g.patch(); ++k) wn->g[ic * g.patch() + k] += dw(ic, k);
        }
      }
      if (bn && bn->requires_grad) {
        bn->ensure_grad();
        for (int slot = 0; slot < threads; ++slot) {
          if (db_slots[static_cast<size_t>(slot)].empty()) continue;
          for (int c = 0; c < oc; ++c) bn->g[c] += db_slots[static_cast<size_t>(slot)][c];
        }
      }
    }
  });
}

// ---- Fixed linear image ops (exact adjoints) ----

namespace detail {

template <typename T, typename Fwd, typename Adj>
Tensor<T> plane_linear_op(const Tensor<T>& x, int oh, int ow, Fwd fwd, Adj adj) {
  const Shape s = x.shape();
  Shape so{s.n, s.c, oh, ow};
  std::vector<T> v(static_cast<size_t>(so.numel()));
  int64_t planes = static_cast<int64_t>(s.n) * s.c;
  const T* xv = x.values().data();
  T* ov = v.data();
  parallel_for(planes, [&](int64_t pl) { fwd(xv + pl * s.plane(), ov + pl * so.plane()); });
  auto xn = x.node();
  return make_op<T>(so, std::move(v), {x}, [xn, s, so, adj](Node<T>& self) {
    xn->ensure_grad();
    int64_t planes = static_cast<int64_t>(s.n) * s.c;
    parallel_for(planes, [&](int64_t pl) {
      adj(self.g.data() + pl * so.plane(), xn->g.data() + pl * s.plane());
    });
  });
}

inline const std::vector<double>& binomial16() {
  static const std::vector<double> taps = binomial5_kernel().taps;
  return taps;
}

inline const std::vector<double>& binomial8() {
  static const std::vector<double> taps = [] {
    std::vector<double> t = binomial5_kernel().taps;
    for (double& v : t) v *= 2.0;
    return t;
  }();
  return taps;
}

}  // namespace detail

// Windowed mean over (2r+1)^2 windows, reflect-101 borders.
template <typename T>
Tensor<T> box_mean_t(const Tensor<T>& x, int radius) {
  if (radius < 1) throw std::invalid_argument("box_mean: radius must be >= 1");
  const Shape s = x.shape();
  return detail::plane_linear_op(
      x, s.h, s.w,
      [=](const T* in, T* out) { planeops::plane_box_mean(in, s.h, s.w, radius, out); },
      [=](const T* g, T* gx) { planeops::plane_box_mean_adjoint(g, s.h, s.w, radius, gx); });
}

// Pyramid expand: zero-insert then binomial filter with gain 2 per axis.
template <typename T>
Tensor<T> pyr_u2_t(const Tensor<T>& x) {
  const Shape s = x.shape();
  const auto& taps = detail::binomial8();
  return detail::plane_linear_op(
      x, 2 * s.h, 2 * s.w,
      [=, &taps](const T* in, T* out) { planeops::plane_up2(in, s.h, s.w, taps.data(), 5, out); },
      [=, &taps](const T* g, T* gx) { planeops::plane_up2_adjoint(g, s.h, s.w, taps.data(), 5, gx); });
}

// Pyramid reduce: binomial blur then keep every 2nd sample (even dims).
template <typename T>
Tensor<T> pyr_d2_t(const Tensor<T>& x) {
  const Shape s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw std::invalid_argument("pyr_d2: dimensions must be even");
  const auto& taps = detail::binomial16();
  return detail::plane_linear_op(
      x, s.h / 2, s.w / 2,
      [=, &taps](const T* in, T* out) { planeops::plane_conv_decimate(in, s.h, s.w, taps.data(), 5, 2, out); },
      [=, &taps](const T* g, T* gx) {
        planeops::plane_conv_decimate_adjoint(g, s.h, s.w, taps.data(), 5, 2, gx);
      });
}

// Align-corners-false bilinear enlargement; linear with exact adjoint.
template <typename T>
Tensor<T> bilinear_up_t(const Tensor<T>& x, int factor) {
  if (factor < 2) throw std::invalid_argument("bilinear_up: factor must be >= 2");
  const Shape s = x.shape();
  return detail::plane_linear_op(
      x, s.h * factor, s.w * factor,
      [=](const T* in, T* out) { planeops::plane_bilinear_up(in, s.h, s.w, factor, out); },
      [=](const T* g, T* gx) { planeops::plane_bilinear_up_adjoint(g, s.h, s.w, factor, gx); });
}

// ---- Raster bridges ----

template <typename T>
Tensor<T> tensor_from_raster(const Raster& r) {
  Shape s{1, r.bands, r.height, r.width};
  std::vector<T> v(static_cast<size_t>(s.numel()));
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(r.data[i]);
  return Tensor<T>::from_values(s, std::move(v));
}

// Stacks same-shape rasters into a batch tensor.
template <typename T>
Tensor<T> tensor_from_rasters(const std::vector<const Raster*>& rs) {
  if (rs.empty()) throw std::invalid_argument("tensor_from_rasters: empty batch");
  const Raster& first = *rs[0];
  Shape s{static_cast<int>(rs.size()), first.bands, first.height, first.width};
  std::vector<T> v(static_cast<size_t>(s.numel()));
  int64_t per = first.size();
  for (size_t i = 0; i < rs.size(); ++i) {
    if (!rs[i]->same_shape(first)) throw std::invalid_argument("tensor_from_rasters: shape mismatch");
    for (int64_t j = 0; j < per; ++j) v[i * per + j] = static_cast<T>(rs[i]->data[j]);
  }
  return Tensor<T>::from_values(s, std::move(v));
}

template <typename T>
Raster raster_from_tensor(const Tensor<T>& t, int sample = 0) {
  const Shape s = t.shape();
  if (sample < 0 || sample >= s.n) throw std::invalid_argument("raster_from_tensor: sample out of range");
  Raster r(s.h, s.w, s.c);
  int64_t per = static_cast<int64_t>(s.c) * s.plane();
  for (int64_t i = 0; i < per; ++i) r.data[i] = static_cast<double>(t.values()[sample * per + i]);
  return r;
}

}  // namespace pansharp::ad
