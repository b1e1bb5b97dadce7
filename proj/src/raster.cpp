// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/raster.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pansharp/errors.hpp"
#include "pansharp/planeops.hpp"
#include "pansharp/png_io.hpp"

static_assert(std::endian::native == std::endian::little, "PSR1 I/O assumes a little-endian host");

namespace pansharp {

Raster::Raster(int h, int w, int b, double fill)
    : height(h), width(w), bands(b), data(static_cast<size_t>(h) * w * b, fill) {
  if (h <= 0 || w <= 0 || b <= 0) throw std::invalid_argument("raster: dimensions must be positive");
}

void Raster::validate(const std::string& context) const {
  if (height <= 0 || width <= 0 || bands <= 0)
    throw std::invalid_argument(context + ": dimensions must be positive");
  if (data.size() != static_cast<size_t>(size()))
    throw std::invalid_argument(context + ": data length does not match height*width*bands");
  for (double v : data) {
    if (!std::isfinite(v)) throw std::invalid_argument(context + ": non-finite sample");
  }
}

void Sample::validate(const std::string& context) const {
  pan.validate(context + ".pan");
  ms.validate(context + ".ms");
  if (pan.bands != 1) throw std::invalid_argument(context + ": pan must have exactly 1 band");
  if (pan.height != pan.width || ms.height != ms.width)
    throw std::invalid_argument(context + ": pan and ms must be square");
  if (ratio < 1) throw std::invalid_argument(context + ": ratio must be >= 1");
  if (pan.height != ratio * ms.height)
    throw std::invalid_argument(context + ": size contract M = r*m violated");
  if (reference) {
    reference->validate(context + ".reference");
    if (reference->height != pan.height || reference->width != pan.width || reference->bands != ms.bands)
      throw std::invalid_argument(context + ": reference must be (M, M, b)");
  }
}

Raster reflect_pad(const Raster& img, int margin) {
  if (margin < 0) throw std::invalid_argument("reflect_pad: negative margin");
  if (margin >= img.height || margin >= img.width)
    throw std::invalid_argument("reflect_pad: margin too large for image size");
  Raster out(img.height + 2 * margin, img.width + 2 * margin, img.bands);
  for (int b = 0; b < img.bands; ++b) {
    const double* src = img.band_ptr(b);
    double* dst = out.band_ptr(b);
    for (int y = 0; y < out.height; ++y) {
      int sy = reflect101_index(y - margin, img.height);
      for (int x = 0; x < out.width; ++x) {
        dst[y * out.width + x] = src[sy * img.width + reflect101_index(x - margin, img.width)];
      }
    }
  }
  return out;
}

Raster box_mean(const Raster& img, int radius) {
  if (radius < 1) throw std::invalid_argument("box_mean: radius must be >= 1");
  if (radius >= img.height || radius >= img.width)
    throw std::invalid_argument("box_mean: radius too large for image size");
  Raster out(img.height, img.width, img.bands);
  for (int b = 0; b < img.bands; ++b)
    planeops::plane_box_mean(img.band_ptr(b), img.height, img.width, radius, out.band_ptr(b));
  return out;
}

Raster error_map(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("error_map: shape mismatch");
  Raster out(a.height, a.width, 1);
  for (int band = 0; band < a.bands; ++band) {
    const double* pa = a.band_ptr(band);
    const double* pb = b.band_ptr(band);
    for (int64_t i = 0; i < a.pixels(); ++i) out.data[i] += std::abs(pa[i] - pb[i]);
  }
  return out;
}

// ---- PSR1 ----

namespace {
constexpr char kMagic[4] = {'P', 'S', 'R', '1'};
constexpr int64_t kMaxSamples = int64_t(1) << 31;
}  // namespace

Raster read_psr(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("psr: cannot open " + path.string());
  char magic[4];
  uint32_t dims[3];
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!f || std::memcmp(magic, kMagic, 4) != 0) throw io_error("psr: bad magic in " + path.string());
  int64_t n = static_cast<int64_t>(dims[0]) * dims[1] * dims[2];
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0 || n > kMaxSamples)
    throw io_error("psr: unreasonable dimensions in " + path.string());
  std::vector<float> buf(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!f) throw io_error("psr: truncated file " + path.string());
  Raster out(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]));
  for (int64_t i = 0; i < n; ++i) {
    out.data[i] = static_cast<double>(buf[i]);
    if (!std::isfinite(out.data[i])) throw io_error("psr: non-finite sample in " + path.string());
  }
  return out;
}

void write_psr(const std::filesystem::path& path, const Raster& img) {
  img.validate("write_psr");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("psr: cannot open " + path.string() + " for writing");
  uint32_t dims[3] = {static_cast<uint32_t>(img.height), static_cast<uint32_t>(img.width),
                      static_cast<uint32_t>(img.bands)};
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::vector<float> buf(img.data.size());
  for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(img.data[i]);
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw io_error("psr: write failed for " + path.string());
}

// ---- PNG export ----

namespace {
void write_sidecar(const std::filesystem::path& png_path, const std::string& text) {
  std::filesystem::path meta = png_path;
  meta += ".meta.txt";
  std::ofstream f(meta);
  if (!f) throw io_error("png: cannot write sidecar " + meta.string());
  f << text;
}
}  // namespace

void write_png_composite(const std::filesystem::path& path, const Raster& img,
                         std::array<int, 3> bands_1based) {
  std::array<int, 3> bsel{};
  for (int i = 0; i < 3; ++i) {
    int b = bands_1based[i] - 1;
    if (b < 0 || b >= img.bands) {
      if (img.bands == 1) {
        b = 0;  // grayscale source: replicate
      } else {
        throw std::invalid_argument("png composite: band selection out of range");
      }
    }
    bsel[i] = b;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int b : bsel) {
    const double* p = img.band_ptr(b);
    for (int64_t i = 0; i < img.pixels(); ++i) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
  }
  double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<uint8_t> rgb(static_cast<size_t>(img.pixels()) * 3);
  for (int c = 0; c < 3; ++c) {
    const double* p = img.band_ptr(bsel[c]);
    for (int64_t i = 0; i < img.pixels(); ++i) {
      double v = (p[i] - lo) * scale;
      rgb[i * 3 + c] = static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v + 0.5));
    }
  }
  write_png_rgb8(path, img.width, img.height, rgb);
  std::ostringstream meta;
  meta << "type=composite\nbands=" << bands_1based[0] << "," << bands_1based[1] << "," << bands_1based[2]
       << "\nstretch_min=" << lo << "\nstretch_max=" << hi << "\n";
  write_sidecar(path, meta.str());
}

void write_png_errormap(const std::filesystem::path& path, const Raster& emap) {
  if (emap.bands != 1) throw std::invalid_argument("png errormap: expected 1-band raster");
  double vmax = 0.0;
  for (double v : emap.data) vmax = std::max(vmax, v);
  double scale = vmax > 0 ? 255.0 / vmax : 0.0;
  std::vector<uint8_t> g(static_cast<size_t>(emap.pixels()));
  for (int64_t i = 0; i < emap.pixels(); ++i) {
    double v = emap.data[i] * scale;
    g[i] = static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v + 0.5));
  }
  write_png_gray8(path, emap.width, emap.height, g);
  std::ostringstream meta;
  meta << "type=errormap\nmax_value=" << vmax << "\nvalue_at_255=" << vmax << "\n";
  write_sidecar(path, meta.str());
}

}  // namespace pansharp
