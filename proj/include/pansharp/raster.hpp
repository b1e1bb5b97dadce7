// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pansharp {

// Image container: finite real samples in planar band-major, row-major order,
// nominal range [0,1]. Immutable-by-convention after construction; all
// raster ops below are pure functions returning new rasters.
struct Raster {
  int height = 0;
  int width = 0;
  int bands = 0;
  std::vector<double> data;

  Raster() = default;
  Raster(int h, int w, int b, double fill = 0.0);

  double& at(int band, int y, int x) { return data[(static_cast<size_t>(band) * height + y) * width + x]; }
  double at(int band, int y, int x) const { return data[(static_cast<size_t>(band) * height + y) * width + x]; }
  double* band_ptr(int b) { return data.data() + static_cast<size_t>(b) * height * width; }
  const double* band_ptr(int b) const { return data.data() + static_cast<size_t>(b) * height * width; }
  int64_t pixels() const { return static_cast<int64_t>(height) * width; }
  int64_t size() const { return pixels() * bands; }
  bool same_shape(const Raster& o) const { return height == o.height && width == o.width && bands == o.bands; }

  // Throws std::invalid_argument if any sample is NaN/Inf or the data length
  // does not match height*width*bands.
  void validate(const std::string& context = "raster") const;
};

// Training/evaluation unit: PAN (1 band, MxM), MS (b bands, mxm), optional
// reference (b bands, MxM), with M = ratio * m exactly.
struct Sample {
  Raster pan;
  Raster ms;
  std::optional<Raster> reference;
  int ratio = 4;

  void validate(const std::string& context = "sample") const;
};

// Reflect-101 padding (edge not repeated): margin must be < min(height,width).
Raster reflect_pad(const Raster& img, int margin);

// Per-band windowed mean over (2*radius+1)^2 windows, reflect-101 borders.
Raster box_mean(const Raster& img, int radius);

// 1-band map of per-pixel absolute differences summed over bands.
Raster error_map(const Raster& a, const Raster& b);

// ---- PSR1 on-disk format ----
// magic "PSR1", then u32 LE height, width, bands, then h*w*b little-endian
// float32 samples in planar band-major order.
Raster read_psr(const std::filesystem::path& path);
void write_psr(const std::filesystem::path& path, const Raster& img);

// ---- PNG export ----
// 8-bit RGB composite from selected bands (1-based, default 3,2,1 as R,G,B)
// with a per-image min-max stretch; the stretch is recorded in a sidecar
// <path>.meta.txt so renderings are reproducible.
void write_png_composite(const std::filesystem::path& path, const Raster& img,
                         std::array<int, 3> bands_1based = {3, 2, 1});

// 8-bit grayscale error map scaled by a fixed max value recorded in the
// sidecar (0 maps to 0, max_value maps to 255).
void write_png_errormap(const std::filesystem::path& path, const Raster& emap);

}  // namespace pansharp
