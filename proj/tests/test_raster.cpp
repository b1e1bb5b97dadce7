// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/raster.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pansharp/errors.hpp"
#include "pansharp/planeops.hpp"
#include "pansharp/rng.hpp"

using namespace pansharp;

namespace {

Raster quantized_random(int h, int w, int b, uint64_t seed) {
  // Values quantized to multiples of 1/1024 so double summed-area tables are
  // exact against naive loops.
  Rng rng(seed);
  Raster r(h, w, b);
  for (double& v : r.data) v = static_cast<double>(rng.uniform_int(0, 1024)) / 1024.0;
  return r;
}

}  // namespace

TEST_CASE("reflect_pad mirrors about the edge without repeating it") {
  // Every row is [1,2,3]; after margin-1 padding each row must be [2,1,2,3,2].
  Raster img(3, 3, 1);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) img.at(0, y, x) = x + 1;
  Raster p = reflect_pad(img, 1);
  CHECK(p.height == 5);
  CHECK(p.width == 5);
  CHECK(p.at(0, 2, 0) == 2);
  CHECK(p.at(0, 2, 1) == 1);
  CHECK(p.at(0, 2, 2) == 2);
  CHECK(p.at(0, 2, 3) == 3);
  CHECK(p.at(0, 2, 4) == 2);
}

TEST_CASE("reflect_pad keeps constants constant") {
  Raster c(5, 4, 2, 0.7);
  Raster p = reflect_pad(c, 2);
  for (double v : p.data) CHECK(v == 0.7);
}

TEST_CASE("reflect_pad matches the index-mirroring oracle on a 2x2 image") {
  Raster img(2, 2, 1);
  img.data = {1, 2, 3, 4};
  Raster p = reflect_pad(img, 1);
  REQUIRE(p.height == 4);
  REQUIRE(p.width == 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      int sy = reflect101_index(y - 1, 2);
      int sx = reflect101_index(x - 1, 2);
      CHECK(p.at(0, y, x) == img.at(0, sy, sx));
    }
  }
}

TEST_CASE("reflect_pad then crop is the identity") {
  Raster img = quantized_random(7, 9, 3, 42);
  Raster p = reflect_pad(img, 3);
  for (int b = 0; b < img.bands; ++b)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) CHECK(p.at(b, y + 3, x + 3) == img.at(b, y, x));
}

TEST_CASE("reflect_pad rejects margins that reach the image size") {
  Raster img(4, 4, 1, 0.0);
  CHECK_THROWS_AS(reflect_pad(img, 4), std::invalid_argument);
  CHECK_THROWS_AS(reflect_pad(img, 7), std::invalid_argument);
}

TEST_CASE("box_mean of a constant image is the constant") {
  Raster c(6, 6, 2, 0.25);
  Raster m = box_mean(c, 2);
  for (double v : m.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("box_mean center of 1..9 grid is 5") {
  Raster img(3, 3, 1);
  img.data = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  Raster m = box_mean(img, 1);
  CHECK(m.at(0, 1, 1) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("box_mean on 2x2 grid pixel (0,0) uses the reflected neighborhood") {
  Raster img(2, 2, 1);
  img.data = {1, 2, 3, 4};
  Raster m = box_mean(img, 1);
  // Reflected 3x3 neighborhood of (0,0): sum 27, mean 3.
  CHECK(m.at(0, 0, 0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("box_mean equals the naive double-loop oracle exactly") {
  for (uint64_t seed : {7u, 8u, 9u}) {
    Raster img = quantized_random(16, 16, 2, seed);
    int radius = 2 + static_cast<int>(seed % 3);
    Raster fast = box_mean(img, radius);
    Raster padded = reflect_pad(img, radius);
    int win = 2 * radius + 1;
    for (int b = 0; b < img.bands; ++b) {
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          double acc = 0.0;
          for (int dy = 0; dy < win; ++dy)
            for (int dx = 0; dx < win; ++dx) acc += padded.at(b, y + dy, x + dx);
          CHECK(fast.at(b, y, x) == acc / (win * win));
        }
      }
    }
  }
}

TEST_CASE("error_map basics") {
  Raster a = quantized_random(5, 5, 4, 3);
  SUBCASE("identical inputs give an all-zero map") {
    Raster e = error_map(a, a);
    CHECK(e.bands == 1);
    for (double v : e.data) CHECK(v == 0.0);
  }
  SUBCASE("single pixel sums absolute band differences") {
    Raster x(1, 1, 4), y(1, 1, 4);
    x.data = {0.5, 0.4, 0.7, 0.2};
    y.data = {0.4, 0.5, 0.5, 0.2};
    Raster e = error_map(x, y);
    CHECK(e.data[0] == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("symmetry and homogeneity") {
    Raster b = quantized_random(5, 5, 4, 4);
    Raster e1 = error_map(a, b);
    Raster e2 = error_map(b, a);
    for (int64_t i = 0; i < e1.size(); ++i) CHECK(e1.data[i] == e2.data[i]);
    Raster a2 = a, b2 = b;
    for (double& v : a2.data) v *= 0.5;
    for (double& v : b2.data) v *= 0.5;
    Raster e3 = error_map(a2, b2);
    for (int64_t i = 0; i < e1.size(); ++i) CHECK(e3.data[i] == doctest::Approx(0.5 * e1.data[i]).epsilon(1e-12));
  }
  SUBCASE("shape mismatch rejected") {
    Raster b(5, 5, 3, 0.0);
    CHECK_THROWS_AS(error_map(a, b), std::invalid_argument);
  }
}

TEST_CASE("PSR1 round-trips float-representable data bitwise") {
  Raster img = quantized_random(9, 7, 4, 11);
  auto path = std::filesystem::temp_directory_path() / "pansharp_test_roundtrip.psr";
  write_psr(path, img);
  Raster back = read_psr(path);
  REQUIRE(back.same_shape(img));
  for (int64_t i = 0; i < img.size(); ++i) CHECK(back.data[i] == img.data[i]);
  std::filesystem::remove(path);
}

TEST_CASE("PSR1 rejects bad magic") {
  auto path = std::filesystem::temp_directory_path() / "pansharp_test_bad.psr";
  {
    std::ofstream f(path, std::ios::binary);
    f << "JUNKJUNKJUNKJUNKJUNK";
  }
  CHECK_THROWS_AS(read_psr(path), io_error);
  std::filesystem::remove(path);
}

TEST_CASE("raster validation rejects non-finite samples") {
  Raster img(2, 2, 1, 0.0);
  img.data[1] = std::nan("");
  CHECK_THROWS_AS(img.validate(), std::invalid_argument);
}

TEST_CASE("sample validation enforces the size contract") {
  Sample s;
  s.pan = Raster(8, 8, 1, 0.1);
  s.ms = Raster(2, 2, 4, 0.1);
  s.ratio = 4;
  CHECK_NOTHROW(s.validate());
  s.ratio = 2;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.ratio = 4;
  s.reference = Raster(8, 8, 3, 0.1);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.reference = Raster(8, 8, 4, 0.1);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("PNG export writes image plus sidecar") {
  Raster img = quantized_random(8, 8, 4, 5);
  auto dir = std::filesystem::temp_directory_path();
  auto png = dir / "pansharp_test_composite.png";
  write_png_composite(png, img);
  CHECK(std::filesystem::exists(png));
  CHECK(std::filesystem::file_size(png) > 64);
  CHECK(std::filesystem::exists(dir / "pansharp_test_composite.png.meta.txt"));
  Raster emap = error_map(img, quantized_random(8, 8, 4, 6));
  auto epng = dir / "pansharp_test_errmap.png";
  write_png_errormap(epng, emap);
  CHECK(std::filesystem::exists(epng));
  std::filesystem::remove(png);
  std::filesystem::remove(dir / "pansharp_test_composite.png.meta.txt");
  std::filesystem::remove(epng);
  std::filesystem::remove(dir / "pansharp_test_errmap.png.meta.txt");
}
