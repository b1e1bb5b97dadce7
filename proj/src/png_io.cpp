// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "pansharp/errors.hpp"

namespace pansharp {
namespace {

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& payload) {
  put_u32be(out, static_cast<uint32_t>(payload.size()));
  size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32be(out, crc);
}

void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<uint8_t>& pixels) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("png: empty image");
  size_t expect = static_cast<size_t>(width) * height * channels;
  if (pixels.size() != expect) throw std::invalid_argument("png: pixel buffer size mismatch");

  // Raw stream: one filter byte (0) per scanline.
  std::vector<uint8_t> raw;
  raw.reserve(expect + height);
  size_t stride = static_cast<size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), pixels.begin() + y * stride, pixels.begin() + (y + 1) * stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw io_error("png: zlib compression failed");
  compressed.resize(bound);

  std::vector<uint8_t> out;
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.insert(out.end(), sig, sig + 8);

  std::vector<uint8_t> ihdr;
  put_u32be(ihdr, static_cast<uint32_t>(width));
  put_u32be(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);                                     // bit depth
  ihdr.push_back(channels == 1 ? 0 : 2);                 // color type: gray / truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("png: cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw io_error("png: write failed for " + path.string());
}

}  // namespace

void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     const std::vector<uint8_t>& pixels) {
  write_png(path, width, height, 1, pixels);
}

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<uint8_t>& pixels) {
  write_png(path, width, height, 3, pixels);
}

}  // namespace pansharp
