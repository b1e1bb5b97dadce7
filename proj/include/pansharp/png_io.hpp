// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal PNG writer (8-bit gray / RGB, zlib-compressed, filter 0).
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pansharp {

void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     const std::vector<uint8_t>& pixels);

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<uint8_t>& pixels);

}  // namespace pansharp
