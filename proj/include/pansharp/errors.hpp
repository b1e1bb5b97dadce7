// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace pansharp {

// Filesystem / serialization failures (CLI exit code 3).
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: NaN losses, singular windows, degenerate bands (CLI exit code 4).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Contract violations (bad shapes, bad arguments) reuse std::invalid_argument (CLI exit code 2).

}  // namespace pansharp
