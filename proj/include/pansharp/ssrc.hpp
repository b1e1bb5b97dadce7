// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Spatial-spectral residual compensation: the coarse-to-fine and
// fine-to-coarse pyramid cascades. Per stage, both operands are resampled to
// the target scale, concatenated along channels, and fed to that scale's
// generator block; the stage output averages the resampled carry with the
// produced detail:
//   C2F: I^(s) = (u2(I^(s-1)) + G_s([u2(I^(s-1)), u2^s(input)])) / 2
//   F2C: I^(s) = (d2(I^(s-1)) + G_s([d2(I^(s-1)), d2^s(input)])) / 2
// With all detail heads zeroed these collapse to u2^R(x)/2^R resp.
// d2^R(x)/2^R exactly.
#pragma once

#include "pansharp/nets.hpp"

namespace pansharp {

// Coarse-domain adapter: pyr_d2 applied `scales` times (M x M -> m x m).
template <typename T>
Tensor<T> coarse_of(const Tensor<T>& x, int scales) {
  Tensor<T> h = x;
  for (int s = 0; s < scales; ++s) h = ad::pyr_d2_t(h);
  return h;
}

template <typename T>
Tensor<T> c2f_forward(const PyramidGenerator<T>& gen, const Tensor<T>& f_dc) {
  Tensor<T> carry = f_dc;
  Tensor<T> skip = f_dc;
  for (int s = 1; s <= gen.scales; ++s) {
    Tensor<T> up = ad::pyr_u2_t(carry);
    skip = ad::pyr_u2_t(skip);
    Tensor<T> detail = gen.blocks[static_cast<size_t>(s - 1)].forward(ad::concat_channels(up, skip));
    carry = ad::scale(ad::add(up, detail), 0.5);
  }
  return carry;
}

template <typename T>
Tensor<T> f2c_forward(const PyramidGenerator<T>& gen, const Tensor<T>& r_img) {
  Tensor<T> carry = r_img;
  Tensor<T> skip = r_img;
  for (int s = 1; s <= gen.scales; ++s) {
    Tensor<T> down = ad::pyr_d2_t(carry);
    skip = ad::pyr_d2_t(skip);
    Tensor<T> detail = gen.blocks[static_cast<size_t>(s - 1)].forward(ad::concat_channels(down, skip));
    carry = ad::scale(ad::add(down, detail), 0.5);
  }
  return carry;
}

template <typename T>
Tensor<T> disc_forward(const Discriminator<T>& d, const Tensor<T>& x) {
  return d.forward(x);
}

}  // namespace pansharp
