// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Network blocks: the dilated-conv feature net f(.), the SSRC generator
// block / pyramid generators, and the score-map discriminators.
#pragma once

#include <string>
#include <vector>

#include "pansharp/tensorops.hpp"

namespace pansharp {

using ad::PadMode;
using ad::Tensor;

constexpr double kLReluAlpha = 0.2;

template <typename T>
struct ConvLayer {
  ad::Param<T> w, b;
  int stride = 1;
  int dilation = 1;
  PadMode pad = PadMode::kReflect;

  ConvLayer() = default;
  ConvLayer(int in_ch, int out_ch, int k, int stride_, int dil, const std::string& name, Rng& rng)
      : w({out_ch, in_ch, k, k}, name + ".w"), b({1, out_ch, 1, 1}, name + ".b"), stride(stride_), dilation(dil) {
    ad::init_gaussian(w, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) const { return ad::conv2d(x, w.tensor, b.tensor, stride, dilation, pad); }

  void collect(std::vector<ad::Param<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

template <typename T>
struct DeconvLayer {
  ad::Param<T> w, b;  // w: (in_ch, out_ch, 3, 3); doubles spatial dims

  DeconvLayer() = default;
  DeconvLayer(int in_ch, int out_ch, const std::string& name, Rng& rng)
      : w({in_ch, out_ch, 3, 3}, name + ".w"), b({1, out_ch, 1, 1}, name + ".b") {
    ad::init_gaussian(w, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) const { return ad::deconv2d(x, w.tensor, b.tensor); }

  void collect(std::vector<ad::Param<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

// Feature net f(.): eight layers, 3x3 except a final 1x1, dilations
// (1,1,2,4,8,16,1,1), 32 channels except b output channels, LReLU after all
// but the last. Receptive field reaches 65x65 after layer 6 and 67x67 after
// layer 7.
template <typename T>
struct DmgNet {
  static constexpr int kLayers = 8;
  std::vector<ConvLayer<T>> layers;
  int bands = 4;
  int width = 32;

  DmgNet() = default;
  DmgNet(int bands_, int width_, uint64_t seed, const std::string& prefix = "dmg") : bands(bands_), width(width_) {
    Rng rng(seed);
    static constexpr int kDil[kLayers] = {1, 1, 2, 4, 8, 16, 1, 1};
    // Dilation doubles for layers 3..L-2 (1-based); construction check below.
    for (int l = 3; l <= kLayers - 2; ++l) {
      if (kDil[l - 1] != (1 << (l - 2))) throw std::logic_error("dmg: dilation schedule broken");
    }
    layers.reserve(kLayers);
    for (int l = 0; l < kLayers; ++l) {
      int k = l == kLayers - 1 ? 1 : 3;
      int in = l == 0 ? 1 : width;
      int out = l == kLayers - 1 ? bands : width;
      layers.emplace_back(in, out, k, 1, kDil[l], prefix + ".l" + std::to_string(l + 1), rng);
    }
  }

  // Forward through the first `count` layers (count = kLayers is the full
  // net); LReLU follows every layer except the eighth.
  Tensor<T> forward_layers(const Tensor<T>& x, int count) const {
    Tensor<T> h = x;
    for (int l = 0; l < count; ++l) {
      h = layers[static_cast<size_t>(l)].forward(h);
      if (l < kLayers - 1) h = ad::lrelu(h, kLReluAlpha);
    }
    return h;
  }

  Tensor<T> forward(const Tensor<T>& x) const { return forward_layers(x, kLayers); }

  std::vector<ad::Param<T>*> params() {
    std::vector<ad::Param<T>*> out;
    for (auto& l : layers) l.collect(out);
    return out;
  }
};

// Generator block: stride-2 conv encoder (channels b, 2b, .., b*2^(depth-1)),
// N residual blocks at the bottleneck, stride-1/2 deconv decoder back to b
// channels. Input is the 2b-channel concatenation; spatial dims must divide
// 2^depth.
template <typename T>
struct GeneratorBlock {
  std::vector<ConvLayer<T>> enc;
  struct ResBlock {
    ConvLayer<T> c1, c2;
  };
  std::vector<ResBlock> body;
  std::vector<DeconvLayer<T>> dec;
  int bands = 4;
  int depth = 3;

  GeneratorBlock() = default;
  GeneratorBlock(int bands_, int nblocks, int depth_, Rng& rng, const std::string& prefix)
      : bands(bands_), depth(depth_) {
    int bottleneck = bands << (depth - 1);
    for (int i = 0; i < depth; ++i) {
      int in = i == 0 ? 2 * bands : bands << (i - 1);
      enc.emplace_back(in, bands << i, 3, 2, 1, prefix + ".enc" + std::to_string(i + 1), rng);
    }
    for (int x = 0; x < nblocks; ++x) {
      std::string rb = prefix + ".rb" + std::to_string(x + 1);
      body.push_back({ConvLayer<T>(bottleneck, bottleneck, 3, 1, 1, rb + ".c1", rng),
                      ConvLayer<T>(bottleneck, bottleneck, 3, 1, 1, rb + ".c2", rng)});
    }
    for (int j = 0; j < depth; ++j) {
      int in = j == 0 ? bottleneck : bands << (depth - j);
      dec.emplace_back(in, bands << (depth - 1 - j), prefix + ".dec" + std::to_string(j + 1), rng);
    }
  }

  Tensor<T> encode(const Tensor<T>& x) const {
    const ad::Shape s = x.shape();
    int div = 1 << depth;
    if (s.c != 2 * bands)
      throw std::invalid_argument("generator block: expected " + std::to_string(2 * bands) + " input channels");
    if (s.h % div != 0 || s.w % div != 0)
      throw std::invalid_argument("generator block: spatial dims must divide " + std::to_string(div));
    Tensor<T> h = x;
    for (const auto& l : enc) h = ad::relu(l.forward(h));
    return h;
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    Tensor<T> h = encode(x);
    for (const auto& rb : body) h = ad::add(h, rb.c2.forward(ad::relu(rb.c1.forward(h))));
    for (size_t j = 0; j < dec.size(); ++j) {
      h = dec[j].forward(h);
      if (j + 1 < dec.size()) h = ad::relu(h);
    }
    return h;
  }

  std::vector<ad::Param<T>*> params() {
    std::vector<ad::Param<T>*> out;
    for (auto& l : enc) l.collect(out);
    for (auto& rb : body) {
      rb.c1.collect(out);
      rb.c2.collect(out);
    }
    for (auto& l : dec) l.collect(out);
    return out;
  }

  // Zeroes the decoder's final layer so the block's detail output is
  // identically zero (used by the closed-form pyramid tests).
  void zero_output_head() {
    auto& last = dec.back();
    std::fill(last.w.tensor.values().begin(), last.w.tensor.values().end(), T(0));
    std::fill(last.b.tensor.values().begin(), last.b.tensor.values().end(), T(0));
  }
};

// G_1..G_R with independent parameters per scale.
template <typename T>
struct PyramidGenerator {
  std::vector<GeneratorBlock<T>> blocks;
  int scales = 2;

  PyramidGenerator() = default;
  PyramidGenerator(int bands, int scales_, int nblocks, int depth, uint64_t seed, const std::string& prefix)
      : scales(scales_) {
    Rng rng(seed);
    for (int s = 1; s <= scales; ++s)
      blocks.emplace_back(bands, nblocks, depth, rng, prefix + ".g" + std::to_string(s));
  }

  std::vector<ad::Param<T>*> params() {
    std::vector<ad::Param<T>*> out;
    for (auto& b : blocks) {
      auto p = b.params();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }
};

// Score-map discriminator: seven 3x3 convs, channels base..16*base then 1,
// strides 1,2,2,2,2,1,1 (x16 downsampling), LReLU except after the last.
template <typename T>
struct Discriminator {
  std::vector<ConvLayer<T>> layers;
  int bands = 4;
  int base = 32;

  Discriminator() = default;
  Discriminator(int bands_, int base_, uint64_t seed, const std::string& prefix) : bands(bands_), base(base_) {
    Rng rng(seed);
    static constexpr int kStride[7] = {1, 2, 2, 2, 2, 1, 1};
    for (int i = 0; i < 7; ++i) {
      int in = i == 0 ? bands : (i < 5 ? base << (i - 1) : base << 4);
      int out = i < 5 ? base << i : (i == 5 ? base << 4 : 1);
      layers.emplace_back(in, out, 3, kStride[i], 1, prefix + ".c" + std::to_string(i + 1), rng);
    }
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    const ad::Shape s = x.shape();
    if (s.h % 16 != 0 || s.w % 16 != 0)
      throw std::invalid_argument("discriminator: spatial dims must divide 16, got " + s.str());
    Tensor<T> h = x;
    for (size_t i = 0; i < layers.size(); ++i) {
      h = layers[i].forward(h);
      if (i + 1 < layers.size()) h = ad::lrelu(h, kLReluAlpha);
    }
    return h;  // raw LSGAN score map, no output nonlinearity
  }

  std::vector<ad::Param<T>*> params() {
    std::vector<ad::Param<T>*> out;
    for (auto& l : layers) l.collect(out);
    return out;
  }
};

}  // namespace pansharp
