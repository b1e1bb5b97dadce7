// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// The trainable bundle {feature net, C2F, F2C, D_C, D_F}, its on-disk PCGK
// checkpoint format, and the inference-time fusion entry points.
#pragma once

#include <optional>

#include "pansharp/dmg.hpp"
#include "pansharp/nets.hpp"
#include "pansharp/ssrc.hpp"

namespace pansharp {

struct ModelConfig {
  int bands = 4;
  int ratio = 4;
  int scales = 2;  // R = log2(ratio)
  int nblocks = 6;
  int feat_channels = 32;
  int enc_depth = 3;
  int disc_base = 32;
  int guided_radius = 2;
  double guided_lambda = 1e-4;
  double mtf_pan = 0.15;
  // 0 = full model; 1..4 select the reduced variants (1: no DMG, 2: DMG only,
  // 3: no C2F/D_F, 4: no F2C/D_C).
  int ablation_case = 0;

  void validate() const;
};

template <typename T>
struct PcGansModel {
  ModelConfig cfg;
  std::optional<DmgNet<T>> dmg;
  std::optional<PyramidGenerator<T>> c2f;
  std::optional<PyramidGenerator<T>> f2c;
  std::optional<Discriminator<T>> dc;
  std::optional<Discriminator<T>> df;

  static PcGansModel create(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    PcGansModel m;
    m.cfg = cfg;
    int c = cfg.ablation_case;
    if (c != 1) m.dmg.emplace(cfg.bands, cfg.feat_channels, derive_seed(seed, "init.dmg"), "dmg");
    if (c == 0 || c == 1 || c == 4)
      m.c2f.emplace(cfg.bands, cfg.scales, cfg.nblocks, cfg.enc_depth, derive_seed(seed, "init.c2f"), "c2f");
    if (c == 0 || c == 1 || c == 3)
      m.f2c.emplace(cfg.bands, cfg.scales, cfg.nblocks, cfg.enc_depth, derive_seed(seed, "init.f2c"), "f2c");
    if (c == 0 || c == 1 || c == 3)
      m.dc.emplace(cfg.bands, cfg.disc_base, derive_seed(seed, "init.dc"), "dc");
    if (c == 0 || c == 1 || c == 4)
      m.df.emplace(cfg.bands, cfg.disc_base, derive_seed(seed, "init.df"), "df");
    return m;
  }

  std::vector<ad::Param<T>*> dmg_params() { return dmg ? dmg->params() : std::vector<ad::Param<T>*>{}; }
  std::vector<ad::Param<T>*> c2f_params() { return c2f ? c2f->params() : std::vector<ad::Param<T>*>{}; }
  std::vector<ad::Param<T>*> f2c_params() { return f2c ? f2c->params() : std::vector<ad::Param<T>*>{}; }
  std::vector<ad::Param<T>*> dc_params() { return dc ? dc->params() : std::vector<ad::Param<T>*>{}; }
  std::vector<ad::Param<T>*> df_params() { return df ? df->params() : std::vector<ad::Param<T>*>{}; }

  std::vector<ad::Param<T>*> all_params() {
    std::vector<ad::Param<T>*> out;
    for (auto group : {dmg_params(), c2f_params(), f2c_params(), dc_params(), df_params()})
      out.insert(out.end(), group.begin(), group.end());
    return out;
  }

  Kernel pan_kernel() const { return mtf_gaussian_kernel(cfg.mtf_pan, cfg.ratio); }
};

// ---- PCGK checkpoint format ----
// magic "PCGK", version byte, named-parameter table (u32 count, then per
// record: u16 name length, name bytes, u8 ndim, ndim x u32 dims, float32 LE
// payload), then optimizer/trainer state in the same scheme.
struct PcgkRecord {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> data;

  int64_t numel() const {
    int64_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

void write_pcgk(const std::filesystem::path& path, const std::vector<PcgkRecord>& params,
                const std::vector<PcgkRecord>& state);
void read_pcgk(const std::filesystem::path& path, std::vector<PcgkRecord>& params,
               std::vector<PcgkRecord>& state);

// Model <-> record conversion (training precision).
std::vector<PcgkRecord> model_records(PcGansModel<float>& model);
PcGansModel<float> model_from_records(const std::vector<PcgkRecord>& records, uint64_t seed = 0);

// ---- Inference entry points (no-grad, training precision) ----

// EXP-interpolated MS: the no-fusion baseline.
Raster exp_baseline(const Sample& s);

// Case-1 substitute pre-fusion: (EXP-upsampled MS + PAN replicated across
// bands) / 2 at M x M.
Raster average_fusion(const Sample& s);

// F_d from the DMG stage.
Raster fuse_dmg(PcGansModel<float>& model, const Sample& s);

// Full two-step product: C2F refinement of the coarse pre-fusion. For case-1
// models the pre-fusion is the average operation.
Raster fuse_full(PcGansModel<float>& model, const Sample& s);

// SSRC as post-processing: C2F(coarse_of(fused_external)).
Raster refine_with(PcGansModel<float>& model, const Raster& fused_external);

}  // namespace pansharp
