// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "pansharp/errors.hpp"

static_assert(std::endian::native == std::endian::little, "PCGK I/O assumes a little-endian host");

namespace pansharp {

void ModelConfig::validate() const {
  if (bands < 1) throw std::invalid_argument("model: bands must be >= 1");
  if (ratio < 2 || (ratio & (ratio - 1)) != 0)
    throw std::invalid_argument("model: ratio must be a power of two >= 2");
  int expect_scales = 0;
  for (int r = ratio; r > 1; r /= 2) ++expect_scales;
  if (scales != expect_scales) throw std::invalid_argument("model: scales must equal log2(ratio)");
  if (nblocks < 1 || feat_channels < 1 || enc_depth < 1 || disc_base < 1)
    throw std::invalid_argument("model: network sizes must be positive");
  if (guided_radius < 1) throw std::invalid_argument("model: guided radius must be >= 1");
  if (guided_lambda < 0.0) throw std::invalid_argument("model: guided lambda must be >= 0");
  if (!(mtf_pan > 0.0 && mtf_pan < 1.0)) throw std::invalid_argument("model: pan MTF gain must be in (0,1)");
  if (ablation_case < 0 || ablation_case > 4) throw std::invalid_argument("model: unknown ablation case");
}

// ---- PCGK ----

namespace {

constexpr char kMagic[4] = {'P', 'C', 'G', 'K'};
constexpr uint8_t kVersion = 1;

void write_record(std::ofstream& f, const PcgkRecord& r) {
  if (r.name.size() > 0xffff) throw io_error("pcgk: record name too long");
  uint16_t len = static_cast<uint16_t>(r.name.size());
  f.write(reinterpret_cast<const char*>(&len), sizeof(len));
  f.write(r.name.data(), len);
  uint8_t nd = static_cast<uint8_t>(r.dims.size());
  f.write(reinterpret_cast<const char*>(&nd), 1);
  f.write(reinterpret_cast<const char*>(r.dims.data()), static_cast<std::streamsize>(nd * sizeof(uint32_t)));
  if (static_cast<int64_t>(r.data.size()) != r.numel()) throw io_error("pcgk: record payload mismatch");
  f.write(reinterpret_cast<const char*>(r.data.data()),
          static_cast<std::streamsize>(r.data.size() * sizeof(float)));
}

PcgkRecord read_record(std::ifstream& f, const std::string& path) {
  PcgkRecord r;
  uint16_t len = 0;
  f.read(reinterpret_cast<char*>(&len), sizeof(len));
  r.name.resize(len);
  f.read(r.name.data(), len);
  uint8_t nd = 0;
  f.read(reinterpret_cast<char*>(&nd), 1);
  r.dims.resize(nd);
  f.read(reinterpret_cast<char*>(r.dims.data()), static_cast<std::streamsize>(nd * sizeof(uint32_t)));
  if (!f) throw io_error("pcgk: truncated record header in " + path);
  int64_t n = r.numel();
  if (n < 0 || n > (int64_t(1) << 31)) throw io_error("pcgk: unreasonable record size in " + path);
  r.data.resize(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!f) throw io_error("pcgk: truncated record payload in " + path);
  return r;
}

void write_table(std::ofstream& f, const std::vector<PcgkRecord>& records) {
  uint32_t count = static_cast<uint32_t>(records.size());
  f.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& r : records) write_record(f, r);
}

std::vector<PcgkRecord> read_table(std::ifstream& f, const std::string& path) {
  uint32_t count = 0;
  f.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!f || count > 1000000) throw io_error("pcgk: bad table count in " + path);
  std::vector<PcgkRecord> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) out.push_back(read_record(f, path));
  return out;
}

}  // namespace

void write_pcgk(const std::filesystem::path& path, const std::vector<PcgkRecord>& params,
                const std::vector<PcgkRecord>& state) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("pcgk: cannot open " + path.string() + " for writing");
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&kVersion), 1);
  write_table(f, params);
  write_table(f, state);
  if (!f) throw io_error("pcgk: write failed for " + path.string());
}

void read_pcgk(const std::filesystem::path& path, std::vector<PcgkRecord>& params,
               std::vector<PcgkRecord>& state) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("pcgk: cannot open " + path.string());
  char magic[4];
  uint8_t version = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), 1);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) throw io_error("pcgk: bad magic in " + path.string());
  if (version != kVersion) throw io_error("pcgk: unsupported version in " + path.string());
  params = read_table(f, path.string());
  state = read_table(f, path.string());
}

// ---- model <-> records ----

namespace {

PcgkRecord meta_record(const std::string& name, double value) {
  return PcgkRecord{name, {1}, {static_cast<float>(value)}};
}

double meta_value(const std::map<std::string, const PcgkRecord*>& byname, const std::string& name,
                  double fallback) {
  auto it = byname.find(name);
  if (it == byname.end()) return fallback;
  return static_cast<double>(it->second->data.at(0));
}

}  // namespace

std::vector<PcgkRecord> model_records(PcGansModel<float>& model) {
  std::vector<PcgkRecord> out;
  const ModelConfig& c = model.cfg;
  out.push_back(meta_record("meta.bands", c.bands));
  out.push_back(meta_record("meta.ratio", c.ratio));
  out.push_back(meta_record("meta.scales", c.scales));
  out.push_back(meta_record("meta.nblocks", c.nblocks));
  out.push_back(meta_record("meta.feat_channels", c.feat_channels));
  out.push_back(meta_record("meta.enc_depth", c.enc_depth));
  out.push_back(meta_record("meta.disc_base", c.disc_base));
  out.push_back(meta_record("meta.guided_radius", c.guided_radius));
  out.push_back(meta_record("meta.guided_lambda", c.guided_lambda));
  out.push_back(meta_record("meta.mtf_pan", c.mtf_pan));
  out.push_back(meta_record("meta.case", c.ablation_case));
  for (ad::Param<float>* p : model.all_params()) {
    const ad::Shape& s = p->tensor.shape();
    PcgkRecord r;
    r.name = p->name;
    r.dims = {static_cast<uint32_t>(s.n), static_cast<uint32_t>(s.c), static_cast<uint32_t>(s.h),
              static_cast<uint32_t>(s.w)};
    r.data = p->tensor.values();
    out.push_back(std::move(r));
  }
  return out;
}

PcGansModel<float> model_from_records(const std::vector<PcgkRecord>& records, uint64_t seed) {
  std::map<std::string, const PcgkRecord*> byname;
  for (const auto& r : records) byname[r.name] = &r;
  ModelConfig cfg;
  cfg.bands = static_cast<int>(meta_value(byname, "meta.bands", 4));
  cfg.ratio = static_cast<int>(meta_value(byname, "meta.ratio", 4));
  cfg.scales = static_cast<int>(meta_value(byname, "meta.scales", 2));
  cfg.nblocks = static_cast<int>(meta_value(byname, "meta.nblocks", 6));
  cfg.feat_channels = static_cast<int>(meta_value(byname, "meta.feat_channels", 32));
  cfg.enc_depth = static_cast<int>(meta_value(byname, "meta.enc_depth", 3));
  cfg.disc_base = static_cast<int>(meta_value(byname, "meta.disc_base", 32));
  cfg.guided_radius = static_cast<int>(meta_value(byname, "meta.guided_radius", 2));
  cfg.guided_lambda = meta_value(byname, "meta.guided_lambda", 1e-4);
  cfg.mtf_pan = meta_value(byname, "meta.mtf_pan", 0.15);
  cfg.ablation_case = static_cast<int>(meta_value(byname, "meta.case", 0));
  PcGansModel<float> model = PcGansModel<float>::create(cfg, seed);
  for (ad::Param<float>* p : model.all_params()) {
    auto it = byname.find(p->name);
    if (it == byname.end()) throw io_error("pcgk: checkpoint missing parameter " + p->name);
    const PcgkRecord& r = *it->second;
    if (r.numel() != p->tensor.numel())
      throw io_error("pcgk: parameter size mismatch for " + p->name);
    p->tensor.values() = r.data;
  }
  return model;
}

// ---- inference ----

Raster exp_baseline(const Sample& s) {
  return exp_upsample(s.ms, s.ratio);
}

Raster average_fusion(const Sample& s) {
  Raster up = exp_baseline(s);
  Raster out(up.height, up.width, up.bands);
  for (int b = 0; b < up.bands; ++b) {
    const double* pu = up.band_ptr(b);
    double* po = out.band_ptr(b);
    for (int64_t i = 0; i < up.pixels(); ++i) po[i] = 0.5 * (pu[i] + s.pan.data[static_cast<size_t>(i)]);
  }
  return out;
}

namespace {

Raster dmg_product(PcGansModel<float>& model, const Sample& s) {
  if (!model.dmg) throw std::invalid_argument("fuse: model has no DMG stage (case 1 checkpoint)");
  if (s.ratio != model.cfg.ratio) throw std::invalid_argument("fuse: sample ratio does not match checkpoint");
  ad::NoGradGuard ng;
  auto pan = ad::tensor_from_raster<float>(s.pan);
  auto ms = ad::tensor_from_raster<float>(s.ms);
  Kernel pk = model.pan_kernel();
  auto fusion = dmg_fuse(*model.dmg, pan, ms, model.cfg.guided_radius, model.cfg.guided_lambda,
                         model.cfg.ratio, pk);
  return ad::raster_from_tensor(fusion.fused);
}

}  // namespace

Raster fuse_dmg(PcGansModel<float>& model, const Sample& s) {
  s.validate("fuse input");
  return dmg_product(model, s);
}

Raster fuse_full(PcGansModel<float>& model, const Sample& s) {
  s.validate("fuse input");
  Raster pre = model.dmg ? dmg_product(model, s) : average_fusion(s);
  return refine_with(model, pre);
}

Raster refine_with(PcGansModel<float>& model, const Raster& fused_external) {
  if (!model.c2f) throw std::invalid_argument("refine: model has no C2F generator");
  if (fused_external.bands != model.cfg.bands)
    throw std::invalid_argument("refine: band count does not match checkpoint");
  int div = model.cfg.ratio * (1 << model.cfg.enc_depth);
  if (fused_external.height % div != 0 || fused_external.width % div != 0)
    throw std::invalid_argument("refine: input dims must divide " + std::to_string(div));
  ad::NoGradGuard ng;
  auto x = ad::tensor_from_raster<float>(fused_external);
  auto coarse = coarse_of(x, model.cfg.scales);
  auto out = c2f_forward(*model.c2f, coarse);
  return ad::raster_from_tensor(out);
}

}  // namespace pansharp
