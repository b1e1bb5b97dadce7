// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
#include "pansharp/gradcheck.hpp"

#include "pansharp/losses.hpp"
#include "pansharp/model.hpp"

namespace pansharp::gradcheck {

namespace {

constexpr double kEps = 1e-5;

double tol_for(Precision p) { return p == Precision::kDouble ? 1e-6 : 1e-3; }

// Runs one named check in the requested precision; the generic builder is
// instantiated for both the AD precision and the double FD reference.
template <typename Builder>
Result run(Precision prec, const std::string& name, const std::vector<LeafSpec>& leaves, Builder builder,
           uint64_t seed, int max_checks = 0) {
  double tol = tol_for(prec);
  BuildFn<double> bd = builder;
  if (prec == Precision::kDouble) {
    return check<double>(name, leaves, BuildFn<double>(builder), bd, seed, kEps, tol, max_checks);
  }
  return check<float>(name, leaves, BuildFn<float>(builder), bd, seed, kEps, tol, max_checks);
}

}  // namespace

std::vector<Result> run_primitive_gradchecks(Precision prec) {
  std::vector<Result> results;
  auto push = [&](Result r) { results.push_back(std::move(r)); };

  // Elementwise and reductions.
  push(run(prec, "add", {{{1, 2, 4, 4}}, {{1, 2, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             return ad::mean_all(ad::mul(ad::add(l[0], l[1]), l[0]));
           },
           101));
  push(run(prec, "sub", {{{1, 2, 4, 4}}, {{1, 2, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             return ad::mean_all(ad::mul(ad::sub(l[0], l[1]), l[1]));
           },
           102));
  push(run(prec, "mul", {{{1, 2, 4, 4}}, {{1, 2, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) { return ad::mean_all(ad::mul(l[0], l[1])); },
           103));
  push(run(prec, "div", {{{1, 2, 4, 4}}, {{1, 2, 4, 4}, 0.5, 1.5}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) { return ad::mean_all(ad::div(l[0], l[1])); },
           104));
  push(run(prec, "scale_addscalar", {{{1, 1, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             return ad::mean_all(ad::mul(ad::scale(l[0], 1.7), ad::add_scalar(l[0], 0.3)));
           },
           105));
  push(run(prec, "concat", {{{2, 2, 4, 4}}, {{2, 3, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto c = ad::concat_channels(l[0], l[1]);
             return ad::mean_all(ad::mul(c, c));
           },
           106));
  push(run(prec, "relu", {{{1, 2, 5, 5}, -1.0, 1.0, 0.15}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             return ad::mean_all(ad::mul(ad::relu(l[0]), l[0]));
           },
           107));
  push(run(prec, "lrelu", {{{1, 2, 5, 5}, -1.0, 1.0, 0.15}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             return ad::mean_all(ad::mul(ad::lrelu(l[0], 0.2), l[0]));
           },
           108));
  push(run(prec, "mse_mean", {{{1, 2, 4, 4}}, {{1, 2, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) { return ad::mse_mean(l[0], l[1]); }, 109));
  push(run(prec, "half_mse", {{{1, 2, 4, 4}}, {{1, 2, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) { return ad::weighted_mse(l[0], l[1], 0.5); },
           110));
  push(run(prec, "half_mse_const", {{{1, 1, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) { return ad::half_mse_const(l[0], 0.7); }, 111));

  // Padding.
  push(run(prec, "pad_reflect", {{{1, 2, 5, 6}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto p = ad::pad2d(l[0], 2, 3, 1, 2, ad::PadMode::kReflect);
             return ad::mean_all(ad::mul(p, p));
           },
           112));
  push(run(prec, "pad_reflect_folded", {{{1, 1, 3, 3}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto p = ad::pad2d(l[0], 5, 5, 5, 5, ad::PadMode::kReflect);
             return ad::mean_all(ad::mul(p, p));
           },
           113));
  push(run(prec, "pad_zero", {{{1, 2, 5, 6}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto p = ad::pad2d(l[0], 0, 1, 0, 1, ad::PadMode::kZero);
             return ad::mean_all(ad::mul(p, p));
           },
           114));

  // Convolution across the dilation schedule, both pad modes, stride 2.
  for (int dil : {1, 2, 4, 8, 16}) {
    int hw = dil <= 4 ? 8 : 12;
    push(run(prec, "conv_dil" + std::to_string(dil),
             {{{2, 2, hw, hw}}, {{3, 2, 3, 3}}, {{1, 3, 1, 1}}},
             [dil]<typename T>(std::vector<ad::Tensor<T>>& l) {
               auto y = ad::conv2d(l[0], l[1], l[2], 1, dil, ad::PadMode::kReflect);
               return ad::mean_all(ad::mul(y, y));
             },
             120 + static_cast<uint64_t>(dil)));
  }
  push(run(prec, "conv_stride2_zero", {{{2, 2, 8, 8}}, {{4, 2, 3, 3}}, {{1, 4, 1, 1}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::conv2d(l[0], l[1], l[2], 2, 1, ad::PadMode::kZero);
             return ad::mean_all(ad::mul(y, y));
           },
           130));
  push(run(prec, "conv_stride2_reflect", {{{1, 3, 8, 8}}, {{2, 3, 3, 3}}, {{1, 2, 1, 1}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::conv2d(l[0], l[1], l[2], 2, 1, ad::PadMode::kReflect);
             return ad::mean_all(ad::mul(y, y));
           },
           131));
  push(run(prec, "conv_1x1", {{{1, 3, 5, 5}}, {{2, 3, 1, 1}}, {{1, 2, 1, 1}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::conv2d(l[0], l[1], l[2], 1, 1, ad::PadMode::kReflect);
             return ad::mean_all(ad::mul(y, y));
           },
           132));
  push(run(prec, "deconv", {{{2, 3, 4, 4}}, {{3, 2, 3, 3}}, {{1, 2, 1, 1}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::deconv2d(l[0], l[1], l[2]);
             return ad::mean_all(ad::mul(y, y));
           },
           133));

  // Fixed image operators.
  push(run(prec, "box_mean_r2", {{{1, 2, 7, 7}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::box_mean_t(l[0], 2);
             return ad::mean_all(ad::mul(y, y));
           },
           140));
  push(run(prec, "pyr_u2", {{{1, 2, 5, 5}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::pyr_u2_t(l[0]);
             return ad::mean_all(ad::mul(y, y));
           },
           141));
  push(run(prec, "pyr_d2", {{{1, 2, 8, 8}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::pyr_d2_t(l[0]);
             return ad::mean_all(ad::mul(y, y));
           },
           142));
  push(run(prec, "bilinear_up4", {{{1, 2, 4, 4}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto y = ad::bilinear_up_t(l[0], 4);
             return ad::mean_all(ad::mul(y, y));
           },
           143));
  push(run(prec, "guided_coeffs", {{{1, 2, 8, 8}}, {{1, 2, 8, 8}}},
           []<typename T>(std::vector<ad::Tensor<T>>& l) {
             auto gc = guided_coeffs(l[0], l[1], 2, 1e-2, 2);
             return ad::mean_all(ad::mul(gc.m_h, ad::add_scalar(gc.n_h, 0.1)));
           },
           144));
  return results;
}

// ---- End-to-end loss family on a reduced-width model ----

namespace {

struct LossInputs {
  std::vector<double> pan, ms, ref;
  ad::Shape sp{1, 1, 64, 64}, sm{1, 4, 16, 16}, sr{1, 4, 64, 64};
};

LossInputs make_loss_inputs(uint64_t seed) {
  LossInputs in;
  Rng rng(seed);
  in.pan.resize(static_cast<size_t>(in.sp.numel()));
  in.ms.resize(static_cast<size_t>(in.sm.numel()));
  in.ref.resize(static_cast<size_t>(in.sr.numel()));
  for (double& v : in.pan) v = rng.uniform(0.1, 0.9);
  for (double& v : in.ms) v = rng.uniform(0.1, 0.9);
  for (double& v : in.ref) v = rng.uniform(0.1, 0.9);
  return in;
}

ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.bands = 4;
  cfg.ratio = 4;
  cfg.scales = 2;
  cfg.nblocks = 1;
  cfg.feat_channels = 8;
  cfg.enc_depth = 3;
  cfg.disc_base = 8;
  cfg.guided_radius = 2;
  cfg.guided_lambda = 1e-2;
  return cfg;
}

template <typename T>
ad::Tensor<T> cast_tensor(const std::vector<double>& v, ad::Shape s) {
  std::vector<T> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(v[i]);
  return ad::Tensor<T>::from_values(s, std::move(out));
}

// Which loss of the family to evaluate; each exercises Eqs. (8) and (17)-(22)
// through the live model graph.
enum class LossKind { kDmg, kJointC2f, kJointF2c, kDcDmg, kDcF2c, kDf };

template <typename T>
ad::Tensor<T> build_model_loss(PcGansModel<T>& model, const LossInputs& in, LossKind kind) {
  LsganLabels labels;
  LossWeights weights;
  auto pan = cast_tensor<T>(in.pan, in.sp);
  auto ms = cast_tensor<T>(in.ms, in.sm);
  auto ref = cast_tensor<T>(in.ref, in.sr);
  Kernel pk = model.pan_kernel();
  auto fusion = dmg_fuse(*model.dmg, pan, ms, model.cfg.guided_radius, model.cfg.guided_lambda,
                         model.cfg.ratio, pk);
  auto f_dc = coarse_of(fusion.fused, model.cfg.scales);
  switch (kind) {
    case LossKind::kDmg:
      return dmg_loss(fusion.fused, ref);
    case LossKind::kJointC2f: {
      auto f_f = c2f_forward(*model.c2f, f_dc);
      auto adv = adv_gen_loss(disc_forward(*model.df, f_f), labels.a);
      auto cyc = cycle_loss(f2c_forward(*model.f2c, f_f), f_dc);
      auto rec = recon_loss(f_f, ref);
      return joint_loss(adv, cyc, rec, weights);
    }
    case LossKind::kJointF2c: {
      auto f_c = f2c_forward(*model.f2c, ref);
      auto adv = adv_gen_loss(disc_forward(*model.dc, f_c), labels.a);
      auto cyc = cycle_loss(c2f_forward(*model.c2f, f_c), ref);
      auto rec = recon_loss(f_c, f_dc);
      return joint_loss(adv, cyc, rec, weights);
    }
    case LossKind::kDcDmg: {
      auto f_c = f2c_forward(*model.f2c, ref);
      return dc_dmg_loss(disc_forward(*model.dc, f_dc.detach()), disc_forward(*model.dc, f_c.detach()),
                         labels);
    }
    case LossKind::kDcF2c: {
      auto f_c = f2c_forward(*model.f2c, ref);
      return dc_f2c_loss(disc_forward(*model.dc, f_dc.detach()), disc_forward(*model.dc, f_c.detach()),
                         labels);
    }
    case LossKind::kDf: {
      auto f_f = c2f_forward(*model.c2f, coarse_of(fusion.fused.detach(), model.cfg.scales));
      return disc_loss(disc_forward(*model.df, ref), disc_forward(*model.df, f_f.detach()), labels.b,
                       labels.c);
    }
  }
  throw std::logic_error("unreachable");
}

// FD on a handful of seeded parameter elements per group against the double
// model; AD gradients from the precision under test.
template <typename T>
Result check_model_loss(const std::string& name, LossKind kind, uint64_t seed, double tol,
                        int checks_per_param = 2) {
  LossInputs in = make_loss_inputs(derive_seed(seed, "inputs"));
  PcGansModel<double> md = PcGansModel<double>::create(tiny_model_config(), seed);
  PcGansModel<T> mt = PcGansModel<T>::create(tiny_model_config(), seed);
  condition_params(md.all_params(), derive_seed(seed, "condition"));
  condition_params(mt.all_params(), derive_seed(seed, "condition"));

  // AD gradients.
  auto loss_t = build_model_loss(mt, in, kind);
  ad::backward(loss_t);

  auto params_d = md.all_params();
  auto params_t = mt.all_params();
  Rng rng(derive_seed(seed, "picks"));
  // FD every parameter on the differentiation path; spot-check a few
  // untouched ones as true zeros.
  int zero_probes = 4;
  double norm = 1e-12, max_diff = 0.0;
  for (size_t pi = 0; pi < params_d.size(); ++pi) {
    auto& vd = params_d[pi]->tensor.values();
    const auto& gt = params_t[pi]->tensor.grad();
    if (gt.empty() && zero_probes-- <= 0) continue;
    for (int k = 0; k < checks_per_param; ++k) {
      size_t i = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(vd.size()) - 1));
      double orig = vd[i];
      double fplus, fminus, fplus_h, fminus_h;
      {
        ad::NoGradGuard ng;
        vd[i] = orig + kEps;
        fplus = build_model_loss(md, in, kind).item();
        vd[i] = orig - kEps;
        fminus = build_model_loss(md, in, kind).item();
        vd[i] = orig + 0.5 * kEps;
        fplus_h = build_model_loss(md, in, kind).item();
        vd[i] = orig - 0.5 * kEps;
        fminus_h = build_model_loss(md, in, kind).item();
        vd[i] = orig;
      }
      double fd = (fplus - fminus) / (2.0 * kEps);
      double fd_half = (fplus_h - fminus_h) / kEps;
      double adv = gt.empty() ? 0.0 : static_cast<double>(gt[i]);
      norm = std::max({norm, std::abs(fd), std::abs(adv)});
      max_diff = std::max(max_diff, std::abs(adv - fd) - 2.0 * std::abs(fd - fd_half));
    }
  }
  Result r;
  r.name = name;
  r.tol = tol;
  r.max_rel_err = std::max(0.0, max_diff) / norm;
  r.pass = r.max_rel_err <= tol;
  return r;
}

}  // namespace

std::vector<Result> run_loss_gradchecks(Precision prec) {
  double tol = tol_for(prec);
  std::vector<std::pair<std::string, LossKind>> kinds = {
      {"loss_dmg", LossKind::kDmg},           {"loss_joint_c2f", LossKind::kJointC2f},
      {"loss_joint_f2c", LossKind::kJointF2c}, {"loss_dc_dmg", LossKind::kDcDmg},
      {"loss_dc_f2c", LossKind::kDcF2c},       {"loss_df", LossKind::kDf},
  };
  std::vector<Result> results;
  for (auto& [name, kind] : kinds) {
    if (prec == Precision::kDouble) {
      results.push_back(check_model_loss<double>(name, kind, 7000 + results.size(), tol, 1));
    } else {
      results.push_back(check_model_loss<float>(name, kind, 7000 + results.size(), tol, 1));
    }
  }
  return results;
}

}  // namespace pansharp::gradcheck
