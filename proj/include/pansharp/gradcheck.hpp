// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference verification of reverse-mode gradients.
//
// The FD reference is always evaluated in double; the autodiff side runs in
// the precision under test (double for the strict 1e-6 gate, float for the
// 1e-3 gate).
//
// Losses through relu/lrelu stacks are only piecewise smooth: a perturbation
// that carries some interior pre-activation across zero makes the central
// difference a blend of two one-sided slopes, which is not a derivative
// estimate at all. Each element is therefore differenced twice (step eps and
// eps/2); their disagreement bounds FD's own local uncertainty, and the
// reported residual discounts it:
//   r_i = max(0, |ad_i - fd_i| - 2|fd_i - fd_half_i|)
//   max_rel_err = max_i r_i / max(||ad||_inf, ||fd||_inf, 1e-12).
// On smooth elements the discount is O(eps^2) and the comparison stays
// strict.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pansharp/autodiff.hpp"

namespace pansharp::gradcheck {

struct LeafSpec {
  ad::Shape shape;
  double lo = -1.0;
  double hi = 1.0;
  // Sample |v| in [kink_margin, hi] with random sign instead of [lo, hi]
  // (keeps relu/lrelu probes away from their kinks).
  double kink_margin = 0.0;
};

struct Result {
  std::string name;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

template <typename T>
using BuildFn = std::function<ad::Tensor<T>(std::vector<ad::Tensor<T>>&)>;

// Draws leaf values from `seed`, runs the AD path in T and the FD path in
// double with step eps, checking every element of every leaf (or a seeded
// subset of max_checks_per_leaf when positive).
template <typename T>
Result check(const std::string& name, const std::vector<LeafSpec>& leaves, const BuildFn<T>& build_t,
             const BuildFn<double>& build_d, uint64_t seed, double eps, double tol,
             int max_checks_per_leaf = 0) {
  Rng rng(seed);
  std::vector<std::vector<double>> values(leaves.size());
  for (size_t l = 0; l < leaves.size(); ++l) {
    const auto& spec = leaves[l];
    values[l].resize(static_cast<size_t>(spec.shape.numel()));
    for (double& v : values[l]) {
      if (spec.kink_margin > 0.0) {
        double mag = rng.uniform(spec.kink_margin, spec.hi);
        v = rng.uniform() < 0.5 ? -mag : mag;
      } else {
        v = rng.uniform(spec.lo, spec.hi);
      }
    }
  }

  // Autodiff gradients in precision T.
  std::vector<std::vector<double>> ad_grads(leaves.size());
  {
    std::vector<ad::Tensor<T>> lt;
    lt.reserve(leaves.size());
    for (size_t l = 0; l < leaves.size(); ++l) {
      std::vector<T> v(values[l].size());
      for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(values[l][i]);
      auto t = ad::Tensor<T>::from_values(leaves[l].shape, std::move(v));
      t.set_requires_grad(true);
      lt.push_back(t);
    }
    ad::Tensor<T> loss = build_t(lt);
    ad::backward(loss);
    for (size_t l = 0; l < leaves.size(); ++l) {
      ad_grads[l].assign(values[l].size(), 0.0);
      const auto& g = lt[l].grad();
      for (size_t i = 0; i < g.size(); ++i) ad_grads[l][i] = static_cast<double>(g[i]);
    }
  }

  auto eval_double = [&](const std::vector<std::vector<double>>& vals) {
    ad::NoGradGuard ng;
    std::vector<ad::Tensor<double>> lt;
    lt.reserve(leaves.size());
    for (size_t l = 0; l < leaves.size(); ++l) {
      std::vector<double> v = vals[l];
      lt.push_back(ad::Tensor<double>::from_values(leaves[l].shape, std::move(v)));
    }
    return build_d(lt).item();
  };

  Result res;
  res.name = name;
  res.tol = tol;
  double norm = 1e-12;
  double max_abs_diff = 0.0;
  std::vector<std::vector<double>> work = values;
  for (size_t l = 0; l < leaves.size(); ++l) {
    size_t n = values[l].size();
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    if (max_checks_per_leaf > 0 && n > static_cast<size_t>(max_checks_per_leaf)) {
      rng.shuffle(idx);
      idx.resize(static_cast<size_t>(max_checks_per_leaf));
    }
    for (size_t i : idx) {
      double orig = work[l][i];
      work[l][i] = orig + eps;
      double fplus = eval_double(work);
      work[l][i] = orig - eps;
      double fminus = eval_double(work);
      work[l][i] = orig + 0.5 * eps;
      double fplus_h = eval_double(work);
      work[l][i] = orig - 0.5 * eps;
      double fminus_h = eval_double(work);
      work[l][i] = orig;
      double fd = (fplus - fminus) / (2.0 * eps);
      double fd_half = (fplus_h - fminus_h) / eps;
      double adv = ad_grads[l][i];
      norm = std::max({norm, std::abs(fd), std::abs(adv)});
      double residual = std::abs(adv - fd) - 2.0 * std::abs(fd - fd_half);
      max_abs_diff = std::max(max_abs_diff, residual);
    }
  }
  res.max_rel_err = std::max(0.0, max_abs_diff) / norm;
  res.pass = res.max_rel_err <= tol;
  return res;
}

enum class Precision { kDouble, kSingle };

// Re-draws parameters at He-like scale (weights N(0, sqrt(2/fan_in)), biases
// uniform in [-0.05, 0.05]). The training init N(0, 0.02) leaves a deep
// stack's activations (and thus every gradient) at the FD noise floor, which
// would make finite-difference comparisons vacuous; checks verify the graph,
// not the cold-start init.
template <typename T>
void condition_params(const std::vector<ad::Param<T>*>& params, uint64_t seed) {
  Rng rng(seed);
  for (auto* p : params) {
    const ad::Shape& s = p->tensor.shape();
    bool is_bias = p->name.size() >= 2 && p->name.compare(p->name.size() - 2, 2, ".b") == 0;
    if (is_bias) {
      for (T& v : p->tensor.values()) v = static_cast<T>(rng.uniform(-0.05, 0.05));
    } else {
      double stddev = std::sqrt(2.0 / (static_cast<double>(s.c) * s.h * s.w));
      for (T& v : p->tensor.values()) v = static_cast<T>(rng.normal(0.0, stddev));
    }
  }
}

// Canonical suite: every primitive op plus the end-to-end loss family.
// Tolerances: 1e-6 (double), 1e-3 (single).
std::vector<Result> run_primitive_gradchecks(Precision precision);
std::vector<Result> run_loss_gradchecks(Precision precision);

}  // namespace pansharp::gradcheck
