// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "licq/autodiff.hpp"
#include "licq/random.hpp"

namespace licq::testutil {

inline Tensor random_tensor(std::vector<int64_t> shape, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Central-difference check of d(loss)/d(param) for every element of every
// param. `build` must reconstruct the full forward (same randomness) from the
// current parameter values and return the scalar loss node. Returns the
// worst relative error.
inline double fd_check(const std::vector<Var>& params,
                       const std::function<Var()>& build, double step = 1e-4) {
  for (const auto& p : params) p->zero_grad();
  Var loss = build();
  backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params)
    analytic.push_back(p->has_grad() ? p->grad : Tensor::zeros(p->value.shape()));

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Var p = params[pi];
    for (int64_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + step;
      const double up = build()->value[0];
      p->value[i] = keep - step;
      const double dn = build()->value[0];
      p->value[i] = keep;
      const double fd = (up - dn) / (2.0 * step);
      const double an = analytic[pi][i];
      const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
      worst = std::max(worst, std::fabs(fd - an) / denom);
    }
  }
  return worst;
}

// Same as fd_check but samples at most `per_param` elements of each
// parameter tensor; for models too large to probe exhaustively. Probes whose
// one-sided derivatives disagree are discarded: the loss is only piecewise
// smooth (leaky rectifiers, clips) and central differences are meaningless
// across a kink. `probes_used`, when given, receives the kept-probe count.
inline double fd_check_subset(const std::vector<Var>& params,
                              const std::function<Var()>& build, int per_param,
                              uint64_t seed = 123, double step = 1e-4,
                              int* probes_used = nullptr) {
  for (const auto& p : params) p->zero_grad();
  Var loss = build();
  backward(loss);
  const double at = loss->value[0];
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params)
    analytic.push_back(p->has_grad() ? p->grad : Tensor::zeros(p->value.shape()));

  Rng rng(seed);
  double worst = 0.0;
  int used = 0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Var p = params[pi];
    const int64_t n = p->value.size();
    for (int s = 0; s < per_param; ++s) {
      const int64_t i = n <= per_param ? s : rng.uniform_int(n);
      if (i >= n) break;
      const double keep = p->value[i];
      p->value[i] = keep + step;
      const double up = build()->value[0];
      p->value[i] = keep - step;
      const double dn = build()->value[0];
      p->value[i] = keep;
      const double fd = (up - dn) / (2.0 * step);
      const double fd_r = (up - at) / step;
      const double fd_l = (at - dn) / step;
      if (std::fabs(fd_r - fd_l) > 0.01 * std::max(std::fabs(fd), 1e-6)) continue;
      ++used;
      const double an = analytic[pi][i];
      const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
      worst = std::max(worst, std::fabs(fd - an) / denom);
    }
  }
  if (probes_used) *probes_used = used;
  return worst;
}

}  // namespace licq::testutil
