// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "licq/autodiff.hpp"

namespace licq {

// Factorized (fully channel-independent) prior over a discrete latent. Each
// channel owns a small monotone MLP c(x) with filter sizes 1-3-3-1 whose
// output, squashed through a sigmoid, is the CDF; the probability mass of a
// value x is c(x+1/2) - c(x-1/2). Softplus-positive matrix entries and
// tanh-bounded gate terms keep c non-decreasing, so masses are positive and
// the CDF stays inside [0,1].
class FactorizedPrior {
 public:
  FactorizedPrior() = default;
  FactorizedPrior(int channels, Rng& rng);

  int channels() const { return channels_; }

  // Probability mass per element of z (shape (N,C,H,W), C == channels()).
  // Differentiable w.r.t. z and the density parameters.
  Var likelihood(const Var& z) const;

  // CDF value for a scalar input on one channel (diagnostics / tests).
  double cdf(int channel, double x) const;

  std::vector<Var> parameters() const;
  // Stable names for checkpointing, aligned with parameters().
  std::vector<std::string> parameter_names() const;

  FactorizedPrior clone() const;

  // Layout: h1,b1,a1 (C,3); h2 (C,3,3); b2,a2 (C,3); h3 (C,3); b3 (C,1).
  Var h1, b1, a1, h2, b2, a2, h3, b3;

 private:
  int channels_ = 0;
};

// Mass of a unit-width bin of a Gaussian, p = Phi((x+1/2-mu)/sigma) -
// Phi((x-1/2-mu)/sigma), elementwise. mu may be null (zero-mean prior);
// sigma must be strictly positive. Differentiable w.r.t. x, mu and sigma.
Var gaussian_likelihood(const Var& x, const Var& mu, const Var& sigma);

}  // namespace licq
