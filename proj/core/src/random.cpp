// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/random.hpp"

#include <cmath>

namespace licq {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on explicit uniforms keeps the sequence reproducible.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace licq
