// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

namespace licq {

// Per-layer bit-widths chosen from the contiguous candidate set
// {2, 3, ..., b_max}, in layer-index order.
struct BitAssignment {
  std::vector<int> bits;
  int b_max = 8;
  double beta_used = 0.0;

  static constexpr int kMinBits = 2;

  void validate() const {
    if (b_max < kMinBits) throw std::invalid_argument("BitAssignment: b_max < 2");
    for (int b : bits)
      if (b < kMinBits || b > b_max)
        throw std::invalid_argument("BitAssignment: entry outside candidate set");
  }

  static BitAssignment uniform(size_t layers, int b, int b_max = 8) {
    BitAssignment a;
    a.bits.assign(layers, b);
    a.b_max = b_max;
    a.validate();
    return a;
  }

  bool operator==(const BitAssignment& o) const { return bits == o.bits; }
};

}  // namespace licq
