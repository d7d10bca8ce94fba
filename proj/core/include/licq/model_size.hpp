// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "licq/bit_assignment.hpp"
#include "licq/model.hpp"

namespace licq {

// Accounted storage of the quantizable layers. Per layer at width b:
//   (c_out*c_in*k^2 + c_out)*b + c_out*2*32 bits
// i.e. weights and bias at b bits plus a float32 (scale, zero-point) pair
// per output channel. Non-quantized modules are accounted separately at 32
// bits per parameter and excluded from the compression ratio.
struct SizeReport {
  std::vector<uint64_t> per_layer_bits;
  uint64_t total_bits = 0;
  double total_mb = 0.0;            // total_bits / (8 * 2^20)
  double cr_vs_8bit = 0.0;          // vs the all-8-bit assignment
  uint64_t unquantized_param_bits = 0;  // prior parameters, reported only
};

uint64_t layer_size_bits(const LayerSpec& layer, int bits);

double compression_ratio(const std::vector<LayerSpec>& layers, const BitAssignment& assignment);
double compression_ratio(const LicModel& model, const BitAssignment& assignment);

SizeReport model_size_report(const LicModel& model, const BitAssignment& assignment);

}  // namespace licq
