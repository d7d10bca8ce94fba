// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/model_size.hpp"

#include <stdexcept>

namespace licq {

uint64_t layer_size_bits(const LayerSpec& layer, int bits) {
  if (bits < 2 || bits > 16) throw std::invalid_argument("layer_size_bits: bits out of range");
  const uint64_t co = static_cast<uint64_t>(layer.c_out);
  const uint64_t ci = static_cast<uint64_t>(layer.c_in);
  const uint64_t k = static_cast<uint64_t>(layer.k);
  return (co * ci * k * k + co) * static_cast<uint64_t>(bits) + co * 2 * 32;
}

double compression_ratio(const std::vector<LayerSpec>& layers, const BitAssignment& assignment) {
  if (assignment.bits.size() != layers.size())
    throw std::invalid_argument("compression_ratio: assignment length mismatch");
  uint64_t num = 0, den = 0;
  for (size_t i = 0; i < layers.size(); ++i) {
    num += layer_size_bits(layers[i], assignment.bits[i]);
    den += layer_size_bits(layers[i], 8);
  }
  if (den == 0) return 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

double compression_ratio(const LicModel& model, const BitAssignment& assignment) {
  return compression_ratio(list_quantizable_layers(model), assignment);
}

SizeReport model_size_report(const LicModel& model, const BitAssignment& assignment) {
  const auto layers = list_quantizable_layers(model);
  if (assignment.bits.size() != layers.size())
    throw std::invalid_argument("model_size_report: assignment length mismatch");
  SizeReport r;
  r.per_layer_bits.reserve(layers.size());
  for (size_t i = 0; i < layers.size(); ++i) {
    uint64_t b = layer_size_bits(layers[i], assignment.bits[i]);
    r.per_layer_bits.push_back(b);
    r.total_bits += b;
  }
  r.total_mb = static_cast<double>(r.total_bits) / (8.0 * 1024.0 * 1024.0);
  r.cr_vs_8bit = compression_ratio(layers, assignment);
  uint64_t prior_params = 0;
  for (const auto& p : model.z_prior.parameters())
    prior_params += static_cast<uint64_t>(p->value.size());
  r.unquantized_param_bits = prior_params * 32;
  return r;
}

}  // namespace licq
