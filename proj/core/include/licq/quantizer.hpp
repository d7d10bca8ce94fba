// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "licq/bit_assignment.hpp"
#include "licq/model.hpp"
#include "licq/quant_ops.hpp"

namespace licq {

// Learnable per-channel weight quantizer for one layer. The scale is kept as
// log(s) so gradient steps cannot drive it non-positive.
struct WeightQuantizer {
  Var log_scale;  // (c_out)
  Var zero_point; // (c_out)
  int bits = 8;

  Tensor scale_tensor() const;  // exp(log_scale) values
  QuantParams params() const;   // static per-channel snapshot
};

// A model plus its quantization state: one static per-channel weight
// quantizer per quantizable layer (bits from the assignment) and dynamic
// per-tensor activation quantizers sharing a single bit-width.
struct QuantizedModel {
  LicModel model;
  std::vector<WeightQuantizer> weight_quantizers;  // by quantizable-layer order
  BitAssignment assignment;
  int activation_bits = 8;
  bool quantize_activations = true;
  double leak = 0.01;

  void validate() const;
  std::vector<Var> quant_parameters() const;   // all log_scale and zero_point vars
  std::vector<Var> model_parameters() const { return model.parameters(); }
  QuantizedModel clone() const;
};

// Clones the model and calibrates one per-channel weight quantizer per layer
// from the current weights at the assigned widths. Activation quantizers are
// dynamic and carry no state. `calib_batch`, when given, is run through the
// quantized forward once as a smoke check of the assembled model.
QuantizedModel attach_quantizers(const LicModel& model, const BitAssignment& assignment,
                                 int activation_bits,
                                 const std::optional<Tensor>& calib_batch = std::nullopt,
                                 double leak = 0.01);

// Forward pass with fake-quantized weights and dynamically quantized layer
// inputs. Train mode builds the surrogate-gradient graph.
ForwardResult forward_quantized(const QuantizedModel& qm, const Tensor& batch, Mode mode,
                                Rng* rng = nullptr);

RDMetrics eval_rd_quantized(const QuantizedModel& qm, const Tensor& batch);

}  // namespace licq
