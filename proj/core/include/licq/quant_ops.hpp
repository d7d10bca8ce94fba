// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "licq/autodiff.hpp"

namespace licq {

// Round to nearest with ties to even, independent of the FPU rounding mode.
double round_half_even(double v);

enum class Granularity { kPerChannel, kPerTensor };
enum class QuantMode { kStatic, kDynamic };

// Uniform affine quantizer state:
//   x_q = s * (round(clip(x/s + z, 0, 2^b)) - z)
// scale/zero_point hold one entry per output channel (weights) or a single
// entry (activations). Scales are floored at kScaleEps.
struct QuantParams {
  Tensor scale;
  Tensor zero_point;
  int bits = 8;
  QuantMode mode = QuantMode::kStatic;
  Granularity granularity = Granularity::kPerTensor;

  static constexpr double kScaleEps = 1e-8;

  void validate() const;
};

// Applies the affine quantizer. For per-channel params the channel is dim 0
// of x (the output-channel dim of a weight tensor). Pure; clipping absorbs
// any input range.
Tensor quantize_affine(const Tensor& x, const QuantParams& params);

// Min-max calibration: s = (max - min) / 2^b, z = round(-min/s) per channel
// or per tensor. All-constant slices degenerate to s = kScaleEps, z = 0.
QuantParams calibrate_params(const Tensor& x, int bits, Granularity granularity);

// Fake-quantization of a weight tensor with learnable scale/zero-point.
// Forward equals quantize_affine. Backward uses surrogate gradients:
// rounding passes through, the hard clip becomes a leaky clip with slope
// `leak` outside [0, 2^b], and d/ds follows the learned-step-size rule
// through both occurrences of s (round treated as identity).
// s and z hold one entry per channel (dim 0 of w).
Var fake_quant_weight(const Var& w, const Var& s, const Var& z, int bits, double leak);

// Fake-quantization of an activation tensor. Scale and zero-point are
// recomputed from the tensor's own min/max on every call (dynamic,
// per-tensor) and take no gradient; x gets the straight-through/leaky-clip
// gradient.
Var fake_quant_dynamic(const Var& x, int bits, double leak);

}  // namespace licq
