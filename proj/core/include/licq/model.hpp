// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "licq/autodiff.hpp"
#include "licq/entropy_models.hpp"

namespace licq {

enum class Variant { kScaleHyperprior, kMeanScaleHyperprior };
enum class LayerKind { kConv, kTconv };
enum class LayerPath { kMainEncoder, kMainDecoder, kHyperEncoder, kHyperDecoder };
enum class Mode { kTrain, kEval };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);
std::string path_name(LayerPath p);

// One quantizable convolution. Weight shape is (c_out, c_in, k, k) for both
// kinds; bias has length c_out. Padding is k/2 and transposed convolutions
// use output padding stride-1, so stride-2 stages halve/double exactly.
struct LayerSpec {
  int index = 0;
  LayerKind kind = LayerKind::kConv;
  int c_out = 0;
  int c_in = 0;
  int k = 0;
  int stride = 1;
  LayerPath path = LayerPath::kMainEncoder;
};

struct ConvLayer {
  LayerSpec spec;
  Var weight;
  Var bias;
  bool activation = false;  // leaky rectifier after this layer
};

struct WidthConfig {
  int main_channels = 32;    // interior channels of the main transform
  int latent_channels = 32;  // channels of the coded latent y
  int hyper_channels = 16;   // channels of the hyper path and latent z
};

// The six quality levels and their rate-distortion multipliers.
inline constexpr std::array<double, 6> kLambdaTable = {0.0018, 0.0035, 0.0067,
                                                       0.0130, 0.0250, 0.0483};

struct QuantizedModel;  // quantizer.hpp

// Optional overrides applied inside the forward pass. Exactly one of the
// two is normally set: `weight_override` swaps in precomputed weight tensors
// (layer sensitivity probes), `qmodel` routes weights and activations
// through fake-quantizers.
struct ForwardHooks {
  const std::map<int, Tensor>* weight_override = nullptr;
  const QuantizedModel* qmodel = nullptr;
};

struct ForwardResult {
  Var reconstruction;
  Var likelihoods_y;
  Var likelihoods_z;
  Var y_hat;
  Var z_hat;
};

// A compact hyperprior compression network. Layers 0-3 form the main
// encoder, 4-7 the main decoder, 8-10 the hyper encoder and 11-13 the hyper
// decoder; all fourteen are quantizable. The factorized prior models the
// hyper latent and is not quantizable.
class LicModel {
 public:
  Variant variant = Variant::kMeanScaleHyperprior;
  WidthConfig widths;
  int quality_index = 0;
  double lambda = kLambdaTable[0];
  uint64_t init_seed = 0;
  std::vector<ConvLayer> layers;
  FactorizedPrior z_prior;

  int downsampling_factor() const { return 16; }
  const ConvLayer& layer(int index) const;
  std::vector<Var> parameters() const;
  std::vector<std::string> parameter_names() const;
  LicModel clone() const;
};

// Builds a model with deterministically seeded weights: each layer in index
// order gets Glorot-uniform weights from one seeded stream, zero biases,
// then the prior parameters are drawn from the same stream.
LicModel build_model(Variant variant, const WidthConfig& widths, int quality_index,
                     uint64_t seed);

// Quantizable layers (all convolutions, prior excluded) in index order.
std::vector<LayerSpec> list_quantizable_layers(const LicModel& model);

// Analysis/synthesis pass. Train mode replaces latent rounding with additive
// uniform noise (rng required); eval mode hard-rounds. Batch spatial dims
// must be divisible by downsampling_factor().
ForwardResult forward_compress(const LicModel& model, const Tensor& batch, Mode mode,
                               Rng* rng = nullptr, const ForwardHooks* hooks = nullptr);

struct RDMetrics {
  double rate_bpp = 0.0;
  double distortion = 0.0;  // MSE on the 0-255 intensity scale
  double lambda = 0.0;
  double loss = 0.0;
};

struct RDGraph {
  Var loss;
  Var rate_bpp;
  Var distortion;
  RDMetrics metrics(double lambda) const;
};

// loss = rate + lambda * distortion with rate in bits per pixel,
// rate = -(sum log2 p_y + sum log2 p_z) / (batch * H * W), and distortion
// the mean squared error with intensities scaled to 0-255.
RDGraph rd_loss_graph(const Var& reconstruction, const Tensor& original,
                      const Var& likelihoods_y, const Var& likelihoods_z, double lambda);

// Tensor-level variant for evaluation paths. likelihoods_z may be empty
// (models without a hyper latent). Throws if any likelihood is <= 0.
RDMetrics rd_loss(const Tensor& reconstruction, const Tensor& original,
                  const Tensor& likelihoods_y, const Tensor& likelihoods_z, double lambda);

// Eval-mode forward + rd_loss in one go (no autodiff graph).
RDMetrics eval_rd(const LicModel& model, const Tensor& batch,
                  const ForwardHooks* hooks = nullptr);

}  // namespace licq
