// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/model.hpp"

#include <cmath>
#include <stdexcept>

#include "licq/nn_ops.hpp"
#include "licq/quantizer.hpp"

namespace licq {

namespace {
constexpr double kActivationSlope = 0.2;
constexpr double kSigmaEps = 1e-6;
constexpr double kLikelihoodFloor = 1e-9;
}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "scale-hyperprior") return Variant::kScaleHyperprior;
  if (name == "mean-scale-hyperprior") return Variant::kMeanScaleHyperprior;
  throw std::invalid_argument("unknown model variant: " + name);
}

std::string variant_name(Variant v) {
  return v == Variant::kScaleHyperprior ? "scale-hyperprior" : "mean-scale-hyperprior";
}

std::string path_name(LayerPath p) {
  switch (p) {
    case LayerPath::kMainEncoder: return "main-encoder";
    case LayerPath::kMainDecoder: return "main-decoder";
    case LayerPath::kHyperEncoder: return "hyper-encoder";
    case LayerPath::kHyperDecoder: return "hyper-decoder";
  }
  return "?";
}

const ConvLayer& LicModel::layer(int index) const {
  for (const auto& l : layers)
    if (l.spec.index == index) return l;
  throw std::invalid_argument("LicModel::layer: no such index");
}

std::vector<Var> LicModel::parameters() const {
  std::vector<Var> out;
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  for (const auto& p : z_prior.parameters()) out.push_back(p);
  return out;
}

std::vector<std::string> LicModel::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& l : layers) {
    out.push_back("layer." + std::to_string(l.spec.index) + ".weight");
    out.push_back("layer." + std::to_string(l.spec.index) + ".bias");
  }
  for (const auto& n : z_prior.parameter_names()) out.push_back(n);
  return out;
}

LicModel LicModel::clone() const {
  LicModel out;
  out.variant = variant;
  out.widths = widths;
  out.quality_index = quality_index;
  out.lambda = lambda;
  out.init_seed = init_seed;
  out.layers.reserve(layers.size());
  for (const auto& l : layers)
    out.layers.push_back({l.spec, make_param(l.weight->value), make_param(l.bias->value),
                          l.activation});
  out.z_prior = z_prior.clone();
  return out;
}

namespace {

ConvLayer make_layer(const LayerSpec& spec, bool activation, Rng& rng) {
  Tensor w({spec.c_out, spec.c_in, spec.k, spec.k});
  const double fan_in = static_cast<double>(spec.c_in) * spec.k * spec.k;
  const double fan_out = static_cast<double>(spec.c_out) * spec.k * spec.k;
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-a, a);
  return {spec, make_param(std::move(w)), make_param(Tensor::zeros({spec.c_out})), activation};
}

}  // namespace

LicModel build_model(Variant variant, const WidthConfig& widths, int quality_index,
                     uint64_t seed) {
  if (widths.main_channels < 4 || widths.latent_channels < 4 || widths.hyper_channels < 4)
    throw std::invalid_argument("build_model: channel counts must be >= 4");
  if (quality_index < 0 || quality_index > 5)
    throw std::invalid_argument("build_model: quality_index must be in [0,5]");

  const int n = widths.main_channels;
  const int m = widths.latent_channels;
  const int h = widths.hyper_channels;
  const int sigma_out = variant == Variant::kMeanScaleHyperprior ? 2 * m : m;

  LicModel model;
  model.variant = variant;
  model.widths = widths;
  model.quality_index = quality_index;
  model.lambda = kLambdaTable[static_cast<size_t>(quality_index)];
  model.init_seed = seed;

  Rng rng(seed);
  auto conv = [&](int idx, int co, int ci, int k, int s, LayerPath p, bool act) {
    model.layers.push_back(make_layer({idx, LayerKind::kConv, co, ci, k, s, p}, act, rng));
  };
  auto tconv = [&](int idx, int co, int ci, int k, int s, LayerPath p, bool act) {
    model.layers.push_back(make_layer({idx, LayerKind::kTconv, co, ci, k, s, p}, act, rng));
  };

  conv(0, n, 3, 5, 2, LayerPath::kMainEncoder, true);
  conv(1, n, n, 5, 2, LayerPath::kMainEncoder, true);
  conv(2, n, n, 5, 2, LayerPath::kMainEncoder, true);
  conv(3, m, n, 5, 2, LayerPath::kMainEncoder, false);
  tconv(4, n, m, 5, 2, LayerPath::kMainDecoder, true);
  tconv(5, n, n, 5, 2, LayerPath::kMainDecoder, true);
  tconv(6, n, n, 5, 2, LayerPath::kMainDecoder, true);
  tconv(7, 3, n, 5, 2, LayerPath::kMainDecoder, false);
  conv(8, h, m, 3, 1, LayerPath::kHyperEncoder, true);
  conv(9, h, h, 5, 2, LayerPath::kHyperEncoder, true);
  conv(10, h, h, 5, 2, LayerPath::kHyperEncoder, false);
  tconv(11, h, h, 5, 2, LayerPath::kHyperDecoder, true);
  tconv(12, h, h, 5, 2, LayerPath::kHyperDecoder, true);
  conv(13, sigma_out, h, 3, 1, LayerPath::kHyperDecoder, false);

  model.z_prior = FactorizedPrior(h, rng);
  return model;
}

std::vector<LayerSpec> list_quantizable_layers(const LicModel& model) {
  std::vector<LayerSpec> out;
  out.reserve(model.layers.size());
  for (const auto& l : model.layers) out.push_back(l.spec);
  return out;
}

namespace {

// Applies one layer with the hooks' weight substitution and activation
// quantization rules, then the leaky rectifier when the layer carries one.
Var apply_layer(const ConvLayer& layer, Var x, const ForwardHooks* hooks, size_t qindex) {
  Var w = layer.weight;
  const QuantizedModel* qm = hooks ? hooks->qmodel : nullptr;
  if (hooks && hooks->weight_override) {
    auto it = hooks->weight_override->find(layer.spec.index);
    if (it != hooks->weight_override->end()) w = make_const(it->second);
  }
  if (qm) {
    const auto& q = qm->weight_quantizers[qindex];
    w = fake_quant_weight(w, exp_v(q.log_scale), q.zero_point, q.bits, qm->leak);
    if (qm->quantize_activations) x = fake_quant_dynamic(x, qm->activation_bits, qm->leak);
  }
  const int pad = layer.spec.k / 2;
  Var out = layer.spec.kind == LayerKind::kConv
                ? conv2d(x, w, layer.bias, layer.spec.stride, pad)
                : conv_transpose2d(x, w, layer.bias, layer.spec.stride, pad,
                                   layer.spec.stride - 1);
  if (layer.activation) out = leaky_relu(out, kActivationSlope);
  return out;
}

Var latent_code(const Var& v, Mode mode, Rng* rng) {
  if (mode == Mode::kTrain) {
    if (!rng) throw std::invalid_argument("forward_compress: train mode needs an rng");
    return add_uniform_noise(v, *rng);
  }
  return hard_round(v);
}

}  // namespace

ForwardResult forward_compress(const LicModel& model, const Tensor& batch, Mode mode, Rng* rng,
                               const ForwardHooks* hooks) {
  if (batch.ndim() != 4 || batch.dim(1) != 3)
    throw std::invalid_argument("forward_compress: batch must be (N,3,H,W)");
  const int df = model.downsampling_factor();
  if (batch.dim(2) % df != 0 || batch.dim(3) % df != 0)
    throw std::invalid_argument("forward_compress: spatial dims must be divisible by " +
                                std::to_string(df));

  // Quantizable-layer order equals index order, so the quantizer slot of a
  // layer is just its index.
  auto qidx = [](const ConvLayer& l) { return static_cast<size_t>(l.spec.index); };

  Var x = make_const(batch);
  Var e = x;
  for (int i = 0; i <= 3; ++i) e = apply_layer(model.layer(i), e, hooks, qidx(model.layer(i)));
  Var y = e;

  Var hz = y;
  for (int i = 8; i <= 10; ++i)
    hz = apply_layer(model.layer(i), hz, hooks, qidx(model.layer(i)));
  Var z_hat = latent_code(hz, mode, rng);
  Var lik_z = lower_bound(model.z_prior.likelihood(z_hat), kLikelihoodFloor);

  Var d = z_hat;
  for (int i = 11; i <= 13; ++i)
    d = apply_layer(model.layer(i), d, hooks, qidx(model.layer(i)));
  // Hyper-path conv arithmetic can overshoot for small latents; align to y.
  d = crop2d_center(d, y->value.dim(2), y->value.dim(3));

  Var mu, sigma_raw;
  const int64_t m = model.widths.latent_channels;
  if (model.variant == Variant::kMeanScaleHyperprior) {
    mu = channel_slice(d, 0, m);
    sigma_raw = channel_slice(d, m, 2 * m);
  } else {
    sigma_raw = d;
  }
  Var sigma = add_scalar(softplus_v(sigma_raw), kSigmaEps);

  Var y_hat = latent_code(y, mode, rng);
  Var lik_y = lower_bound(gaussian_likelihood(y_hat, mu, sigma), kLikelihoodFloor);

  Var r = y_hat;
  for (int i = 4; i <= 7; ++i) r = apply_layer(model.layer(i), r, hooks, qidx(model.layer(i)));

  return {r, lik_y, lik_z, y_hat, z_hat};
}

RDMetrics RDGraph::metrics(double lambda) const {
  RDMetrics m;
  m.rate_bpp = rate_bpp->value[0];
  m.distortion = distortion->value[0];
  m.lambda = lambda;
  m.loss = loss->value[0];
  return m;
}

RDGraph rd_loss_graph(const Var& reconstruction, const Tensor& original, const Var& likelihoods_y,
                      const Var& likelihoods_z, double lambda) {
  const int64_t pixels = original.dim(0) * original.dim(2) * original.dim(3);
  Var bits = neg_log2_sum(likelihoods_y);
  if (likelihoods_z && likelihoods_z->value.size() > 0)
    bits = add(bits, neg_log2_sum(likelihoods_z));
  Var rate = mul_scalar(bits, 1.0 / static_cast<double>(pixels));
  Var dist = mse255(reconstruction, original);
  Var loss = add(rate, mul_scalar(dist, lambda));
  return {loss, rate, dist};
}

RDMetrics rd_loss(const Tensor& reconstruction, const Tensor& original,
                  const Tensor& likelihoods_y, const Tensor& likelihoods_z, double lambda) {
  if (!reconstruction.same_shape(original))
    throw std::invalid_argument("rd_loss: reconstruction/original shape mismatch");
  const int64_t pixels = original.dim(0) * original.dim(2) * original.dim(3);
  double bits = 0.0;
  for (int64_t i = 0; i < likelihoods_y.size(); ++i) {
    if (!(likelihoods_y[i] > 0.0)) throw std::runtime_error("rd_loss: non-positive likelihood");
    bits -= std::log2(likelihoods_y[i]);
  }
  for (int64_t i = 0; i < likelihoods_z.size(); ++i) {
    if (!(likelihoods_z[i] > 0.0)) throw std::runtime_error("rd_loss: non-positive likelihood");
    bits -= std::log2(likelihoods_z[i]);
  }
  double mse = 0.0;
  for (int64_t i = 0; i < original.size(); ++i) {
    double d = 255.0 * (reconstruction[i] - original[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(original.size());
  RDMetrics m;
  m.rate_bpp = bits / static_cast<double>(pixels);
  m.distortion = mse;
  m.lambda = lambda;
  m.loss = m.rate_bpp + lambda * mse;
  return m;
}

RDMetrics eval_rd(const LicModel& model, const Tensor& batch, const ForwardHooks* hooks) {
  NoGradGuard ng;
  auto out = forward_compress(model, batch, Mode::kEval, nullptr, hooks);
  return rd_loss(out.reconstruction->value, batch, out.likelihoods_y->value,
                 out.likelihoods_z->value, model.lambda);
}

}  // namespace licq
