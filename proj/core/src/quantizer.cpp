// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/quantizer.hpp"

#include <cmath>
#include <stdexcept>

namespace licq {

double round_half_even(double v) {
  double f = std::floor(v);
  double r = v - f;
  if (r > 0.5) return f + 1.0;
  if (r < 0.5) return f;
  return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}

void QuantParams::validate() const {
  if (bits < 2 || bits > 16) throw std::invalid_argument("QuantParams: bits out of range");
  if (scale.empty() || !scale.same_shape(zero_point))
    throw std::invalid_argument("QuantParams: scale/zero_point shape mismatch");
  for (int64_t i = 0; i < scale.size(); ++i)
    if (!(scale[i] > 0.0)) throw std::invalid_argument("QuantParams: scale must be positive");
  if (granularity == Granularity::kPerTensor && scale.size() != 1)
    throw std::invalid_argument("QuantParams: per-tensor params must be scalar");
}

namespace {

int64_t channel_count(const Tensor& x, Granularity g) {
  return g == Granularity::kPerChannel ? x.dim(0) : 1;
}

inline double quantize_scalar(double x, double s, double z, double top) {
  double u = x / s + z;
  if (u < 0.0) u = 0.0;
  if (u > top) u = top;
  return s * (round_half_even(u) - z);
}

}  // namespace

Tensor quantize_affine(const Tensor& x, const QuantParams& params) {
  params.validate();
  const int64_t channels = channel_count(x, params.granularity);
  if (params.scale.size() != channels)
    throw std::invalid_argument("quantize_affine: params do not match tensor channels");
  const double top = std::pow(2.0, params.bits);
  Tensor out(x.shape());
  const int64_t per = x.size() / channels;
  for (int64_t c = 0; c < channels; ++c) {
    const double s = params.scale[c];
    const double z = params.zero_point[c];
    const double* src = x.data() + c * per;
    double* dst = out.data() + c * per;
    for (int64_t i = 0; i < per; ++i) dst[i] = quantize_scalar(src[i], s, z, top);
  }
  return out;
}

QuantParams calibrate_params(const Tensor& x, int bits, Granularity granularity) {
  if (x.empty()) throw std::invalid_argument("calibrate_params: empty tensor");
  if (bits < 2 || bits > 16) throw std::invalid_argument("calibrate_params: bits out of range");
  const int64_t channels = channel_count(x, granularity);
  const int64_t per = x.size() / channels;
  const double levels = std::pow(2.0, bits);
  QuantParams p;
  p.bits = bits;
  p.granularity = granularity;
  p.mode = QuantMode::kStatic;
  p.scale = Tensor({channels});
  p.zero_point = Tensor({channels});
  for (int64_t c = 0; c < channels; ++c) {
    const double* src = x.data() + c * per;
    double mn = src[0], mx = src[0];
    for (int64_t i = 1; i < per; ++i) {
      mn = std::min(mn, src[i]);
      mx = std::max(mx, src[i]);
    }
    if (mx == mn) {
      p.scale[c] = QuantParams::kScaleEps;
      p.zero_point[c] = 0.0;
    } else {
      double s = (mx - mn) / levels;
      if (s < QuantParams::kScaleEps) s = QuantParams::kScaleEps;
      p.scale[c] = s;
      p.zero_point[c] = round_half_even(-mn / s);
    }
  }
  return p;
}

namespace {

// Leaky clip to [0, top] and its slope; the surrogate replaces the hard
// clip's zero gradient outside the range.
inline double clip_leaky(double u, double top, double leak) {
  if (u < 0.0) return leak * u;
  if (u > top) return top + leak * (u - top);
  return u;
}
inline double clip_slope(double u, double top, double leak) {
  return (u < 0.0 || u > top) ? leak : 1.0;
}

}  // namespace

Var fake_quant_weight(const Var& w, const Var& s, const Var& z, int bits, double leak) {
  if (!(leak > 0.0 && leak < 1.0)) throw std::invalid_argument("fake_quant_weight: leak in (0,1)");
  const Tensor& wv = w->value;
  const int64_t channels = wv.dim(0);
  if (s->value.size() != channels || z->value.size() != channels)
    throw std::invalid_argument("fake_quant_weight: per-channel param size mismatch");
  const double top = std::pow(2.0, bits);
  const int64_t per = wv.size() / channels;

  Tensor out(wv.shape());
  for (int64_t c = 0; c < channels; ++c) {
    const double sc = s->value[c];
    if (!(sc > 0.0)) throw std::invalid_argument("fake_quant_weight: scale must be positive");
    const double zc = z->value[c];
    const double* src = wv.data() + c * per;
    double* dst = out.data() + c * per;
    for (int64_t i = 0; i < per; ++i) dst[i] = quantize_scalar(src[i], sc, zc, top);
  }

  return make_op(std::move(out), {w, s, z}, [w, s, z, top, leak](Node& node) {
    const Tensor& wv2 = w->value;
    const int64_t channels2 = wv2.dim(0);
    const int64_t per2 = wv2.size() / channels2;
    const double* g = node.grad.data();
    double* gw = w->requires_grad ? w->ensure_grad().data() : nullptr;
    double* gs = s->requires_grad ? s->ensure_grad().data() : nullptr;
    double* gz = z->requires_grad ? z->ensure_grad().data() : nullptr;
    for (int64_t c = 0; c < channels2; ++c) {
      const double sc = s->value[c];
      const double zc = z->value[c];
      const double* src = wv2.data() + c * per2;
      const double* gp = g + c * per2;
      double acc_s = 0.0, acc_z = 0.0;
      for (int64_t i = 0; i < per2; ++i) {
        const double u = src[i] / sc + zc;
        const double slope = clip_slope(u, top, leak);
        if (gw) gw[c * per2 + i] += gp[i] * slope;
        acc_s += gp[i] * ((clip_leaky(u, top, leak) - zc) - slope * (src[i] / sc));
        acc_z += gp[i] * sc * (slope - 1.0);
      }
      if (gs) gs[c] += acc_s;
      if (gz) gz[c] += acc_z;
    }
  });
}

Var fake_quant_dynamic(const Var& x, int bits, double leak) {
  if (!(leak > 0.0 && leak < 1.0)) throw std::invalid_argument("fake_quant_dynamic: leak in (0,1)");
  QuantParams p = calibrate_params(x->value, bits, Granularity::kPerTensor);
  p.mode = QuantMode::kDynamic;
  Tensor out = quantize_affine(x->value, p);
  const double top = std::pow(2.0, bits);
  const double s = p.scale[0];
  const double z = p.zero_point[0];
  return make_op(std::move(out), {x}, [x, s, z, top, leak](Node& node) {
    const double* g = node.grad.data();
    const double* v = x->value.data();
    double* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < node.grad.size(); ++i)
      gx[i] += g[i] * clip_slope(v[i] / s + z, top, leak);
  });
}

Tensor WeightQuantizer::scale_tensor() const {
  Tensor s = log_scale->value;
  for (int64_t i = 0; i < s.size(); ++i) s[i] = std::exp(s[i]);
  return s;
}

QuantParams WeightQuantizer::params() const {
  QuantParams p;
  p.scale = scale_tensor();
  p.zero_point = zero_point->value;
  p.bits = bits;
  p.mode = QuantMode::kStatic;
  p.granularity = Granularity::kPerChannel;
  return p;
}

void QuantizedModel::validate() const {
  const auto specs = list_quantizable_layers(model);
  if (assignment.bits.size() != specs.size() || weight_quantizers.size() != specs.size())
    throw std::invalid_argument("QuantizedModel: assignment length mismatch");
  assignment.validate();
  for (size_t i = 0; i < specs.size(); ++i) {
    if (weight_quantizers[i].bits != assignment.bits[i])
      throw std::invalid_argument("QuantizedModel: quantizer bits diverge from assignment");
    if (weight_quantizers[i].log_scale->value.size() != specs[i].c_out)
      throw std::invalid_argument("QuantizedModel: quantizer channel count mismatch");
  }
}

std::vector<Var> QuantizedModel::quant_parameters() const {
  std::vector<Var> out;
  for (const auto& q : weight_quantizers) {
    out.push_back(q.log_scale);
    out.push_back(q.zero_point);
  }
  return out;
}

QuantizedModel QuantizedModel::clone() const {
  QuantizedModel out;
  out.model = model.clone();
  out.weight_quantizers.reserve(weight_quantizers.size());
  for (const auto& q : weight_quantizers)
    out.weight_quantizers.push_back(
        {make_param(q.log_scale->value), make_param(q.zero_point->value), q.bits});
  out.assignment = assignment;
  out.activation_bits = activation_bits;
  out.quantize_activations = quantize_activations;
  out.leak = leak;
  return out;
}

QuantizedModel attach_quantizers(const LicModel& model, const BitAssignment& assignment,
                                 int activation_bits, const std::optional<Tensor>& calib_batch,
                                 double leak) {
  const auto specs = list_quantizable_layers(model);
  if (assignment.bits.size() != specs.size())
    throw std::invalid_argument("attach_quantizers: assignment length mismatch");
  assignment.validate();
  if (activation_bits < 2 || activation_bits > 16)
    throw std::invalid_argument("attach_quantizers: activation_bits out of range");

  QuantizedModel qm;
  qm.model = model.clone();
  qm.assignment = assignment;
  qm.activation_bits = activation_bits;
  qm.leak = leak;
  for (size_t i = 0; i < specs.size(); ++i) {
    const Tensor& w = qm.model.layer(specs[i].index).weight->value;
    QuantParams p = calibrate_params(w, assignment.bits[i], Granularity::kPerChannel);
    Tensor log_s = p.scale;
    for (int64_t j = 0; j < log_s.size(); ++j) log_s[j] = std::log(log_s[j]);
    qm.weight_quantizers.push_back(
        {make_param(std::move(log_s)), make_param(p.zero_point), assignment.bits[i]});
  }
  qm.validate();

  if (calib_batch) {
    NoGradGuard ng;
    auto out = forward_quantized(qm, *calib_batch, Mode::kEval);
    if (!out.reconstruction->value.all_finite())
      throw std::runtime_error("attach_quantizers: quantized forward produced non-finite values");
  }
  return qm;
}

ForwardResult forward_quantized(const QuantizedModel& qm, const Tensor& batch, Mode mode,
                                Rng* rng) {
  ForwardHooks hooks;
  hooks.qmodel = &qm;
  return forward_compress(qm.model, batch, mode, rng, &hooks);
}

RDMetrics eval_rd_quantized(const QuantizedModel& qm, const Tensor& batch) {
  NoGradGuard ng;
  auto out = forward_quantized(qm, batch, Mode::kEval);
  return rd_loss(out.reconstruction->value, batch, out.likelihoods_y->value,
                 out.likelihoods_z->value, qm.model.lambda);
}

}  // namespace licq
