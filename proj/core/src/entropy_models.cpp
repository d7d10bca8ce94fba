// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/entropy_models.hpp"

#include <cmath>
#include <stdexcept>

namespace licq {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Per-channel parameter view; the chain is tiny so everything is scalar math.
struct ChannelView {
  const double* h1;
  const double* b1;
  const double* a1;
  const double* h2;  // 3x3 row-major
  const double* b2;
  const double* a2;
  const double* h3;
  const double* b3;
};

struct ChannelGrads {
  double* h1 = nullptr;
  double* b1 = nullptr;
  double* a1 = nullptr;
  double* h2 = nullptr;
  double* b2 = nullptr;
  double* a2 = nullptr;
  double* h3 = nullptr;
  double* b3 = nullptr;
};

double chain_cdf(const ChannelView& p, double x) {
  double u1[3], t1[3], u2[3], t2[3];
  for (int i = 0; i < 3; ++i) {
    u1[i] = softplus(p.h1[i]) * x + p.b1[i];
    t1[i] = u1[i] + std::tanh(p.a1[i]) * std::tanh(u1[i]);
  }
  for (int i = 0; i < 3; ++i) {
    double acc = p.b2[i];
    for (int j = 0; j < 3; ++j) acc += softplus(p.h2[i * 3 + j]) * t1[j];
    u2[i] = acc;
    t2[i] = u2[i] + std::tanh(p.a2[i]) * std::tanh(u2[i]);
  }
  double u3 = p.b3[0];
  for (int j = 0; j < 3; ++j) u3 += softplus(p.h3[j]) * t2[j];
  return sigmoid(u3);
}

// Recomputes the chain at x and accumulates parameter/input gradients for an
// upstream d(loss)/d(cdf) of g. Returns d(loss)/dx.
double chain_backward(const ChannelView& p, double x, double g, const ChannelGrads& gr) {
  double u1[3], t1[3], tanh_u1[3], u2[3], t2[3], tanh_u2[3];
  for (int i = 0; i < 3; ++i) {
    u1[i] = softplus(p.h1[i]) * x + p.b1[i];
    tanh_u1[i] = std::tanh(u1[i]);
    t1[i] = u1[i] + std::tanh(p.a1[i]) * tanh_u1[i];
  }
  for (int i = 0; i < 3; ++i) {
    double acc = p.b2[i];
    for (int j = 0; j < 3; ++j) acc += softplus(p.h2[i * 3 + j]) * t1[j];
    u2[i] = acc;
    tanh_u2[i] = std::tanh(u2[i]);
    t2[i] = u2[i] + std::tanh(p.a2[i]) * tanh_u2[i];
  }
  double u3 = p.b3[0];
  for (int j = 0; j < 3; ++j) u3 += softplus(p.h3[j]) * t2[j];
  double s = sigmoid(u3);

  double g_u3 = g * s * (1.0 - s);
  if (gr.b3) gr.b3[0] += g_u3;
  double g_t2[3];
  for (int j = 0; j < 3; ++j) {
    g_t2[j] = g_u3 * softplus(p.h3[j]);
    if (gr.h3) gr.h3[j] += g_u3 * t2[j] * sigmoid(p.h3[j]);
  }
  double g_t1[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    double ta = std::tanh(p.a2[i]);
    double g_u2 = g_t2[i] * (1.0 + ta * (1.0 - tanh_u2[i] * tanh_u2[i]));
    if (gr.a2) gr.a2[i] += g_t2[i] * tanh_u2[i] * (1.0 - ta * ta);
    if (gr.b2) gr.b2[i] += g_u2;
    for (int j = 0; j < 3; ++j) {
      g_t1[j] += g_u2 * softplus(p.h2[i * 3 + j]);
      if (gr.h2) gr.h2[i * 3 + j] += g_u2 * t1[j] * sigmoid(p.h2[i * 3 + j]);
    }
  }
  double g_x = 0.0;
  for (int i = 0; i < 3; ++i) {
    double ta = std::tanh(p.a1[i]);
    double g_u1 = g_t1[i] * (1.0 + ta * (1.0 - tanh_u1[i] * tanh_u1[i]));
    if (gr.a1) gr.a1[i] += g_t1[i] * tanh_u1[i] * (1.0 - ta * ta);
    if (gr.b1) gr.b1[i] += g_u1;
    g_x += g_u1 * softplus(p.h1[i]);
    if (gr.h1) gr.h1[i] += g_u1 * x * sigmoid(p.h1[i]);
  }
  return g_x;
}

}  // namespace

FactorizedPrior::FactorizedPrior(int channels, Rng& rng) : channels_(channels) {
  if (channels <= 0) throw std::invalid_argument("FactorizedPrior: channels must be positive");
  const int64_t c = channels;
  // Matrix entries start at softplus^-1(1/(scale*fan)); overall CDF slope at
  // the origin is then mild enough to model latents a few units wide.
  const double scale = std::pow(10.0, 1.0 / 3.0);
  const double init_h12 = std::log(std::expm1(1.0 / (scale * 3.0)));
  const double init_h3 = std::log(std::expm1(1.0 / scale));

  auto uniform_tensor = [&](std::vector<int64_t> shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
  };

  h1 = make_param(Tensor::full({c, 3}, init_h12));
  b1 = make_param(uniform_tensor({c, 3}, -0.5, 0.5));
  a1 = make_param(Tensor::zeros({c, 3}));
  h2 = make_param(Tensor::full({c, 3, 3}, init_h12));
  b2 = make_param(uniform_tensor({c, 3}, -0.5, 0.5));
  a2 = make_param(Tensor::zeros({c, 3}));
  h3 = make_param(Tensor::full({c, 3}, init_h3));
  b3 = make_param(uniform_tensor({c, 1}, -0.5, 0.5));
}

std::vector<Var> FactorizedPrior::parameters() const {
  return {h1, b1, a1, h2, b2, a2, h3, b3};
}

std::vector<std::string> FactorizedPrior::parameter_names() const {
  return {"prior.h1", "prior.b1", "prior.a1", "prior.h2",
          "prior.b2", "prior.a2", "prior.h3", "prior.b3"};
}

FactorizedPrior FactorizedPrior::clone() const {
  FactorizedPrior out;
  out.channels_ = channels_;
  out.h1 = make_param(h1->value);
  out.b1 = make_param(b1->value);
  out.a1 = make_param(a1->value);
  out.h2 = make_param(h2->value);
  out.b2 = make_param(b2->value);
  out.a2 = make_param(a2->value);
  out.h3 = make_param(h3->value);
  out.b3 = make_param(b3->value);
  return out;
}

double FactorizedPrior::cdf(int channel, double x) const {
  if (channel < 0 || channel >= channels_) throw std::invalid_argument("cdf: bad channel");
  ChannelView v{h1->value.data() + channel * 3,     b1->value.data() + channel * 3,
                a1->value.data() + channel * 3,     h2->value.data() + channel * 9,
                b2->value.data() + channel * 3,     a2->value.data() + channel * 3,
                h3->value.data() + channel * 3,     b3->value.data() + channel};
  return chain_cdf(v, x);
}

Var FactorizedPrior::likelihood(const Var& z) const {
  const Tensor& zv = z->value;
  if (zv.ndim() != 4 || zv.dim(1) != channels_)
    throw std::invalid_argument("FactorizedPrior::likelihood: bad input shape");
  const int64_t n = zv.dim(0), c = zv.dim(1), hw = zv.dim(2) * zv.dim(3);

  Tensor out(zv.shape());
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = 0; ic < c; ++ic) {
      ChannelView v{h1->value.data() + ic * 3, b1->value.data() + ic * 3,
                    a1->value.data() + ic * 3, h2->value.data() + ic * 9,
                    b2->value.data() + ic * 3, a2->value.data() + ic * 3,
                    h3->value.data() + ic * 3, b3->value.data() + ic};
      const double* src = zv.data() + (in * c + ic) * hw;
      double* dst = out.data() + (in * c + ic) * hw;
      for (int64_t i = 0; i < hw; ++i)
        dst[i] = chain_cdf(v, src[i] + 0.5) - chain_cdf(v, src[i] - 0.5);
    }

  auto self = *this;  // shares the parameter nodes
  std::vector<Var> parents = {z, h1, b1, a1, h2, b2, a2, h3, b3};
  return make_op(std::move(out), std::move(parents), [z, self](Node& node) {
    const Tensor& zv2 = z->value;
    const int64_t n2 = zv2.dim(0), c2 = zv2.dim(1), hw2 = zv2.dim(2) * zv2.dim(3);
    const double* g = node.grad.data();
    double* gz = z->requires_grad ? z->ensure_grad().data() : nullptr;
    auto gptr = [](const Var& p) { return p->requires_grad ? p->ensure_grad().data() : nullptr; };
    double* gh1 = gptr(self.h1);
    double* gb1 = gptr(self.b1);
    double* ga1 = gptr(self.a1);
    double* gh2 = gptr(self.h2);
    double* gb2 = gptr(self.b2);
    double* ga2 = gptr(self.a2);
    double* gh3 = gptr(self.h3);
    double* gb3 = gptr(self.b3);
    for (int64_t in = 0; in < n2; ++in)
      for (int64_t ic = 0; ic < c2; ++ic) {
        ChannelView v{self.h1->value.data() + ic * 3, self.b1->value.data() + ic * 3,
                      self.a1->value.data() + ic * 3, self.h2->value.data() + ic * 9,
                      self.b2->value.data() + ic * 3, self.a2->value.data() + ic * 3,
                      self.h3->value.data() + ic * 3, self.b3->value.data() + ic};
        ChannelGrads gr;
        if (gh1) gr.h1 = gh1 + ic * 3;
        if (gb1) gr.b1 = gb1 + ic * 3;
        if (ga1) gr.a1 = ga1 + ic * 3;
        if (gh2) gr.h2 = gh2 + ic * 9;
        if (gb2) gr.b2 = gb2 + ic * 3;
        if (ga2) gr.a2 = ga2 + ic * 3;
        if (gh3) gr.h3 = gh3 + ic * 3;
        if (gb3) gr.b3 = gb3 + ic;
        const double* src = zv2.data() + (in * c2 + ic) * hw2;
        const double* gp = g + (in * c2 + ic) * hw2;
        for (int64_t i = 0; i < hw2; ++i) {
          if (gp[i] == 0.0) continue;
          double gx = chain_backward(v, src[i] + 0.5, gp[i], gr) +
                      chain_backward(v, src[i] - 0.5, -gp[i], gr);
          if (gz) gz[(in * c2 + ic) * hw2 + i] += gx;
        }
      }
  });
}

namespace {
const double kInvSqrt2 = 0.7071067811865475244;
const double kInvSqrt2Pi = 0.3989422804014326779;

double norm_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }
double norm_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }
}  // namespace

Var gaussian_likelihood(const Var& x, const Var& mu, const Var& sigma) {
  const Tensor& xv = x->value;
  if (mu && !mu->value.same_shape(xv))
    throw std::invalid_argument("gaussian_likelihood: mu shape mismatch");
  if (!sigma->value.same_shape(xv))
    throw std::invalid_argument("gaussian_likelihood: sigma shape mismatch");

  const int64_t nelem = xv.size();
  const double* px = xv.data();
  const double* pm = mu ? mu->value.data() : nullptr;
  const double* ps = sigma->value.data();
  Tensor out(xv.shape());
  double* po = out.data();
  for (int64_t i = 0; i < nelem; ++i) {
    double m = pm ? pm[i] : 0.0;
    double s = ps[i];
    // Non-positive sigma is a model bug; NaN flows through so that training
    // loops can detect a blown-up run from the loss.
    if (s <= 0.0) throw std::invalid_argument("gaussian_likelihood: sigma must be positive");
    po[i] = norm_cdf((px[i] + 0.5 - m) / s) - norm_cdf((px[i] - 0.5 - m) / s);
  }

  std::vector<Var> parents = mu ? std::vector<Var>{x, mu, sigma} : std::vector<Var>{x, sigma};
  return make_op(std::move(out), std::move(parents), [x, mu, sigma](Node& node) {
    const int64_t n = x->value.size();
    const double* px2 = x->value.data();
    const double* pm2 = mu ? mu->value.data() : nullptr;
    const double* ps2 = sigma->value.data();
    const double* g = node.grad.data();
    double* gx = x->requires_grad ? x->ensure_grad().data() : nullptr;
    double* gm = (mu && mu->requires_grad) ? mu->ensure_grad().data() : nullptr;
    double* gs = sigma->requires_grad ? sigma->ensure_grad().data() : nullptr;
    for (int64_t i = 0; i < n; ++i) {
      if (g[i] == 0.0) continue;
      double m = pm2 ? pm2[i] : 0.0;
      double s = ps2[i];
      double tp = (px2[i] + 0.5 - m) / s;
      double tm = (px2[i] - 0.5 - m) / s;
      double fp = norm_pdf(tp), fm = norm_pdf(tm);
      double d_dx = (fp - fm) / s;
      if (gx) gx[i] += g[i] * d_dx;
      if (gm) gm[i] -= g[i] * d_dx;
      if (gs) gs[i] -= g[i] * (fp * tp - fm * tm) / s;
    }
  });
}

}  // namespace licq
