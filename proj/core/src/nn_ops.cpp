// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/nn_ops.hpp"

#include <stdexcept>

namespace licq {

int conv2d_out_size(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

int conv_transpose2d_out_size(int in, int k, int stride, int pad, int out_pad) {
  return (in - 1) * stride - 2 * pad + k + out_pad;
}

namespace {

void check_conv_args(const Var& x, const Var& w, const Var& b) {
  if (x->value.ndim() != 4) throw std::invalid_argument("conv: input must be NCHW");
  if (w->value.ndim() != 4) throw std::invalid_argument("conv: weight must be (C_out,C_in,k,k)");
  if (w->value.dim(2) != w->value.dim(3)) throw std::invalid_argument("conv: kernel must be square");
  if (b->value.ndim() != 1 || b->value.dim(0) != w->value.dim(0))
    throw std::invalid_argument("conv: bias length must equal C_out");
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  check_conv_args(x, w, b);
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  const int64_t n = xv.dim(0), cin = xv.dim(1), ih = xv.dim(2), iw = xv.dim(3);
  const int64_t cout = wv.dim(0), k = wv.dim(2);
  if (wv.dim(1) != cin) throw std::invalid_argument("conv2d: channel mismatch");
  const int64_t oh = conv2d_out_size(static_cast<int>(ih), static_cast<int>(k), stride, pad);
  const int64_t ow = conv2d_out_size(static_cast<int>(iw), static_cast<int>(k), stride, pad);
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: output would be empty");

  Tensor out({n, cout, oh, ow});
  const double* px = xv.data();
  const double* pw = wv.data();
  const double* pb = b->value.data();
  double* po = out.data();
  for (int64_t in = 0; in < n; ++in)
    for (int64_t oc = 0; oc < cout; ++oc)
      for (int64_t y = 0; y < oh; ++y)
        for (int64_t xo = 0; xo < ow; ++xo) {
          double acc = pb[oc];
          const int64_t hy0 = y * stride - pad;
          const int64_t wx0 = xo * stride - pad;
          for (int64_t ic = 0; ic < cin; ++ic) {
            const double* xc = px + (in * cin + ic) * ih * iw;
            const double* wc = pw + (oc * cin + ic) * k * k;
            for (int64_t ky = 0; ky < k; ++ky) {
              const int64_t hy = hy0 + ky;
              if (hy < 0 || hy >= ih) continue;
              for (int64_t kx = 0; kx < k; ++kx) {
                const int64_t wx = wx0 + kx;
                if (wx < 0 || wx >= iw) continue;
                acc += xc[hy * iw + wx] * wc[ky * k + kx];
              }
            }
          }
          po[((in * cout + oc) * oh + y) * ow + xo] = acc;
        }

  return make_op(std::move(out), {x, w, b}, [x, w, b, stride, pad](Node& node) {
    const Tensor& xv2 = x->value;
    const Tensor& wv2 = w->value;
    const int64_t n2 = xv2.dim(0), cin2 = xv2.dim(1), ih2 = xv2.dim(2), iw2 = xv2.dim(3);
    const int64_t cout2 = wv2.dim(0), k2 = wv2.dim(2);
    const int64_t oh2 = node.value.dim(2), ow2 = node.value.dim(3);
    const double* g = node.grad.data();
    const double* px2 = xv2.data();
    const double* pw2 = wv2.data();
    double* gx = x->requires_grad ? x->ensure_grad().data() : nullptr;
    double* gw = w->requires_grad ? w->ensure_grad().data() : nullptr;
    double* gb = b->requires_grad ? b->ensure_grad().data() : nullptr;
    for (int64_t in = 0; in < n2; ++in)
      for (int64_t oc = 0; oc < cout2; ++oc)
        for (int64_t y = 0; y < oh2; ++y)
          for (int64_t xo = 0; xo < ow2; ++xo) {
            const double go = g[((in * cout2 + oc) * oh2 + y) * ow2 + xo];
            if (go == 0.0) continue;
            if (gb) gb[oc] += go;
            const int64_t hy0 = y * stride - pad;
            const int64_t wx0 = xo * stride - pad;
            for (int64_t ic = 0; ic < cin2; ++ic) {
              const int64_t xbase = (in * cin2 + ic) * ih2 * iw2;
              const int64_t wbase = (oc * cin2 + ic) * k2 * k2;
              for (int64_t ky = 0; ky < k2; ++ky) {
                const int64_t hy = hy0 + ky;
                if (hy < 0 || hy >= ih2) continue;
                for (int64_t kx = 0; kx < k2; ++kx) {
                  const int64_t wx = wx0 + kx;
                  if (wx < 0 || wx >= iw2) continue;
                  if (gx) gx[xbase + hy * iw2 + wx] += go * pw2[wbase + ky * k2 + kx];
                  if (gw) gw[wbase + ky * k2 + kx] += go * px2[xbase + hy * iw2 + wx];
                }
              }
            }
          }
  });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad) {
  check_conv_args(x, w, b);
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  const int64_t n = xv.dim(0), cin = xv.dim(1), ih = xv.dim(2), iw = xv.dim(3);
  const int64_t cout = wv.dim(0), k = wv.dim(2);
  if (wv.dim(1) != cin) throw std::invalid_argument("conv_transpose2d: channel mismatch");
  const int64_t oh =
      conv_transpose2d_out_size(static_cast<int>(ih), static_cast<int>(k), stride, pad, out_pad);
  const int64_t ow =
      conv_transpose2d_out_size(static_cast<int>(iw), static_cast<int>(k), stride, pad, out_pad);
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv_transpose2d: output would be empty");

  Tensor out({n, cout, oh, ow});
  const double* px = xv.data();
  const double* pw = wv.data();
  const double* pb = b->value.data();
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = 0.0;
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = 0; ic < cin; ++ic) {
      const double* xc = px + (in * cin + ic) * ih * iw;
      for (int64_t y = 0; y < ih; ++y)
        for (int64_t xi = 0; xi < iw; ++xi) {
          const double v = xc[y * iw + xi];
          if (v == 0.0) continue;
          for (int64_t oc = 0; oc < cout; ++oc) {
            const double* wc = pw + (oc * cin + ic) * k * k;
            double* ocp = po + (in * cout + oc) * oh * ow;
            for (int64_t ky = 0; ky < k; ++ky) {
              const int64_t hy = y * stride - pad + ky;
              if (hy < 0 || hy >= oh) continue;
              for (int64_t kx = 0; kx < k; ++kx) {
                const int64_t wx = xi * stride - pad + kx;
                if (wx < 0 || wx >= ow) continue;
                ocp[hy * ow + wx] += v * wc[ky * k + kx];
              }
            }
          }
        }
    }
  for (int64_t in = 0; in < n; ++in)
    for (int64_t oc = 0; oc < cout; ++oc) {
      double* ocp = po + (in * cout + oc) * oh * ow;
      for (int64_t i = 0; i < oh * ow; ++i) ocp[i] += pb[oc];
    }

  return make_op(std::move(out), {x, w, b}, [x, w, b, stride, pad](Node& node) {
    const Tensor& xv2 = x->value;
    const Tensor& wv2 = w->value;
    const int64_t n2 = xv2.dim(0), cin2 = xv2.dim(1), ih2 = xv2.dim(2), iw2 = xv2.dim(3);
    const int64_t cout2 = wv2.dim(0), k2 = wv2.dim(2);
    const int64_t oh2 = node.value.dim(2), ow2 = node.value.dim(3);
    const double* g = node.grad.data();
    const double* px2 = xv2.data();
    const double* pw2 = wv2.data();
    double* gx = x->requires_grad ? x->ensure_grad().data() : nullptr;
    double* gw = w->requires_grad ? w->ensure_grad().data() : nullptr;
    double* gb = b->requires_grad ? b->ensure_grad().data() : nullptr;
    if (gb) {
      for (int64_t in = 0; in < n2; ++in)
        for (int64_t oc = 0; oc < cout2; ++oc) {
          const double* gc = g + (in * cout2 + oc) * oh2 * ow2;
          double acc = 0.0;
          for (int64_t i = 0; i < oh2 * ow2; ++i) acc += gc[i];
          gb[oc] += acc;
        }
    }
    for (int64_t in = 0; in < n2; ++in)
      for (int64_t ic = 0; ic < cin2; ++ic) {
        const int64_t xbase = (in * cin2 + ic) * ih2 * iw2;
        for (int64_t y = 0; y < ih2; ++y)
          for (int64_t xi = 0; xi < iw2; ++xi) {
            const double xval = px2[xbase + y * iw2 + xi];
            double gacc = 0.0;
            for (int64_t oc = 0; oc < cout2; ++oc) {
              const double* wc = pw2 + (oc * cin2 + ic) * k2 * k2;
              double* gwc = gw ? gw + (oc * cin2 + ic) * k2 * k2 : nullptr;
              const double* gc = g + (in * cout2 + oc) * oh2 * ow2;
              for (int64_t ky = 0; ky < k2; ++ky) {
                const int64_t hy = y * stride - pad + ky;
                if (hy < 0 || hy >= oh2) continue;
                for (int64_t kx = 0; kx < k2; ++kx) {
                  const int64_t wx = xi * stride - pad + kx;
                  if (wx < 0 || wx >= ow2) continue;
                  const double go = gc[hy * ow2 + wx];
                  gacc += go * wc[ky * k2 + kx];
                  if (gwc) gwc[ky * k2 + kx] += go * xval;
                }
              }
            }
            if (gx) gx[xbase + y * iw2 + xi] += gacc;
          }
      }
  });
}

}  // namespace licq
