// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace licq {

namespace {
thread_local bool g_grad_enabled = true;

double round_even(double v) {
  double f = std::floor(v);
  double r = v - f;
  if (r > 0.5) return f + 1.0;
  if (r < 0.5) return f;
  return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}
}  // namespace

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool on) { g_grad_enabled = on; }

Var make_param(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

Var make_const(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled) {
    bool needs = false;
    for (const auto& p : parents)
      if (p->requires_grad) needs = true;
    if (needs) {
      n->requires_grad = true;
      n->parents = std::move(parents);
      n->backward_fn = std::move(backward_fn);
    }
  }
  return n;
}

void backward(const Var& root) {
  if (!root) throw std::invalid_argument("backward on null var");
  if (root->value.size() != 1) throw std::invalid_argument("backward root must be scalar");
  if (!root->requires_grad) return;

  // Iterative topological sort; graphs can be deep at large batch counts.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad().fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->has_grad()) n->backward_fn(*n);
  }
}

namespace {
void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a->value.same_shape(b->value))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a->value.shape_str() +
                                " vs " + b->value.shape_str());
}
}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out = a->value;
  const double* pb = b->value.data();
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] += pb[i];
  return make_op(std::move(out), {a, b}, [a, b](Node& n) {
    const double* g = n.grad.data();
    if (a->requires_grad) {
      double* ga = a->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i];
    }
    if (b->requires_grad) {
      double* gb = b->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.size(); ++i) gb[i] += g[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out = a->value;
  const double* pb = b->value.data();
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] -= pb[i];
  return make_op(std::move(out), {a, b}, [a, b](Node& n) {
    const double* g = n.grad.data();
    if (a->requires_grad) {
      double* ga = a->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i];
    }
    if (b->requires_grad) {
      double* gb = b->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out = a->value;
  const double* pb = b->value.data();
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] *= pb[i];
  return make_op(std::move(out), {a, b}, [a, b](Node& n) {
    const double* g = n.grad.data();
    if (a->requires_grad) {
      double* ga = a->ensure_grad().data();
      const double* vb = b->value.data();
      for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (b->requires_grad) {
      double* gb = b->ensure_grad().data();
      const double* va = a->value.data();
      for (int64_t i = 0; i < n.grad.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

Var add_scalar(const Var& a, double c) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] += c;
  return make_op(std::move(out), {a}, [a](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i];
  });
}

Var mul_scalar(const Var& a, double c) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] *= c;
  return make_op(std::move(out), {a}, [a, c](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i] * c;
  });
}

Var exp_v(const Var& a) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = std::exp(po[i]);
  return make_op(std::move(out), {a}, [a](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    const double* v = n.value.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i] * v[i];
  });
}

Var log_v(const Var& a) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = std::log(po[i]);
  return make_op(std::move(out), {a}, [a](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    const double* v = a->value.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i] / v[i];
  });
}

Var softplus_v(const Var& a) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) {
    double x = po[i];
    po[i] = x > 30.0 ? x : std::log1p(std::exp(x));
  }
  return make_op(std::move(out), {a}, [a](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    const double* v = a->value.data();
    for (int64_t i = 0; i < n.grad.size(); ++i)
      ga[i] += g[i] / (1.0 + std::exp(-v[i]));
  });
}

Var leaky_relu(const Var& a, double slope) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i)
    if (po[i] < 0.0) po[i] *= slope;
  return make_op(std::move(out), {a}, [a, slope](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    const double* v = a->value.data();
    for (int64_t i = 0; i < n.grad.size(); ++i)
      ga[i] += g[i] * (v[i] < 0.0 ? slope : 1.0);
  });
}

Var sum_all(const Var& a) {
  Tensor out = Tensor::scalar(a->value.sum());
  return make_op(std::move(out), {a}, [a](Node& n) {
    double g = n.grad[0];
    double* ga = a->ensure_grad().data();
    for (int64_t i = 0; i < a->value.size(); ++i) ga[i] += g;
  });
}

Var mse255(const Var& a, const Tensor& reference) {
  if (!a->value.same_shape(reference))
    throw std::invalid_argument("mse255: shape mismatch");
  const int64_t nelem = a->value.size();
  const double* pa = a->value.data();
  const double* pr = reference.data();
  double acc = 0.0;
  for (int64_t i = 0; i < nelem; ++i) {
    double d = 255.0 * (pa[i] - pr[i]);
    acc += d * d;
  }
  Tensor out = Tensor::scalar(acc / static_cast<double>(nelem));
  Tensor ref = reference;
  return make_op(std::move(out), {a}, [a, ref = std::move(ref), nelem](Node& n) {
    double g = n.grad[0];
    double* ga = a->ensure_grad().data();
    const double* pa2 = a->value.data();
    const double* pr2 = ref.data();
    double k = g * 2.0 * 255.0 * 255.0 / static_cast<double>(nelem);
    for (int64_t i = 0; i < nelem; ++i) ga[i] += k * (pa2[i] - pr2[i]);
  });
}

Var neg_log2_sum(const Var& p) {
  const double* pp = p->value.data();
  double acc = 0.0;
  for (int64_t i = 0; i < p->value.size(); ++i) acc -= std::log2(pp[i]);
  return make_op(Tensor::scalar(acc), {p}, [p](Node& n) {
    double g = n.grad[0];
    double* gp = p->ensure_grad().data();
    const double* v = p->value.data();
    const double inv_ln2 = 1.0 / std::log(2.0);
    for (int64_t i = 0; i < p->value.size(); ++i) gp[i] -= g * inv_ln2 / v[i];
  });
}

Var lower_bound(const Var& a, double bound) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i)
    if (po[i] < bound) po[i] = bound;
  return make_op(std::move(out), {a}, [a, bound](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    const double* v = a->value.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) {
      // Pass where unclamped, or where the gradient pulls the value up.
      if (v[i] >= bound || g[i] < 0.0) ga[i] += g[i];
    }
  });
}

Var add_uniform_noise(const Var& a, Rng& rng) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] += rng.uniform() - 0.5;
  return make_op(std::move(out), {a}, [a](Node& n) {
    double* ga = a->ensure_grad().data();
    const double* g = n.grad.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += g[i];
  });
}

Var hard_round(const Var& a) {
  Tensor out = a->value;
  double* po = out.data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = round_even(po[i]);
  return make_op(std::move(out), {a}, [](Node&) {});
}

Var channel_slice(const Var& a, int64_t c0, int64_t c1) {
  const Tensor& v = a->value;
  if (v.ndim() != 4) throw std::invalid_argument("channel_slice expects NCHW");
  int64_t n = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  if (c0 < 0 || c1 > c || c0 >= c1) throw std::invalid_argument("channel_slice bounds");
  Tensor out({n, c1 - c0, h, w});
  int64_t hw = h * w;
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = c0; ic < c1; ++ic) {
      const double* src = v.data() + (in * c + ic) * hw;
      double* dst = out.data() + (in * (c1 - c0) + (ic - c0)) * hw;
      for (int64_t i = 0; i < hw; ++i) dst[i] = src[i];
    }
  return make_op(std::move(out), {a}, [a, c0, c1](Node& node) {
    const Tensor& v2 = a->value;
    int64_t n2 = v2.dim(0), c = v2.dim(1), h2 = v2.dim(2), w2 = v2.dim(3);
    int64_t hw = h2 * w2;
    double* ga = a->ensure_grad().data();
    const double* g = node.grad.data();
    for (int64_t in = 0; in < n2; ++in)
      for (int64_t ic = c0; ic < c1; ++ic) {
        double* dst = ga + (in * c + ic) * hw;
        const double* src = g + (in * (c1 - c0) + (ic - c0)) * hw;
        for (int64_t i = 0; i < hw; ++i) dst[i] += src[i];
      }
  });
}

Var crop2d_center(const Var& a, int64_t h, int64_t w) {
  const Tensor& v = a->value;
  if (v.ndim() != 4) throw std::invalid_argument("crop2d_center expects NCHW");
  int64_t n = v.dim(0), c = v.dim(1), ih = v.dim(2), iw = v.dim(3);
  if (h > ih || w > iw) throw std::invalid_argument("crop2d_center: target larger than input");
  if (h == ih && w == iw) return a;
  int64_t oh = (ih - h) / 2, ow = (iw - w) / 2;
  Tensor out({n, c, h, w});
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = 0; ic < c; ++ic)
      for (int64_t y = 0; y < h; ++y) {
        const double* src = v.data() + ((in * c + ic) * ih + (y + oh)) * iw + ow;
        double* dst = out.data() + ((in * c + ic) * h + y) * w;
        for (int64_t x = 0; x < w; ++x) dst[x] = src[x];
      }
  return make_op(std::move(out), {a}, [a, h, w, oh, ow](Node& node) {
    const Tensor& v2 = a->value;
    int64_t n2 = v2.dim(0), c2 = v2.dim(1), ih2 = v2.dim(2), iw2 = v2.dim(3);
    double* ga = a->ensure_grad().data();
    const double* g = node.grad.data();
    for (int64_t in = 0; in < n2; ++in)
      for (int64_t ic = 0; ic < c2; ++ic)
        for (int64_t y = 0; y < h; ++y) {
          double* dst = ga + ((in * c2 + ic) * ih2 + (y + oh)) * iw2 + ow;
          const double* src = g + ((in * c2 + ic) * h + y) * w;
          for (int64_t x = 0; x < w; ++x) dst[x] += src[x];
        }
  });
}

}  // namespace licq
