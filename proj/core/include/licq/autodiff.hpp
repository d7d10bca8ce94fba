// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "licq/random.hpp"
#include "licq/tensor.hpp"

namespace licq {

// Reverse-mode autodiff over a dynamic tape of Tensor nodes. A forward pass
// builds a DAG of Nodes; backward(root) runs the recorded closures in
// reverse topological order and accumulates into Node::grad. When grads are
// globally disabled (NoGradGuard) ops produce detached nodes that hold no
// parents, so evaluation-mode forwards allocate nothing beyond their values.
struct Node {
  Tensor value;
  Tensor grad;  // lazily allocated, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  bool has_grad() const { return !grad.empty(); }
  Tensor& ensure_grad() {
    if (grad.empty()) grad = Tensor::zeros(value.shape());
    return grad;
  }
  void zero_grad() {
    if (!grad.empty()) grad.fill(0.0);
  }
};

using Var = std::shared_ptr<Node>;

bool grad_enabled();
void set_grad_enabled(bool on);

struct NoGradGuard {
  NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// A trainable parameter (leaf that accumulates gradients).
Var make_param(Tensor value);
// A value that never requires gradients.
Var make_const(Tensor value);
// Wraps an op result: requires_grad is inherited from parents and the
// closure is dropped entirely when grads are disabled.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Runs reverse-mode accumulation from a scalar root (seeds d(root)/d(root)=1).
void backward(const Var& root);

// --- elementwise / reduction ops -----------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var add_scalar(const Var& a, double c);
Var mul_scalar(const Var& a, double c);
Var exp_v(const Var& a);
Var log_v(const Var& a);
Var softplus_v(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var sum_all(const Var& a);  // -> scalar

// Mean over all elements of (255*(a-b))^2; the distortion term of the
// rate-distortion objective, with intensities accounted on the 0-255 scale.
Var mse255(const Var& a, const Tensor& reference);

// -sum(log2(p)) -> scalar; total code length in bits for likelihoods p.
Var neg_log2_sum(const Var& p);

// max(a, bound) with the directional gradient rule: the gradient passes
// where a >= bound, and also where it would push a upward out of the
// clamped region. Keeps floored likelihoods trainable.
Var lower_bound(const Var& a, double bound);

// x + U(-0.5, 0.5) noise, gradient passes through unchanged (the additive
// relaxation of rounding used in train mode).
Var add_uniform_noise(const Var& a, Rng& rng);

// Elementwise round-to-nearest (ties to even); gradient is zero. Eval only.
Var hard_round(const Var& a);

// --- shape ops -------------------------------------------------------------

// Channels [c0, c1) of an (N,C,H,W) tensor.
Var channel_slice(const Var& a, int64_t c0, int64_t c1);
// Center crop of an (N,C,H,W) tensor to (h, w); backward zero-pads.
Var crop2d_center(const Var& a, int64_t h, int64_t w);

}  // namespace licq
