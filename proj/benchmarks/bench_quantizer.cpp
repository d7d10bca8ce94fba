// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "licq/quant_ops.hpp"
#include "licq/random.hpp"

using namespace licq;

namespace {

Tensor random_weight(int64_t c_out, int64_t c_in, int64_t k, uint64_t seed) {
  Rng rng(seed);
  Tensor w({c_out, c_in, k, k});
  for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-1.0, 1.0);
  return w;
}

}  // namespace

static void BM_QuantizeAffinePerChannel(benchmark::State& state) {
  const int64_t c = state.range(0);
  Tensor w = random_weight(c, c, 5, 1);
  QuantParams p = calibrate_params(w, 8, Granularity::kPerChannel);
  for (auto _ : state) {
    Tensor q = quantize_affine(w, p);
    benchmark::DoNotOptimize(q.data());
  }
  state.SetItemsProcessed(state.iterations() * w.size());
}
BENCHMARK(BM_QuantizeAffinePerChannel)->Arg(16)->Arg(32)->Arg(64);

static void BM_QuantizeAffinePerTensor(benchmark::State& state) {
  const int64_t n = state.range(0);
  Rng rng(2);
  Tensor x({n});
  for (int64_t i = 0; i < n; ++i) x[i] = rng.uniform(-4.0, 4.0);
  QuantParams p = calibrate_params(x, 8, Granularity::kPerTensor);
  for (auto _ : state) {
    Tensor q = quantize_affine(x, p);
    benchmark::DoNotOptimize(q.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_QuantizeAffinePerTensor)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

static void BM_CalibratePerChannel(benchmark::State& state) {
  const int64_t c = state.range(0);
  Tensor w = random_weight(c, c, 5, 3);
  for (auto _ : state) {
    QuantParams p = calibrate_params(w, 8, Granularity::kPerChannel);
    benchmark::DoNotOptimize(p.scale.data());
  }
  state.SetItemsProcessed(state.iterations() * w.size());
}
BENCHMARK(BM_CalibratePerChannel)->Arg(16)->Arg(64);

static void BM_FakeQuantForwardBackward(benchmark::State& state) {
  const int64_t c = state.range(0);
  Tensor w = random_weight(c, c, 5, 4);
  QuantParams p = calibrate_params(w, 8, Granularity::kPerChannel);
  Tensor log_s = p.scale;
  for (int64_t i = 0; i < log_s.size(); ++i) log_s[i] = std::log(log_s[i]);
  Var wv = make_param(w);
  Var sv = make_param(log_s);
  Var zv = make_param(p.zero_point);
  for (auto _ : state) {
    wv->zero_grad();
    sv->zero_grad();
    zv->zero_grad();
    Var out = sum_all(fake_quant_weight(wv, exp_v(sv), zv, 8, 0.01));
    backward(out);
    benchmark::DoNotOptimize(wv->grad.data());
  }
  state.SetItemsProcessed(state.iterations() * w.size());
}
BENCHMARK(BM_FakeQuantForwardBackward)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
