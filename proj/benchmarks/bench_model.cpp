// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "licq/sensitivity.hpp"

using namespace licq;

namespace {

Tensor random_batch(int64_t n, int64_t hw, uint64_t seed) {
  Rng rng(seed);
  Tensor b({n, 3, hw, hw});
  for (int64_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(0.0, 1.0);
  return b;
}

}  // namespace

static void BM_EvalForward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  LicModel m = build_model(Variant::kMeanScaleHyperprior,
                           WidthConfig{width, width, width / 2}, 2, 1);
  Tensor batch = random_batch(1, 64, 2);
  for (auto _ : state) {
    RDMetrics r = eval_rd(m, batch);
    benchmark::DoNotOptimize(r.loss);
  }
}
BENCHMARK(BM_EvalForward)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  LicModel m = build_model(Variant::kMeanScaleHyperprior,
                           WidthConfig{width, width, width / 2}, 2, 1);
  Tensor batch = random_batch(4, 64, 3);
  Rng noise(4);
  for (auto _ : state) {
    for (const auto& p : m.parameters()) p->zero_grad();
    auto out = forward_compress(m, batch, Mode::kTrain, &noise);
    RDGraph g =
        rd_loss_graph(out.reconstruction, batch, out.likelihoods_y, out.likelihoods_z, m.lambda);
    backward(g.loss);
    benchmark::DoNotOptimize(g.loss->value[0]);
  }
}
BENCHMARK(BM_TrainStep)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_SensitivityProbe(benchmark::State& state) {
  LicModel m = build_model(Variant::kMeanScaleHyperprior, WidthConfig{16, 16, 8}, 2, 1);
  Tensor calib = random_batch(4, 64, 5);
  const double rd_full = eval_rd(m, calib).loss;
  for (auto _ : state) {
    SensitivityRecord r = sensitivity(m, 3, 6, calib, rd_full);
    benchmark::DoNotOptimize(r.zeta);
  }
}
BENCHMARK(BM_SensitivityProbe)->Unit(benchmark::kMillisecond);
