// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>

#include "licq/bit_search.hpp"

using namespace licq;

namespace {

// Synthetic monotone table: cheap stand-in for cached sensitivities.
ZetaFn synthetic_table(int layers) {
  return [layers](int layer, int bits) {
    const double base = 0.05 + 0.4 * static_cast<double>(layer) / layers;
    return base * std::pow(2.2, 8 - bits);
  };
}

CrEvalFn table_eval(int layers) {
  std::vector<LayerSpec> specs;
  for (int i = 0; i < layers; ++i) {
    LayerSpec s;
    s.index = i;
    s.c_out = 32;
    s.c_in = 32;
    s.k = 5;
    specs.push_back(s);
  }
  auto zeta = synthetic_table(layers);
  return [specs, zeta, layers](double beta) {
    BitAssignment a = assign_bits(zeta, layers, beta, 8);
    return std::make_pair(compression_ratio(specs, a), std::move(a));
  };
}

}  // namespace

static void BM_AssignBits(benchmark::State& state) {
  const int layers = static_cast<int>(state.range(0));
  auto zeta = synthetic_table(layers);
  for (auto _ : state) {
    BitAssignment a = assign_bits(zeta, layers, 1.0, 8);
    benchmark::DoNotOptimize(a.bits.data());
  }
}
BENCHMARK(BM_AssignBits)->Arg(14)->Arg(64);

static void BM_AdaptiveSearch(benchmark::State& state) {
  auto eval = table_eval(14);
  SearchOptions opts;
  opts.cr_target = 0.01 * static_cast<double>(state.range(0));
  int64_t iterations = 0;
  for (auto _ : state) {
    auto res = adaptive_search(eval, opts);
    iterations += res.state.iteration;
    benchmark::DoNotOptimize(res.state.cr);
  }
  state.counters["steps"] =
      benchmark::Counter(static_cast<double>(iterations) / state.iterations());
}
BENCHMARK(BM_AdaptiveSearch)->Arg(90)->Arg(75)->Arg(60)->Arg(50);

static void BM_ExhaustiveSearch(benchmark::State& state) {
  auto eval = table_eval(14);
  SearchOptions opts;
  opts.cr_target = 0.01 * static_cast<double>(state.range(0));
  opts.max_iterations = 1000000;
  int64_t iterations = 0;
  for (auto _ : state) {
    auto res = exhaustive_search(eval, opts);
    iterations += res.state.iteration;
    benchmark::DoNotOptimize(res.state.cr);
  }
  state.counters["steps"] =
      benchmark::Counter(static_cast<double>(iterations) / state.iterations());
}
BENCHMARK(BM_ExhaustiveSearch)->Arg(90)->Arg(75)->Arg(60)->Arg(50);
