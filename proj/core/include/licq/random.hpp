// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace licq {

// Deterministic random source. All stochastic code in the toolkit draws
// through this wrapper instead of <random> distributions, whose output is
// implementation-defined; the sequences here are reproducible bit-for-bit
// for a given seed on any conforming platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed), seed_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53 random mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is negligible for n << 2^64 and
  // the result is deterministic, which is what matters here.
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(gen_() % static_cast<uint64_t>(n));
  }

  double normal();

  // Derives an independent seed for a sub-stream (e.g. one per epoch). Pure
  // in (seed, stream), so interrupted runs can rebuild the same streams.
  uint64_t fork(uint64_t stream) const { return derive_seed(seed_, stream); }

  static uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t x = base ^ (0x9e3779b97f4a7c15ull * (stream + 1));
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27; x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
  }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates with explicit draws; std::shuffle is implementation-defined.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
  for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
    int64_t j = rng.uniform_int(i + 1);
    std::swap(v[i], v[j]);
  }
}

}  // namespace licq
