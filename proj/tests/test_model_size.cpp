// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "licq/model_size.hpp"
#include "licq/random.hpp"

using namespace licq;

namespace {

LayerSpec spec(int c_out, int c_in, int k) {
  LayerSpec s;
  s.c_out = c_out;
  s.c_in = c_in;
  s.k = k;
  return s;
}

// Independent re-statement of the accounting formula, computed in a
// different order and in floating point before conversion.
uint64_t size_oracle(int c_out, int c_in, int k, int b) {
  const double weights = static_cast<double>(c_out) * c_in * k * k;
  const double bias = c_out;
  const double qparams = 2.0 * 32.0 * c_out;
  return static_cast<uint64_t>((weights + bias) * b + qparams);
}

}  // namespace

TEST_CASE("layer size worked examples") {
  CHECK(layer_size_bits(spec(2, 3, 1), 4) == 160);          // (6+2)*4 + 2*64
  CHECK(layer_size_bits(spec(192, 128, 5), 8) == 4929024);  // (614400+192)*8 + 192*64
  CHECK(layer_size_bits(spec(1, 1, 1), 2) == 68);           // (1+1)*2 + 64
  CHECK_THROWS(layer_size_bits(spec(1, 1, 1), 0));
  CHECK_THROWS(layer_size_bits(spec(1, 1, 1), 1));
}

TEST_CASE("layer size matches the independent oracle on random shapes") {
  Rng rng(30);
  for (int i = 0; i < 2000; ++i) {
    const int c_out = 1 + static_cast<int>(rng.uniform_int(256));
    const int c_in = 1 + static_cast<int>(rng.uniform_int(256));
    const int k = 1 + static_cast<int>(rng.uniform_int(7));
    const int b = 2 + static_cast<int>(rng.uniform_int(7));
    CHECK(layer_size_bits(spec(c_out, c_in, k), b) == size_oracle(c_out, c_in, k, b));
  }
}

TEST_CASE("total bits are additive and strictly monotone in any layer width") {
  std::vector<LayerSpec> layers = {spec(8, 3, 5), spec(16, 8, 5), spec(4, 16, 3)};
  BitAssignment a = BitAssignment::uniform(3, 5);
  uint64_t total = 0;
  for (size_t i = 0; i < layers.size(); ++i) total += layer_size_bits(layers[i], a.bits[i]);

  for (size_t i = 0; i < layers.size(); ++i) {
    BitAssignment up = a;
    up.bits[i] += 1;
    uint64_t total_up = 0;
    for (size_t j = 0; j < layers.size(); ++j) total_up += layer_size_bits(layers[j], up.bits[j]);
    CHECK(total_up > total);
  }
}

TEST_CASE("compression ratio basics") {
  std::vector<LayerSpec> layers = {spec(8, 3, 5), spec(16, 8, 5)};
  CHECK(compression_ratio(layers, BitAssignment::uniform(2, 8)) == 1.0);

  // hand-computed two-layer ratio at (4, 8) vs (8, 8)
  BitAssignment mixed = BitAssignment::uniform(2, 8);
  mixed.bits[0] = 4;
  const double num = static_cast<double>(layer_size_bits(layers[0], 4) + layer_size_bits(layers[1], 8));
  const double den = static_cast<double>(layer_size_bits(layers[0], 8) + layer_size_bits(layers[1], 8));
  CHECK(compression_ratio(layers, mixed) == doctest::Approx(num / den).epsilon(1e-15));

  // quant-param overhead keeps the all-2 ratio above the pure-weight 1/4
  CHECK(compression_ratio(layers, BitAssignment::uniform(2, 2)) > 0.25);

  // empty layer list accounts to zero bits
  uint64_t empty_total = 0;
  for (const auto& l : std::vector<LayerSpec>{}) empty_total += layer_size_bits(l, 8);
  CHECK(empty_total == 0);
}

TEST_CASE("model size report sums the per-layer accounting") {
  LicModel m = build_model(Variant::kMeanScaleHyperprior, WidthConfig{4, 4, 4}, 1, 3);
  const auto layers = list_quantizable_layers(m);
  BitAssignment a = BitAssignment::uniform(layers.size(), 8);
  SizeReport r = model_size_report(m, a);
  CHECK(r.per_layer_bits.size() == layers.size());
  uint64_t hand = 0;
  for (size_t i = 0; i < layers.size(); ++i) {
    CHECK(r.per_layer_bits[i] == layer_size_bits(layers[i], 8));
    hand += r.per_layer_bits[i];
  }
  CHECK(r.total_bits == hand);
  CHECK(r.total_mb == doctest::Approx(static_cast<double>(hand) / (8.0 * 1048576.0)).epsilon(1e-15));
  CHECK(r.cr_vs_8bit == 1.0);

  BitAssignment low = BitAssignment::uniform(layers.size(), 2);
  SizeReport r2 = model_size_report(m, low);
  CHECK(r2.total_bits < r.total_bits);
  CHECK(r2.cr_vs_8bit < 1.0);
  CHECK(r2.unquantized_param_bits == r.unquantized_param_bits);
  CHECK(r2.unquantized_param_bits > 0);
}
