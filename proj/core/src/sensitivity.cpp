// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/sensitivity.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "licq/quant_ops.hpp"

namespace licq {

SensitivityRecord sensitivity(const LicModel& model, int layer_index, int bits,
                              const Tensor& calib_batch, double rd_full) {
  if (calib_batch.empty()) throw std::invalid_argument("sensitivity: empty calibration batch");
  const auto specs = list_quantizable_layers(model);
  bool found = false;
  for (const auto& s : specs) found = found || s.index == layer_index;
  if (!found) throw std::invalid_argument("sensitivity: no such layer");

  if (rd_full < 0.0) rd_full = eval_rd(model, calib_batch).loss;
  if (!(rd_full > 0.0)) throw std::runtime_error("sensitivity: rd_full must be positive");

  const Tensor& w = model.layer(layer_index).weight->value;
  Tensor wq = quantize_affine(w, calibrate_params(w, bits, Granularity::kPerChannel));
  std::map<int, Tensor> override;
  override.emplace(layer_index, std::move(wq));
  ForwardHooks hooks;
  hooks.weight_override = &override;
  const double rd_quant = eval_rd(model, calib_batch, &hooks).loss;

  SensitivityRecord r;
  r.layer_index = layer_index;
  r.bits = bits;
  r.rd_full = rd_full;
  r.rd_quant = rd_quant;
  r.zeta = std::abs(rd_quant - rd_full) / rd_full * 100.0;
  return r;
}

SensitivityAnalyzer::SensitivityAnalyzer(const LicModel& model, Tensor calib_batch)
    : model_(model), calib_(std::move(calib_batch)) {
  if (calib_.empty()) throw std::invalid_argument("SensitivityAnalyzer: empty calibration batch");
  layer_specs_ = list_quantizable_layers(model_);
  rd_full_ = eval_rd(model_, calib_).loss;
  if (!(rd_full_ > 0.0))
    throw std::runtime_error("SensitivityAnalyzer: full-precision RD loss must be positive");
  // FNV-1a over the calibration bytes; identifies the (model-independent)
  // cache domain in exports.
  uint64_t h = 1469598103934665603ull;
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(calib_.data());
  for (int64_t i = 0; i < calib_.size() * static_cast<int64_t>(sizeof(double)); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  calib_hash_ = h;
}

double SensitivityAnalyzer::zeta(int layer_index, int bits) {
  return record(layer_index, bits).zeta;
}

SensitivityRecord SensitivityAnalyzer::record(int layer_index, int bits) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find({layer_index, bits});
    if (it != cache_.end()) return it->second;
  }
  SensitivityRecord r = sensitivity(model_, layer_index, bits, calib_, rd_full_);
  std::lock_guard<std::mutex> lk(mu_);
  auto [it, inserted] = cache_.emplace(std::make_pair(layer_index, bits), r);
  if (inserted) ++evals_;
  return it->second;
}

std::vector<SensitivityRecord> SensitivityAnalyzer::table() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<SensitivityRecord> out;
  out.reserve(cache_.size());
  for (const auto& [_, r] : cache_) out.push_back(r);
  return out;
}

void SensitivityAnalyzer::preload(const std::vector<SensitivityRecord>& records) {
  std::lock_guard<std::mutex> lk(mu_);
  for (const auto& r : records) cache_.emplace(std::make_pair(r.layer_index, r.bits), r);
}

void SensitivityAnalyzer::clear_cache() {
  std::lock_guard<std::mutex> lk(mu_);
  cache_.clear();
}

size_t SensitivityAnalyzer::cache_size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return cache_.size();
}

namespace {

int scan_layer(const ZetaFn& zeta, int layer, double beta_percent, int b_max) {
  for (int b = b_max; b >= BitAssignment::kMinBits; --b) {
    if (zeta(layer, b) >= beta_percent)
      return b == b_max ? b_max : b + 1;  // last width that stayed below beta
  }
  return BitAssignment::kMinBits;
}

}  // namespace

BitAssignment assign_bits(const ZetaFn& zeta, int layer_count, double beta_percent, int b_max,
                          int jobs) {
  if (!(beta_percent > 0.0)) throw std::invalid_argument("assign_bits: beta must be positive");
  if (b_max < BitAssignment::kMinBits) throw std::invalid_argument("assign_bits: b_max < 2");
  if (layer_count <= 0) throw std::invalid_argument("assign_bits: no layers");

  BitAssignment out;
  out.b_max = b_max;
  out.beta_used = beta_percent;
  out.bits.assign(static_cast<size_t>(layer_count), b_max);

  if (jobs <= 1) {
    for (int n = 0; n < layer_count; ++n)
      out.bits[static_cast<size_t>(n)] = scan_layer(zeta, n, beta_percent, b_max);
    return out;
  }

  std::vector<std::thread> workers;
  std::mutex next_mu;
  int next = 0;
  auto work = [&]() {
    for (;;) {
      int n;
      {
        std::lock_guard<std::mutex> lk(next_mu);
        if (next >= layer_count) return;
        n = next++;
      }
      out.bits[static_cast<size_t>(n)] = scan_layer(zeta, n, beta_percent, b_max);
    }
  };
  const int nthreads = std::min(jobs, layer_count);
  workers.reserve(static_cast<size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) workers.emplace_back(work);
  for (auto& t : workers) t.join();
  return out;
}

BitAssignment assign_bits(SensitivityAnalyzer& analyzer, double beta_percent, int b_max,
                          int jobs) {
  // Layer indices are contiguous from 0, so the scan index is the layer index.
  ZetaFn fn = [&analyzer](int layer, int bits) { return analyzer.zeta(layer, bits); };
  return assign_bits(fn, analyzer.layer_count(), beta_percent, b_max, jobs);
}

}  // namespace licq
