// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <mutex>

#include "licq/bit_assignment.hpp"
#include "licq/model.hpp"

namespace licq {

// Outcome of quantizing exactly one layer's weights at one width and
// re-evaluating the rate-distortion loss on the calibration set.
struct SensitivityRecord {
  int layer_index = 0;
  int bits = 0;
  double rd_full = 0.0;
  double rd_quant = 0.0;
  double zeta = 0.0;  // |rd_quant - rd_full| / rd_full * 100, in percent
};

// Quantizes layer `layer_index`'s weights (freshly min-max calibrated
// per-channel at `bits`), leaves every other layer and all activations at
// full precision, and measures the calibration RD loss in eval mode. The
// model is never modified. rd_full < 0 means "compute it here".
SensitivityRecord sensitivity(const LicModel& model, int layer_index, int bits,
                              const Tensor& calib_batch, double rd_full = -1.0);

// Binds a model to a calibration batch and caches one SensitivityRecord per
// (layer, bits). Lookups are thread-safe; distinct pairs may be evaluated
// concurrently.
class SensitivityAnalyzer {
 public:
  SensitivityAnalyzer(const LicModel& model, Tensor calib_batch);

  double rd_full() const { return rd_full_; }
  int layer_count() const { return static_cast<int>(layer_specs_.size()); }
  uint64_t calib_hash() const { return calib_hash_; }

  double zeta(int layer_index, int bits);
  SensitivityRecord record(int layer_index, int bits);

  // Cached records in (layer, bits) order.
  std::vector<SensitivityRecord> table() const;
  // Seeds the cache with previously computed records (callers are
  // responsible for keying stored tables by model and calibration hashes).
  void preload(const std::vector<SensitivityRecord>& records);
  void clear_cache();
  size_t cache_size() const;
  // Number of single-layer RD evaluations performed (cache misses).
  size_t evaluations() const { return evals_; }

 private:
  const LicModel& model_;
  Tensor calib_;
  std::vector<LayerSpec> layer_specs_;
  double rd_full_ = 0.0;
  uint64_t calib_hash_ = 0;
  mutable std::mutex mu_;
  std::map<std::pair<int, int>, SensitivityRecord> cache_;
  size_t evals_ = 0;
};

// Sensitivity source for the assignment scan; tests may inject tables.
using ZetaFn = std::function<double(int layer_index, int bits)>;

// Per-layer descending scan: starting from b_max, a layer keeps the first
// width whose zeta crosses the tolerance, assigning the last width that
// stayed below it (b_max itself if even b_max crosses; 2 if none does).
// Layers are independent.
BitAssignment assign_bits(const ZetaFn& zeta, int layer_count, double beta_percent, int b_max,
                          int jobs = 1);

BitAssignment assign_bits(SensitivityAnalyzer& analyzer, double beta_percent, int b_max = 8,
                          int jobs = 1);

}  // namespace licq
