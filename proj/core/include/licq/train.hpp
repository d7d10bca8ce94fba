// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "licq/quantizer.hpp"

namespace licq {

enum class LrSchedule { kConstant, kCosine };

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double lr_weights = 1e-5;  // model parameters
  double lr_quant = 1e-4;    // weight-quantizer parameters
  double lambda = 0.0;       // 0 = take the model's
  uint64_t seed = 0;
  int crop_size = 64;
  LrSchedule schedule = LrSchedule::kConstant;
  bool verbose = false;
  // First epoch index for seeding per-epoch streams; resumed runs continue
  // the exact shuffle/crop/noise sequences of an uninterrupted one.
  int epoch_offset = 0;

  void validate() const;
};

// Defaults for full-precision baseline training.
TrainConfig baseline_defaults();
// Defaults for quantization-aware fine-tuning.
TrainConfig qat_defaults();

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_rate_bpp = 0.0;
  double mean_mse = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  bool diverged = false;
  int steps = 0;
};

// Adaptive-moment optimizer with bias-corrected first/second moments over
// independently scheduled parameter groups.
class AdamOptimizer {
 public:
  struct Group {
    std::vector<Var> params;
    double lr = 1e-4;
  };

  explicit AdamOptimizer(std::vector<Group> groups, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);

  void zero_grad();
  // One update; lr_scale multiplies every group's base rate (scheduling).
  void step(double lr_scale = 1.0);
  int64_t step_count() const { return step_count_; }

  // Moment tensors for checkpointing, in group/param order.
  std::vector<std::pair<std::string, Tensor>> state_tensors() const;
  void load_state(const std::vector<std::pair<std::string, Tensor>>& state);

 private:
  std::vector<Group> groups_;
  std::vector<std::vector<Tensor>> m_, v_;
  double beta1_, beta2_, eps_;
  int64_t step_count_ = 0;
};

// Full-precision training on the rate-distortion loss (train-mode forward,
// additive-noise latents). Deterministic for a fixed seed. On a non-finite
// loss the parameters are restored to the last finite epoch and the result
// is flagged diverged. epochs == 0 leaves the model untouched.
TrainResult train_baseline(LicModel& model, const std::vector<Tensor>& images,
                           const TrainConfig& config, AdamOptimizer* external_opt = nullptr);

// Quantization-aware fine-tuning: jointly trains network weights (and prior)
// at lr_weights and the static weight-quantizer (log s, z) at lr_quant,
// through the surrogate-gradient fake quantizers. The objective is exactly
// the rate-distortion loss; bit-widths never change. Activation quantizers
// are dynamic and have no trainable state.
TrainResult qat_finetune(QuantizedModel& qmodel, const std::vector<Tensor>& images,
                         const TrainConfig& config);

// Deterministic random crop batch used by the training loops (exposed for
// tests). Images are (3,H,W) with H,W >= crop.
Tensor crop_batch(const std::vector<Tensor>& images, const std::vector<size_t>& indices,
                  int crop, Rng& rng, bool random_offsets);

}  // namespace licq
