// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>

#include "licq/quantizer.hpp"

namespace licq {

// Single-file container: magic + schema version, a length-prefixed text
// header (key/value metadata plus a tensor directory of name, dtype, shape,
// offset, byte length), then the concatenated little-endian payloads. The
// format is self-describing: a file can be parsed without the configuration
// that produced it, and save/load round-trips are bitwise.
struct CheckpointData {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const std::string* find_meta(const std::string& key) const;
  const Tensor* find_tensor(const std::string& name) const;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint_raw(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint_raw(const std::string& path);

// Optional quantizer state carried next to the network tensors.
struct QuantizerState {
  BitAssignment assignment;
  int activation_bits = 8;
  double leak = 0.01;
  std::vector<Tensor> log_scales;   // per quantizable layer, (c_out)
  std::vector<Tensor> zero_points;  // per quantizable layer, (c_out)

  static QuantizerState from_model(const QuantizedModel& qm);
};

// Model (+ optional quantizer state) to a file. `extra_meta` entries are
// stored verbatim (e.g. the run configuration); `extra_tensors` may carry
// optimizer state for resumable training.
void save_checkpoint(const std::string& path, const LicModel& model,
                     const std::optional<QuantizerState>& quant = std::nullopt,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta = {},
                     const std::vector<std::pair<std::string, Tensor>>& extra_tensors = {});

void save_checkpoint(const std::string& path, const QuantizedModel& qmodel,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta = {});

struct LoadedCheckpoint {
  LicModel model;
  std::optional<QuantizerState> quant;
  CheckpointData raw;

  // Rebuilds the QuantizedModel exactly as stored (no recalibration).
  QuantizedModel to_quantized() const;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace licq
