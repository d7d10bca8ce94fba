// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "licq/quantizer.hpp"

namespace licq {

// PSNR in dB for an MSE on the 0-255 intensity scale, capped at 100 dB so
// exact reconstructions stay plottable.
double psnr_from_mse255(double mse);
inline constexpr double kPsnrCap = 100.0;

struct RDPoint {
  double bpp = 0.0;
  double psnr_db = 0.0;
  int quality_index = -1;
  double lambda = 0.0;
};

// One rate-distortion curve: >= 2 points, strictly increasing in bpp.
struct RDCurve {
  std::vector<RDPoint> points;
  std::string label;

  void validate() const;
  static RDCurve from_points(std::vector<RDPoint> pts, std::string label);
};

struct EvalSummary {
  double mean_bpp = 0.0;
  double mean_psnr_db = 0.0;
  std::vector<RDMetrics> per_image;
  int skipped = 0;  // unreadable inputs, counted by the directory overload
};

// Per-image eval-mode metrics. Images are padded reflectively to stride
// multiples for the forward pass; PSNR/MSE are computed on the unpadded
// region of the clamped reconstruction and the bpp denominator is the
// unpadded pixel count. Means are unweighted over images.
EvalSummary evaluate_model(const LicModel& model, const std::vector<Tensor>& images,
                           int jobs = 1);
EvalSummary evaluate_model(const QuantizedModel& qmodel, const std::vector<Tensor>& images,
                           int jobs = 1);
// Directory overload; undecodable files are skipped with a warning.
EvalSummary evaluate_model_dir(const LicModel& model, const std::string& image_dir, int jobs = 1);
EvalSummary evaluate_model_dir(const QuantizedModel& qmodel, const std::string& image_dir,
                               int jobs = 1);

enum class BdFit { kCubic, kPchip };

// Bjontegaard delta rate of `test` against `reference`, in percent; positive
// means the test curve spends more rate at equal quality. log10-rate is
// fitted as a function of PSNR (cubic least squares by default, monotone
// piecewise-cubic-hermite behind the flag) and the difference is integrated
// over the overlapping PSNR interval.
double bd_rate(const RDCurve& reference, const RDCurve& test, BdFit fit = BdFit::kCubic);

// Layer-by-quality bit-width matrix plus path structure summary.
struct BitDistributionReport {
  std::vector<int> quality_indices;             // column order
  std::vector<std::vector<int>> matrix;         // [layer][column]
  std::vector<std::string> path_labels;         // per layer
  double mean_main_path_bits = 0.0;
  double mean_hyper_path_bits = 0.0;
  bool main_path_ge_hyper_path = false;

  std::string to_table() const;
};

BitDistributionReport bit_distribution_report(
    const std::map<int, BitAssignment>& assignments_by_quality,
    const std::vector<LayerSpec>& layers);

}  // namespace licq
