// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "licq/bit_assignment.hpp"
#include "licq/model_size.hpp"
#include "licq/sensitivity.hpp"

namespace licq {

// One search step: the tolerance evaluated, the increment in force when it
// was evaluated, the achieved compression ratio and the assignment summary.
struct SearchTraceEntry {
  int iteration = 0;  // 1-based
  double beta = 0.0;
  double alpha_beta = 0.0;
  double cr = 0.0;
  std::vector<int> bits;
};

struct SearchState {
  double beta = 0.0;        // tolerance after the final update
  double alpha_beta = 1.0;  // increment after the final update
  double cr = 0.0;          // last achieved compression ratio
  int iteration = 0;
  std::vector<SearchTraceEntry> history;
};

struct SearchResult {
  BitAssignment assignment;
  SearchState state;
  bool converged = false;
};

struct SearchOptions {
  double cr_target = 1.0;
  double beta_init = 0.01;   // percent
  int max_iterations = 100;
  double step = 0.01;        // fixed-step sweeps only
};

// |CR - CR_target| band that terminates both searches.
inline constexpr double kCrBand = 0.01;
// Tolerances never drop below this after the overshoot clamp.
inline constexpr double kBetaFloor = 1e-3;

// Evaluates one tolerance: runs the bit assignment and returns the achieved
// compression ratio with it.
using CrEvalFn = std::function<std::pair<double, BitAssignment>(double beta)>;

// Variable-step search over the tolerance. While the model is too large the
// increment grows (x5 beyond 0.25 of target, x2 beyond 0.10); on overshoot
// the last increment is undone (floored at kBetaFloor) and the increment
// shrinks tenfold. Terminates inside the +-kCrBand band or at
// max_iterations (converged=false).
SearchResult adaptive_search(const CrEvalFn& eval, const SearchOptions& opts);

// Fixed-step sweep beta_init, beta_init+step, ... with the same band.
SearchResult exhaustive_search(const CrEvalFn& eval, const SearchOptions& opts);

// Production bindings: assignment via the analyzer's cached sensitivities,
// compression ratio from the accounted layer sizes.
SearchResult adaptive_search(SensitivityAnalyzer& analyzer, const LicModel& model,
                             const SearchOptions& opts, int b_max = 8, int jobs = 1);
SearchResult exhaustive_search(SensitivityAnalyzer& analyzer, const LicModel& model,
                               const SearchOptions& opts, int b_max = 8, int jobs = 1);

}  // namespace licq
