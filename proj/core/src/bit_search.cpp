// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/bit_search.hpp"

#include <cmath>
#include <stdexcept>

namespace licq {

namespace {

void check_options(const SearchOptions& opts) {
  if (!(opts.cr_target > 0.0 && opts.cr_target <= 1.0))
    throw std::invalid_argument("search: cr_target must be in (0, 1]");
  if (!(opts.beta_init > 0.0)) throw std::invalid_argument("search: beta_init must be positive");
  if (opts.max_iterations < 1) throw std::invalid_argument("search: max_iterations must be >= 1");
}

}  // namespace

SearchResult adaptive_search(const CrEvalFn& eval, const SearchOptions& opts) {
  check_options(opts);
  SearchResult res;
  double beta = opts.beta_init;
  double alpha = 1.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    auto [cr, assignment] = eval(beta);
    res.state.history.push_back({it, beta, alpha, cr, assignment.bits});
    res.state.iteration = it;
    res.state.cr = cr;
    res.assignment = std::move(assignment);
    if (std::abs(cr - opts.cr_target) <= kCrBand) {
      res.converged = true;
      break;
    }
    if (cr <= opts.cr_target) {
      // Overshot below the target: back out the last increment, refine.
      beta = std::max(beta - alpha, kBetaFloor);
      alpha *= 0.1;
      beta += alpha;
    } else {
      if (std::abs(cr - opts.cr_target) >= 0.25)
        alpha *= 5.0;
      else if (std::abs(cr - opts.cr_target) >= 0.10)
        alpha *= 2.0;
      beta += alpha;
    }
  }
  res.state.beta = beta;
  res.state.alpha_beta = alpha;
  return res;
}

SearchResult exhaustive_search(const CrEvalFn& eval, const SearchOptions& opts) {
  check_options(opts);
  if (!(opts.step > 0.0)) throw std::invalid_argument("search: step must be positive");
  SearchResult res;
  double beta = opts.beta_init;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    auto [cr, assignment] = eval(beta);
    res.state.history.push_back({it, beta, opts.step, cr, assignment.bits});
    res.state.iteration = it;
    res.state.cr = cr;
    res.assignment = std::move(assignment);
    if (std::abs(cr - opts.cr_target) <= kCrBand) {
      res.converged = true;
      break;
    }
    beta += opts.step;
  }
  res.state.beta = beta;
  res.state.alpha_beta = opts.step;
  return res;
}

namespace {

CrEvalFn bind_model_eval(SensitivityAnalyzer& analyzer, const LicModel& model, int b_max,
                         int jobs) {
  const auto layers = list_quantizable_layers(model);
  return [&analyzer, layers, b_max, jobs](double beta) {
    BitAssignment a = assign_bits(analyzer, beta, b_max, jobs);
    return std::make_pair(compression_ratio(layers, a), std::move(a));
  };
}

}  // namespace

SearchResult adaptive_search(SensitivityAnalyzer& analyzer, const LicModel& model,
                             const SearchOptions& opts, int b_max, int jobs) {
  return adaptive_search(bind_model_eval(analyzer, model, b_max, jobs), opts);
}

SearchResult exhaustive_search(SensitivityAnalyzer& analyzer, const LicModel& model,
                               const SearchOptions& opts, int b_max, int jobs) {
  return exhaustive_search(bind_model_eval(analyzer, model, b_max, jobs), opts);
}

}  // namespace licq
