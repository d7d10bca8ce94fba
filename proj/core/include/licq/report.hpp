// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "licq/bit_search.hpp"
#include "licq/metrics.hpp"
#include "licq/sensitivity.hpp"

namespace licq {

// CSV columns: layer,bits,rd_full,rd_quant,zeta
void write_zeta_csv(const std::string& path, const std::vector<SensitivityRecord>& records);

// CSV columns: iteration,beta,alpha_beta,cr
void write_trace_csv(const std::string& path, const std::vector<SearchTraceEntry>& history);
std::string trace_to_json(const SearchResult& result);

// CSV columns: quality,lambda,bpp,psnr
void write_rd_csv(const std::string& path, const std::vector<RDCurve>& curves);

std::string assignment_to_json(const BitAssignment& a);
BitAssignment assignment_from_json_file(const std::string& path);

struct BdSummaryEntry {
  std::string method;
  std::string dataset;
  double bd_rate_percent = 0.0;
  double model_size_mb = 0.0;
};
std::string bd_summary_to_json(const std::vector<BdSummaryEntry>& entries,
                               const std::string& config_text);

// Minimal standalone SVG plots.
void write_svg_rd_curves(const std::string& path, const std::vector<RDCurve>& curves);
void write_svg_bit_distribution(const std::string& path, const BitDistributionReport& report);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace licq
