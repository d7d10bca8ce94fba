// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace licq {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

void write_zeta_csv(const std::string& path, const std::vector<SensitivityRecord>& records) {
  std::ostringstream os;
  os.precision(12);
  os << "layer,bits,rd_full,rd_quant,zeta\n";
  for (const auto& r : records)
    os << r.layer_index << "," << r.bits << "," << r.rd_full << "," << r.rd_quant << "," << r.zeta
       << "\n";
  write_text_file(path, os.str());
}

void write_trace_csv(const std::string& path, const std::vector<SearchTraceEntry>& history) {
  std::ostringstream os;
  os.precision(12);
  os << "iteration,beta,alpha_beta,cr\n";
  for (const auto& e : history)
    os << e.iteration << "," << e.beta << "," << e.alpha_beta << "," << e.cr << "\n";
  write_text_file(path, os.str());
}

std::string trace_to_json(const SearchResult& result) {
  json j;
  j["converged"] = result.converged;
  j["iterations"] = result.state.iteration;
  j["final_cr"] = result.state.cr;
  j["assignment"] = result.assignment.bits;
  j["beta_used"] = result.assignment.beta_used;
  json hist = json::array();
  for (const auto& e : result.state.history)
    hist.push_back({{"iteration", e.iteration},
                    {"beta", e.beta},
                    {"alpha_beta", e.alpha_beta},
                    {"cr", e.cr}});
  j["history"] = std::move(hist);
  return j.dump(2);
}

void write_rd_csv(const std::string& path, const std::vector<RDCurve>& curves) {
  std::ostringstream os;
  os.precision(12);
  os << "label,quality,lambda,bpp,psnr\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      os << c.label << "," << p.quality_index << "," << p.lambda << "," << p.bpp << ","
         << p.psnr_db << "\n";
  write_text_file(path, os.str());
}

std::string assignment_to_json(const BitAssignment& a) {
  json j;
  json bits = json::object();
  for (size_t i = 0; i < a.bits.size(); ++i) bits[std::to_string(i)] = a.bits[i];
  j["bits"] = std::move(bits);
  j["beta_used"] = a.beta_used;
  j["candidate_set"] = {{"min", BitAssignment::kMinBits}, {"max", a.b_max}};
  return j.dump(2);
}

BitAssignment assignment_from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open assignment " + path);
  json j;
  is >> j;
  BitAssignment a;
  a.b_max = j.at("candidate_set").at("max").get<int>();
  a.beta_used = j.value("beta_used", 0.0);
  const auto& bits = j.at("bits");
  a.bits.resize(bits.size());
  for (auto it = bits.begin(); it != bits.end(); ++it) {
    const size_t idx = std::stoul(it.key());
    if (idx >= a.bits.size()) throw std::runtime_error("assignment: non-contiguous layer indices");
    a.bits[idx] = it.value().get<int>();
  }
  a.validate();
  return a;
}

std::string bd_summary_to_json(const std::vector<BdSummaryEntry>& entries,
                               const std::string& config_text) {
  json j;
  json rows = json::array();
  for (const auto& e : entries)
    rows.push_back({{"method", e.method},
                    {"dataset", e.dataset},
                    {"bd_rate_percent", e.bd_rate_percent},
                    {"model_size_mb", e.model_size_mb}});
  j["results"] = std::move(rows);
  j["config"] = config_text;
  return j.dump(2);
}

namespace {

struct SvgCanvas {
  std::ostringstream body;
  int width, height;

  SvgCanvas(int w, int h) : width(w), height(h) {}

  std::string finish() {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body.str() << "</svg>\n";
    return os.str();
  }
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void write_svg_rd_curves(const std::string& path, const std::vector<RDCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("write_svg_rd_curves: no curves");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      xmin = std::min(xmin, p.bpp);
      xmax = std::max(xmax, p.bpp);
      ymin = std::min(ymin, p.psnr_db);
      ymax = std::max(ymax, p.psnr_db);
    }
  if (xmax <= xmin) xmax = xmin + 1e-6;
  if (ymax <= ymin) ymax = ymin + 1e-6;
  const double xpad = 0.06 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  const int W = 640, H = 480, L = 70, R = 20, T = 20, B = 50;
  SvgCanvas svg(W, H);
  auto X = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto Y = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };

  svg.body << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\""
           << (H - T - B) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double vx = xmin + (xmax - xmin) * i / 5.0;
    const double vy = ymin + (ymax - ymin) * i / 5.0;
    svg.body << "<text x=\"" << X(vx) << "\" y=\"" << (H - B + 18)
             << "\" font-size=\"11\" text-anchor=\"middle\">" << std::round(vx * 1000) / 1000.0
             << "</text>\n";
    svg.body << "<text x=\"" << (L - 8) << "\" y=\"" << (Y(vy) + 4)
             << "\" font-size=\"11\" text-anchor=\"end\">" << std::round(vy * 100) / 100.0
             << "</text>\n";
  }
  svg.body << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (H - 12)
           << "\" font-size=\"13\" text-anchor=\"middle\">bits per pixel</text>\n";
  svg.body << "<text x=\"16\" y=\"" << (T + (H - T - B) / 2)
           << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
           << (T + (H - T - B) / 2) << ")\">PSNR (dB)</text>\n";

  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const char* color = kPalette[ci % 6];
    std::ostringstream pts;
    for (const auto& p : curves[ci].points) pts << X(p.bpp) << "," << Y(p.psnr_db) << " ";
    svg.body << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
             << "\" stroke-width=\"1.6\"/>\n";
    for (const auto& p : curves[ci].points)
      svg.body << "<circle cx=\"" << X(p.bpp) << "\" cy=\"" << Y(p.psnr_db)
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    svg.body << "<text x=\"" << (L + 10) << "\" y=\"" << (T + 16 + 16 * static_cast<int>(ci))
             << "\" font-size=\"12\" fill=\"" << color << "\">" << curves[ci].label << "</text>\n";
  }
  write_text_file(path, svg.finish());
}

void write_svg_bit_distribution(const std::string& path, const BitDistributionReport& report) {
  const size_t layers = report.matrix.size();
  const size_t cols = report.quality_indices.size();
  if (!layers || !cols) throw std::invalid_argument("write_svg_bit_distribution: empty report");
  const int W = 760, H = 360, L = 50, R = 20, T = 24, B = 60;
  SvgCanvas svg(W, H);
  const double group_w = static_cast<double>(W - L - R) / static_cast<double>(layers);
  const double bar_w = group_w / (static_cast<double>(cols) + 1.0);
  const int bmax = 8;
  auto Y = [&](double bits) { return H - B - bits / bmax * (H - T - B); };

  for (int b = 0; b <= bmax; b += 2)
    svg.body << "<text x=\"" << (L - 8) << "\" y=\"" << (Y(b) + 4)
             << "\" font-size=\"11\" text-anchor=\"end\">" << b << "</text>\n";
  for (size_t l = 0; l < layers; ++l) {
    for (size_t c = 0; c < cols; ++c) {
      const double x = L + group_w * static_cast<double>(l) + bar_w * (static_cast<double>(c) + 0.5);
      const int bits = report.matrix[l][c];
      svg.body << "<rect x=\"" << x << "\" y=\"" << Y(bits) << "\" width=\"" << bar_w * 0.9
               << "\" height=\"" << (Y(0) - Y(bits)) << "\" fill=\"" << kPalette[c % 6]
               << "\"/>\n";
    }
    svg.body << "<text x=\"" << (L + group_w * (static_cast<double>(l) + 0.5)) << "\" y=\""
             << (H - B + 16) << "\" font-size=\"11\" text-anchor=\"middle\">" << l << "</text>\n";
  }
  for (size_t c = 0; c < cols; ++c)
    svg.body << "<text x=\"" << (L + 10 + 60 * static_cast<int>(c)) << "\" y=\"" << (T - 8)
             << "\" font-size=\"12\" fill=\"" << kPalette[c % 6] << "\">q"
             << report.quality_indices[c] << "</text>\n";
  svg.body << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (H - 16)
           << "\" font-size=\"13\" text-anchor=\"middle\">layer index (0-3 enc, 4-7 dec, "
              "8-10 hyper-enc, 11-13 hyper-dec)</text>\n";
  write_text_file(path, svg.finish());
}

}  // namespace licq
