// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "licq/dataset.hpp"
#include "licq/image.hpp"

namespace licq {

double psnr_from_mse255(double mse) {
  if (!(mse > 0.0)) return kPsnrCap;
  const double v = 10.0 * std::log10(255.0 * 255.0 / mse);
  return std::min(v, kPsnrCap);
}

void RDCurve::validate() const {
  if (points.size() < 2) throw std::invalid_argument("RDCurve: need at least 2 points");
  for (size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].bpp > 0.0) || !std::isfinite(points[i].psnr_db))
      throw std::invalid_argument("RDCurve: invalid point");
    if (i > 0 && !(points[i].bpp > points[i - 1].bpp))
      throw std::invalid_argument("RDCurve: bpp must be strictly increasing");
  }
}

RDCurve RDCurve::from_points(std::vector<RDPoint> pts, std::string label) {
  std::sort(pts.begin(), pts.end(), [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
  RDCurve c{std::move(pts), std::move(label)};
  c.validate();
  return c;
}

namespace {

template <typename EvalOne>
EvalSummary evaluate_images(const std::vector<Tensor>& images, double lambda, int jobs,
                            const EvalOne& eval_one) {
  if (images.empty()) throw std::invalid_argument("evaluate_model: no images");
  EvalSummary s;
  s.per_image.resize(images.size());

  auto worker_range = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) s.per_image[i] = eval_one(images[i]);
  };
  if (jobs <= 1 || images.size() == 1) {
    worker_range(0, images.size());
  } else {
    const size_t nthreads = std::min<size_t>(static_cast<size_t>(jobs), images.size());
    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    const size_t chunk = (images.size() + nthreads - 1) / nthreads;
    for (size_t t = 0; t < nthreads; ++t) {
      const size_t lo = t * chunk;
      const size_t hi = std::min(images.size(), lo + chunk);
      if (lo < hi) threads.emplace_back(worker_range, lo, hi);
    }
    for (auto& th : threads) th.join();
  }

  for (const auto& m : s.per_image) {
    s.mean_bpp += m.rate_bpp;
    s.mean_psnr_db += psnr_from_mse255(m.distortion);
  }
  s.mean_bpp /= static_cast<double>(images.size());
  s.mean_psnr_db /= static_cast<double>(images.size());
  (void)lambda;
  return s;
}

// Pads, runs fwd, and measures on the unpadded region. bpp counts every
// coded latent bit but divides by the original pixel count, since the padded
// latents are what a real coder would have to transmit.
template <typename Forward>
RDMetrics eval_one_image(const Tensor& image, int stride_multiple, double lambda,
                         const Forward& forward) {
  const int64_t h = image.dim(1), w = image.dim(2);
  Tensor padded = pad_to_multiple_reflect(image, stride_multiple);
  Tensor batch = padded.reshaped({1, 3, padded.dim(1), padded.dim(2)});

  NoGradGuard ng;
  auto out = forward(batch);

  double bits = 0.0;
  const Tensor& ly = out.likelihoods_y->value;
  const Tensor& lz = out.likelihoods_z->value;
  for (int64_t i = 0; i < ly.size(); ++i) bits -= std::log2(ly[i]);
  for (int64_t i = 0; i < lz.size(); ++i) bits -= std::log2(lz[i]);

  const Tensor& rec = out.reconstruction->value;
  double mse = 0.0;
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        double r = rec.data()[(c * padded.dim(1) + y) * padded.dim(2) + x];
        r = r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
        const double d = 255.0 * (r - image.data()[(c * h + y) * w + x]);
        mse += d * d;
      }
  mse /= static_cast<double>(3 * h * w);

  RDMetrics m;
  m.rate_bpp = bits / static_cast<double>(h * w);
  m.distortion = mse;
  m.lambda = lambda;
  m.loss = m.rate_bpp + lambda * mse;
  return m;
}

}  // namespace

EvalSummary evaluate_model(const LicModel& model, const std::vector<Tensor>& images, int jobs) {
  return evaluate_images(images, model.lambda, jobs, [&](const Tensor& img) {
    return eval_one_image(img, model.downsampling_factor(), model.lambda, [&](const Tensor& b) {
      return forward_compress(model, b, Mode::kEval);
    });
  });
}

EvalSummary evaluate_model(const QuantizedModel& qmodel, const std::vector<Tensor>& images,
                           int jobs) {
  return evaluate_images(images, qmodel.model.lambda, jobs, [&](const Tensor& img) {
    return eval_one_image(img, qmodel.model.downsampling_factor(), qmodel.model.lambda,
                          [&](const Tensor& b) { return forward_quantized(qmodel, b, Mode::kEval); });
  });
}

EvalSummary evaluate_model_dir(const LicModel& model, const std::string& image_dir, int jobs) {
  int skipped = 0;
  auto images = load_images(list_image_files(image_dir), &skipped);
  EvalSummary s = evaluate_model(model, images, jobs);
  s.skipped = skipped;
  return s;
}

EvalSummary evaluate_model_dir(const QuantizedModel& qmodel, const std::string& image_dir,
                               int jobs) {
  int skipped = 0;
  auto images = load_images(list_image_files(image_dir), &skipped);
  EvalSummary s = evaluate_model(qmodel, images, jobs);
  s.skipped = skipped;
  return s;
}

namespace {

// Least-squares polynomial fit of y(t), degree <= 3, on pre-scaled t.
// Returns coefficients c0..c_deg.
std::vector<double> polyfit(const std::vector<double>& t, const std::vector<double>& y, int deg) {
  const int n = deg + 1;
  std::vector<long double> ata(static_cast<size_t>(n) * n, 0.0L);
  std::vector<long double> aty(static_cast<size_t>(n), 0.0L);
  for (size_t p = 0; p < t.size(); ++p) {
    long double pw[8];
    pw[0] = 1.0L;
    for (int i = 1; i < n; ++i) pw[i] = pw[i - 1] * t[p];
    for (int i = 0; i < n; ++i) {
      aty[static_cast<size_t>(i)] += pw[i] * y[p];
      for (int j = 0; j < n; ++j) ata[static_cast<size_t>(i) * n + j] += pw[i] * pw[j];
    }
  }
  // Gaussian elimination with partial pivoting.
  std::vector<int> piv(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(static_cast<double>(ata[static_cast<size_t>(r) * n + col])) >
          std::fabs(static_cast<double>(ata[static_cast<size_t>(best) * n + col])))
        best = r;
    if (best != col) {
      for (int j = 0; j < n; ++j)
        std::swap(ata[static_cast<size_t>(col) * n + j], ata[static_cast<size_t>(best) * n + j]);
      std::swap(aty[static_cast<size_t>(col)], aty[static_cast<size_t>(best)]);
    }
    const long double d = ata[static_cast<size_t>(col) * n + col];
    if (d == 0.0L) throw std::runtime_error("bd_rate: singular fit");
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = ata[static_cast<size_t>(r) * n + col] / d;
      for (int j = 0; j < n; ++j)
        ata[static_cast<size_t>(r) * n + j] -= f * ata[static_cast<size_t>(col) * n + j];
      aty[static_cast<size_t>(r)] -= f * aty[static_cast<size_t>(col)];
    }
  }
  std::vector<double> c(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    c[static_cast<size_t>(i)] =
        static_cast<double>(aty[static_cast<size_t>(i)] / ata[static_cast<size_t>(i) * n + i]);
  return c;
}

double poly_integral(const std::vector<double>& c, double a, double b) {
  double ia = 0.0, ib = 0.0, pa = a, pb = b;
  for (size_t i = 0; i < c.size(); ++i) {
    ia += c[i] * pa / static_cast<double>(i + 1);
    ib += c[i] * pb / static_cast<double>(i + 1);
    pa *= a;
    pb *= b;
  }
  return ib - ia;
}

struct CurveData {
  std::vector<double> psnr;
  std::vector<double> logr;
};

CurveData curve_data(const RDCurve& c) {
  CurveData d;
  for (const auto& p : c.points) {
    d.psnr.push_back(p.psnr_db);
    d.logr.push_back(std::log10(p.bpp));
  }
  return d;
}

// Fritsch-Carlson monotone hermite slopes, then exact segment integration of
// the hermite cubics over [lo, hi].
double pchip_integral(const CurveData& d, double lo, double hi) {
  const size_t n = d.psnr.size();
  std::vector<double> x = d.psnr, y = d.logr;
  for (size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1]))
      throw std::runtime_error("bd_rate(pchip): PSNR must be strictly increasing");
  std::vector<double> h(n - 1), delta(n - 1), m(n);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0)
      m[i] = 0.0;
    else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  double total = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double a = std::max(lo, x[i]);
    const double b = std::min(hi, x[i + 1]);
    if (!(b > a)) continue;
    // Hermite cubic on [x_i, x_{i+1}] in local coordinate u = x - x_i:
    // y = y_i + m_i u + p2 u^2 + p3 u^3.
    const double p2 = (3.0 * delta[i] - 2.0 * m[i] - m[i + 1]) / h[i];
    const double p3 = (m[i] + m[i + 1] - 2.0 * delta[i]) / (h[i] * h[i]);
    auto anti = [&](double xx) {
      const double u = xx - x[i];
      return y[i] * u + m[i] * u * u / 2.0 + p2 * u * u * u / 3.0 + p3 * u * u * u * u / 4.0;
    };
    total += anti(b) - anti(a);
  }
  return total;
}

}  // namespace

double bd_rate(const RDCurve& reference, const RDCurve& test, BdFit fit) {
  reference.validate();
  test.validate();
  CurveData ref = curve_data(reference);
  CurveData tst = curve_data(test);

  const double lo = std::max(*std::min_element(ref.psnr.begin(), ref.psnr.end()),
                             *std::min_element(tst.psnr.begin(), tst.psnr.end()));
  const double hi = std::min(*std::max_element(ref.psnr.begin(), ref.psnr.end()),
                             *std::max_element(tst.psnr.begin(), tst.psnr.end()));
  if (!(hi > lo)) throw std::invalid_argument("bd_rate: PSNR ranges do not overlap");

  double avg_diff;
  if (fit == BdFit::kCubic) {
    // Shared affine map of PSNR to [-1,1] keeps the normal equations well
    // conditioned and both fits on the same basis.
    const double c = 0.5 * (lo + hi), s = 0.5 * (hi - lo);
    auto scale = [&](std::vector<double> v) {
      for (auto& t : v) t = (t - c) / s;
      return v;
    };
    const auto tr = scale(ref.psnr);
    const auto tt = scale(tst.psnr);
    const int deg_r = std::min<int>(3, static_cast<int>(tr.size()) - 1);
    const int deg_t = std::min<int>(3, static_cast<int>(tt.size()) - 1);
    const auto cr = polyfit(tr, ref.logr, deg_r);
    const auto ct = polyfit(tt, tst.logr, deg_t);
    avg_diff = (poly_integral(ct, -1.0, 1.0) - poly_integral(cr, -1.0, 1.0)) / 2.0;
  } else {
    avg_diff = (pchip_integral(tst, lo, hi) - pchip_integral(ref, lo, hi)) / (hi - lo);
  }
  return 100.0 * (std::pow(10.0, avg_diff) - 1.0);
}

BitDistributionReport bit_distribution_report(
    const std::map<int, BitAssignment>& assignments_by_quality,
    const std::vector<LayerSpec>& layers) {
  if (assignments_by_quality.empty())
    throw std::invalid_argument("bit_distribution_report: no assignments");
  const size_t n = layers.size();
  BitDistributionReport r;
  for (const auto& [q, a] : assignments_by_quality) {
    if (a.bits.size() != n)
      throw std::invalid_argument("bit_distribution_report: inconsistent layer counts");
    r.quality_indices.push_back(q);
  }
  r.matrix.assign(n, std::vector<int>(r.quality_indices.size(), 0));
  size_t col = 0;
  for (const auto& [q, a] : assignments_by_quality) {
    for (size_t l = 0; l < n; ++l) r.matrix[l][col] = a.bits[l];
    ++col;
  }
  double main_sum = 0.0, hyper_sum = 0.0;
  int64_t main_n = 0, hyper_n = 0;
  for (size_t l = 0; l < n; ++l) {
    r.path_labels.push_back(path_name(layers[l].path));
    const bool main = layers[l].path == LayerPath::kMainEncoder ||
                      layers[l].path == LayerPath::kMainDecoder;
    for (int b : r.matrix[l]) {
      if (main) {
        main_sum += b;
        ++main_n;
      } else {
        hyper_sum += b;
        ++hyper_n;
      }
    }
  }
  r.mean_main_path_bits = main_n ? main_sum / static_cast<double>(main_n) : 0.0;
  r.mean_hyper_path_bits = hyper_n ? hyper_sum / static_cast<double>(hyper_n) : 0.0;
  r.main_path_ge_hyper_path = r.mean_main_path_bits >= r.mean_hyper_path_bits;
  return r;
}

std::string BitDistributionReport::to_table() const {
  std::ostringstream os;
  os << "layer  path           ";
  for (int q : quality_indices) os << " q" << q;
  os << "\n";
  for (size_t l = 0; l < matrix.size(); ++l) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%-6zu %-15s", l, path_labels[l].c_str());
    os << buf;
    for (int b : matrix[l]) os << "  " << b;
    os << "\n";
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean bits: main-path %.3f, hyper-path %.3f (main >= hyper: %s)\n",
                mean_main_path_bits, mean_hyper_path_bits,
                main_path_ge_hyper_path ? "yes" : "no");
  os << buf;
  return os.str();
}

}  // namespace licq
