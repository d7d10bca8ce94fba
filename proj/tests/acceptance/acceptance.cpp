// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one self-contained check per numbered criterion, each
// printing a [PASS]/[FAIL] line. Long-running criteria consume a fixture
// (toy dataset + trained baselines) prepared by --setup.

#include <json.hpp>

#include <chrono>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "licq/bit_search.hpp"
#include "licq/checkpoint.hpp"
#include "licq/dataset.hpp"
#include "licq/metrics.hpp"
#include "licq/model_size.hpp"
#include "licq/nn_ops.hpp"
#include "licq/report.hpp"
#include "licq/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace licq;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct Check {
  bool ok = true;
  std::string why;
  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

// ---------------------------------------------------------------- fixture

constexpr int kFixtureQualities[2] = {0, 5};
const WidthConfig kToyWidths{32, 32, 16};
constexpr uint64_t kModelSeed = 42;
constexpr int kBaselineEpochs = 640;
constexpr int kQatEpochs = 25;

struct Fixture {
  fs::path cache;
  fs::path train_dir() const { return cache / "train"; }
  fs::path holdout_dir() const { return cache / "holdout"; }
  fs::path baseline(int q) const {
    return cache / ("baseline_q" + std::to_string(q) + ".ckpt");
  }
  fs::path marker() const { return cache / "fixture.json"; }

  bool complete() const {
    std::ifstream is(marker());
    if (!is) return false;
    json j;
    try {
      is >> j;
    } catch (...) {
      return false;
    }
    return j.value("complete", false);
  }
};

int run_setup(const Fixture& fx) {
  if (fx.complete()) {
    std::printf("fixture already complete at %s\n", fx.cache.string().c_str());
    return 0;
  }
  fs::create_directories(fx.cache);
  Timer total;

  std::printf("generating toy dataset...\n");
  generate_toy_dataset(fx.train_dir().string(), 40, 1001, 96, 160);
  generate_toy_dataset(fx.holdout_dir().string(), 10, 2002, 96, 160);

  auto images = load_images(list_image_files(fx.train_dir().string()));
  json meta;
  meta["train_images"] = images.size();
  meta["widths"] = {kToyWidths.main_channels, kToyWidths.latent_channels,
                    kToyWidths.hyper_channels};
  meta["baseline_epochs"] = kBaselineEpochs;

  for (int q : kFixtureQualities) {
    Timer per_level;
    LicModel model = build_model(Variant::kMeanScaleHyperprior, kToyWidths, q, kModelSeed);
    TrainConfig cfg;
    cfg.epochs = kBaselineEpochs;
    cfg.batch_size = 8;
    cfg.lr_weights = 1e-3;
    cfg.crop_size = 64;
    cfg.seed = 1000 + static_cast<uint64_t>(q);
    cfg.schedule = LrSchedule::kCosine;
    cfg.verbose = false;
    TrainResult res = train_baseline(model, images, cfg);
    const double secs = per_level.seconds();
    if (res.diverged) {
      std::printf("FIXTURE: baseline q%d diverged\n", q);
      return 1;
    }
    std::printf("baseline q%d: %zu epochs, loss %.4f -> %.4f (rate %.3f bpp, mse %.1f), %.0f s\n",
                q, res.history.size(), res.history.front().mean_loss,
                res.history.back().mean_loss, res.history.back().mean_rate_bpp,
                res.history.back().mean_mse, secs);
    if (secs > 1800.0) {
      std::printf("FIXTURE: training exceeded the 30 min/level budget\n");
      return 1;
    }
    save_checkpoint(fx.baseline(q).string(), model);
    meta["train_seconds_q" + std::to_string(q)] = secs;
  }

  meta["complete"] = true;
  meta["total_seconds"] = total.seconds();
  std::ofstream os(fx.marker());
  os << meta.dump(2) << "\n";
  std::printf("fixture ready in %.0f s\n", total.seconds());
  return 0;
}

Tensor fixture_calib(const Fixture& fx) {
  CalibSet cs = select_calibration(fx.train_dir().string(), 16, 7);
  // Crop 96 keeps every toy image whole enough that each layer's
  // sensitivity resolves above the tolerance floor.
  return calibration_batch(cs, 96);
}

// ------------------------------------------------------------ criterion 1

// Independent scalar quantizer: FPU rounding instead of arithmetic rounding.
double quantize_oracle(double x, double s, double z, int b) {
  double u = x / s + z;
  const double top = std::pow(2.0, b);
  if (u < 0.0) u = 0.0;
  if (u > top) u = top;
  return s * (std::nearbyint(u) - z);
}

bool criterion1() {
  Timer t;
  std::fesetround(FE_TONEAREST);
  Check c;
  Rng rng(10001);
  for (int i = 0; i < 10000; ++i) {
    const double s = std::exp(rng.uniform(-9.0, 3.0));
    const double z = rng.uniform(-64.0, 300.0);
    const int b = 2 + static_cast<int>(rng.uniform_int(7));
    const double top = std::pow(2.0, b);
    const double x = rng.uniform(-2.0 * top, 2.0 * top) * s;

    QuantParams p;
    p.scale = Tensor::from_data({1}, {s});
    p.zero_point = Tensor::from_data({1}, {z});
    p.bits = b;
    Tensor xt = Tensor::from_data({1}, {x});
    const double got = quantize_affine(xt, p)[0];
    c.require(got == quantize_oracle(x, s, z, b), "closed-form mismatch vs oracle");

    // boundedness for in-range x
    const double u = rng.uniform(0.0, top);
    const double xin = s * (u - z);
    Tensor xint = Tensor::from_data({1}, {xin});
    const double q = quantize_affine(xint, p)[0];
    c.require(std::fabs(q - xin) <= s / 2.0 * (1.0 + 1e-12) + 1e-300,
              "in-range error above s/2");

    // idempotence (bitwise) and monotonicity
    Tensor once = quantize_affine(xt, p);
    c.require(quantize_affine(once, p).bitwise_equal(once), "not idempotent");
    const double x2 = x + std::fabs(rng.uniform(0.0, 3.0 * s));
    Tensor pair = Tensor::from_data({2}, {x, x2});
    Tensor qq = quantize_affine(pair, p);
    c.require(qq[0] <= qq[1], "not monotone");
  }
  const double secs = t.seconds();
  c.require(secs < 10.0, "runtime over 10 s");
  std::printf("[%s] criterion 1: quantizer exactness, 10000 cases bit-exact, bound/idempotence/"
              "monotonicity properties (%.2f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 2

uint64_t size_oracle(int c_out, int c_in, int k, int b) {
  const double weights = static_cast<double>(c_out) * c_in * k * k;
  return static_cast<uint64_t>((weights + c_out) * b + 2.0 * 32.0 * c_out);
}

bool criterion2() {
  Timer t;
  Check c;
  LayerSpec s1;
  s1.c_out = 2; s1.c_in = 3; s1.k = 1;
  c.require(layer_size_bits(s1, 4) == 160, "worked example 160 failed");
  LayerSpec s2;
  s2.c_out = 192; s2.c_in = 128; s2.k = 5;
  c.require(layer_size_bits(s2, 8) == 4929024, "worked example 4929024 failed");

  Rng rng(10002);
  for (int i = 0; i < 1000; ++i) {
    LayerSpec s;
    s.c_out = 1 + static_cast<int>(rng.uniform_int(512));
    s.c_in = 1 + static_cast<int>(rng.uniform_int(512));
    s.k = 1 + static_cast<int>(rng.uniform_int(9));
    const int b = 2 + static_cast<int>(rng.uniform_int(7));
    c.require(layer_size_bits(s, b) == size_oracle(s.c_out, s.c_in, s.k, b),
              "random-shape mismatch vs oracle");
  }
  const double secs = t.seconds();
  c.require(secs < 5.0, "runtime over 5 s");
  std::printf("[%s] criterion 2: size formula exact on 1000 random shapes + worked examples "
              "(%.2f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 3

bool criterion3() {
  Timer t;
  Check c;
  Rng rng(10003);
  for (int table_i = 0; table_i < 100; ++table_i) {
    const int layers = 1 + static_cast<int>(rng.uniform_int(20));
    // zeta[layer][b-2], non-increasing in b
    std::vector<std::array<double, 7>> zeta(static_cast<size_t>(layers));
    for (auto& row : zeta) {
      double v = rng.uniform(0.0, 1.0);
      for (int b = 8; b >= 2; --b) {
        row[static_cast<size_t>(b - 2)] = v;
        v += rng.uniform(0.0, std::exp(rng.uniform(-3.0, 3.0)));
      }
    }
    ZetaFn fn = [&zeta](int n, int b) { return zeta[static_cast<size_t>(n)][b - 2]; };
    const double beta = std::exp(rng.uniform(std::log(0.001), std::log(50.0)));
    BitAssignment got = assign_bits(fn, layers, beta, 8);
    for (int n = 0; n < layers; ++n) {
      // brute force: smallest candidate width whose zeta stays below beta
      int expect = 8;
      for (int b = 2; b <= 8; ++b)
        if (fn(n, b) < beta) {
          expect = b;
          break;
        }
      c.require(got.bits[static_cast<size_t>(n)] == expect, "brute-force mismatch");
    }

    // beta-monotonicity on the shared table
    BitAssignment lo = assign_bits(fn, layers, beta, 8);
    BitAssignment hi = assign_bits(fn, layers, beta * rng.uniform(1.5, 10.0), 8);
    for (int n = 0; n < layers; ++n)
      c.require(lo.bits[static_cast<size_t>(n)] >= hi.bits[static_cast<size_t>(n)],
                "assignment not monotone in beta");
  }
  const double secs = t.seconds();
  c.require(secs < 10.0, "runtime over 10 s");
  std::printf("[%s] criterion 3: bit assignment equals brute force on 100 monotone tables, "
              "beta-monotone (%.2f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 4

bool criterion4() {
  Timer t;
  Check c;
  Rng rng(10004);
  for (int trial = 0; trial < 20; ++trial) {
    const double drop = rng.uniform(0.01, 0.25);
    const double floor_cr = rng.uniform(0.26, 0.4);
    const double start = rng.uniform(1.0, 1.05);
    auto cr_of = [=](double beta) { return std::max(floor_cr, start - drop * beta); };
    const double target = rng.uniform(0.45, 0.95);

    SearchOptions opts;
    opts.cr_target = target;
    opts.beta_init = 0.01;
    opts.max_iterations = 100;
    auto res = adaptive_search(
        [&](double beta) { return std::make_pair(cr_of(beta), BitAssignment{}); }, opts);

    // straight-line reference simulation of the variable-step rule
    double beta = 0.01, alpha = 1.0;
    std::vector<std::array<double, 3>> ref;
    for (int i = 0; i < 100; ++i) {
      const double cr = cr_of(beta);
      ref.push_back({beta, alpha, cr});
      if (std::fabs(cr - target) <= 0.01) break;
      if (cr <= target) {
        beta = beta - alpha;
        if (beta < 1e-3) beta = 1e-3;
        alpha = alpha * 0.1;
        beta = beta + alpha;
      } else {
        const double gap = std::fabs(cr - target);
        if (gap >= 0.25)
          alpha = alpha * 5.0;
        else if (gap >= 0.10)
          alpha = alpha * 2.0;
        beta = beta + alpha;
      }
    }

    c.require(res.state.history.size() == ref.size(), "trace length differs from reference");
    if (res.state.history.size() == ref.size()) {
      for (size_t i = 0; i < ref.size(); ++i) {
        c.require(res.state.history[i].beta == ref[i][0], "beta differs from reference");
        c.require(res.state.history[i].alpha_beta == ref[i][1], "alpha differs from reference");
        c.require(res.state.history[i].cr == ref[i][2], "cr differs from reference");
      }
    }
    if (res.converged)
      c.require(std::fabs(res.state.cr - target) <= 0.01, "converged outside the band");
  }
  const double secs = t.seconds();
  c.require(secs < 10.0, "runtime over 10 s");
  std::printf("[%s] criterion 4: adaptive-search traces match the reference simulation on 20 "
              "oracles, band respected (%.2f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 5

bool criterion5(const Fixture& fx) {
  Timer t;
  Check c;
  if (!fx.complete()) {
    std::printf("[FAIL] criterion 5: fixture missing (run --setup)\n");
    return false;
  }
  LoadedCheckpoint lc = load_checkpoint(fx.baseline(kFixtureQualities[0]).string());
  Tensor calib = fixture_calib(fx);
  SensitivityAnalyzer analyzer(lc.model, calib);

  std::printf("  target  adaptive  exhaustive\n");
  const double targets[4] = {0.9, 0.75, 0.6, 0.5};
  for (double target : targets) {
    SearchOptions opts;
    opts.cr_target = target;
    // The variable-step rule starts with a unit increment, so a unit
    // starting tolerance is its natural scale; the fixed-step sweep keeps
    // the documented 0.01 start and step.
    opts.beta_init = 1.0;
    opts.max_iterations = 100;
    auto ad = adaptive_search(analyzer, lc.model, opts, 8, 2);
    opts.beta_init = 0.01;
    opts.step = 0.01;
    opts.max_iterations = 500000;
    // after the adaptive pass the cache is warm; sweep single-threaded
    auto ex = exhaustive_search(analyzer, lc.model, opts, 8, 1);
    std::printf("  %6.2f  %8d  %10d%s%s\n", target, ad.state.iteration, ex.state.iteration,
                ad.converged ? "" : "  [adaptive not converged]",
                ex.converged ? "" : "  [exhaustive not converged]");
    c.require(ad.converged, "adaptive search did not converge");
    c.require(ex.converged, "exhaustive search did not converge");
    c.require(ad.state.iteration <= ex.state.iteration, "adaptive used more steps");
    if (target <= 0.6)
      c.require(ad.state.iteration * 4 < ex.state.iteration,
                "adaptive not under 25% of exhaustive");
  }
  const double secs = t.seconds();
  c.require(secs < 1800.0, "runtime over 30 min");
  std::printf("[%s] criterion 5: adaptive search converges in no more steps than exhaustive on "
              "the toy model (<25%% for CR<=0.6) (%.0f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 6

double surrogate_smooth(double x, double s, double z, int b, double leak) {
  const double top = std::pow(2.0, b);
  const double u = x / s + z;
  double cl;
  if (u < 0.0)
    cl = leak * u;
  else if (u > top)
    cl = top + leak * (u - top);
  else
    cl = u;
  return s * (cl - z);
}

bool criterion6() {
  Timer t;
  Check c;
  Rng rng(10006);
  const double leak = 0.01;
  int sampled = 0;
  while (sampled < 1000) {
    const int b = 2 + static_cast<int>(rng.uniform_int(7));
    const double top = std::pow(2.0, b);
    const double s = std::exp(rng.uniform(-4.0, 1.0));
    const double z = rng.uniform(0.0, top);
    const double x = rng.uniform(-1.5, 1.5) * s * top;
    const double u = x / s + z;
    // keep clear of the rounding/clipping breakpoints
    const double frac = u - std::floor(u);
    if (std::min(frac, 1.0 - frac) < 0.01) continue;
    if (std::fabs(u) < 0.01 || std::fabs(u - top) < 0.01) continue;
    ++sampled;

    Var xv = make_param(Tensor::from_data({1, 1}, {x}));
    Var sv = make_param(Tensor::from_data({1}, {s}));
    Var zv = make_param(Tensor::from_data({1}, {z}));
    backward(sum_all(fake_quant_weight(xv, sv, zv, b, leak)));

    // Step sizes per variable. The relative-error floor absorbs the FD's own
    // roundoff: evaluating s*(u - z) with u = x/s + z cancels to machine
    // precision of eps*s*(|u|+|z|), so the FD of an exactly-zero gradient
    // reads as ~eps*s*(|u|+|z|)/h, far below any genuine gradient here.
    const double hx = 1e-6 * std::max(1.0, std::fabs(x));
    const double hs = 1e-5 * s;
    const double hz = 1e-6 * std::max(1.0, std::fabs(z));
    auto fd = [&](auto f, double v, double h) { return (f(v + h) - f(v - h)) / (2.0 * h); };
    const double fdx = fd([&](double v) { return surrogate_smooth(v, s, z, b, leak); }, x, hx);
    const double fds = fd([&](double v) { return surrogate_smooth(x, v, z, b, leak); }, s, hs);
    const double fdz = fd([&](double v) { return surrogate_smooth(x, s, v, b, leak); }, z, hz);
    auto rel = [&](double a, double f2, double h) {
      const double floor = 4e-11 * s * (std::fabs(u) + std::fabs(z) + 1.0) / h;
      return std::fabs(a - f2) / std::max({std::fabs(a), std::fabs(f2), floor});
    };
    c.require(rel(xv->grad[0], fdx, hx) < 1e-4, "d/dx mismatch");
    c.require(rel(sv->grad[0], fds, hs) < 1e-4, "d/ds mismatch");
    c.require(rel(zv->grad[0], fdz, hz) < 1e-4, "d/dz mismatch");
  }

  // full train-mode rd gradient on a 2-layer pipeline, all parameters
  Rng drng(10106);
  Tensor input({1, 3, 8, 8});
  for (int64_t i = 0; i < input.size(); ++i) input[i] = drng.uniform(0.0, 1.0);
  Var w1 = make_param(Tensor({4, 3, 3, 3}));
  Var b1 = make_param(Tensor({4}));
  Var w2 = make_param(Tensor({3, 4, 3, 3}));
  Var b2 = make_param(Tensor({3}));
  for (auto& p : {w1, w2})
    for (int64_t i = 0; i < p->value.size(); ++i) p->value[i] = drng.uniform(-0.4, 0.4);
  Rng prng(10107);
  FactorizedPrior prior(4, prng);

  auto build = [&] {
    Rng noise(5150);
    Var x = make_const(input);
    Var y = conv2d(x, w1, b1, 2, 1);
    Var y_noisy = add_uniform_noise(y, noise);
    Var lik = lower_bound(prior.likelihood(y_noisy), 1e-9);
    Var recon = conv_transpose2d(y_noisy, w2, b2, 2, 1, 1);
    return rd_loss_graph(recon, input, lik, nullptr, 0.013).loss;
  };
  std::vector<Var> params = {w1, b1, w2, b2};
  for (const auto& p : prior.parameters()) params.push_back(p);
  for (const auto& p : params) p->zero_grad();
  backward(build());
  std::vector<Tensor> analytic;
  for (const auto& p : params)
    analytic.push_back(p->has_grad() ? p->grad : Tensor::zeros(p->value.shape()));
  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Var p = params[pi];
    for (int64_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      const double h = 1e-4;
      p->value[i] = keep + h;
      const double up = build()->value[0];
      p->value[i] = keep - h;
      const double dn = build()->value[0];
      p->value[i] = keep;
      const double fdv = (up - dn) / (2.0 * h);
      const double an = analytic[pi][i];
      worst = std::max(worst, std::fabs(fdv - an) / std::max({std::fabs(fdv), std::fabs(an), 1e-6}));
    }
  }
  c.require(worst < 1e-3, "2-layer rd gradient off by more than 1e-3");

  const double secs = t.seconds();
  c.require(secs < 120.0, "runtime over 2 min");
  std::printf("[%s] criterion 6: surrogate gradients match finite differences at 1000 points; "
              "full 2-layer rd gradient within 1e-3 (worst %.2e) (%.1f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", worst, secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 7

struct MethodEval {
  double mean_loss = 0.0;
  double size_mb = 0.0;
  RDPoint point;
};

MethodEval eval_quantized(const QuantizedModel& qm, const std::vector<Tensor>& holdout) {
  MethodEval e;
  EvalSummary s = evaluate_model(qm, holdout, 2);
  for (const auto& m : s.per_image) e.mean_loss += m.loss;
  e.mean_loss /= static_cast<double>(s.per_image.size());
  e.size_mb = model_size_report(qm.model, qm.assignment).total_mb;
  e.point = {s.mean_bpp, s.mean_psnr_db, qm.model.quality_index, qm.model.lambda};
  return e;
}

bool criterion7(const Fixture& fx) {
  Timer t;
  Check c;
  if (!fx.complete()) {
    std::printf("[FAIL] criterion 7: fixture missing (run --setup)\n");
    return false;
  }
  auto holdout = load_images(list_image_files(fx.holdout_dir().string()));
  auto train_images = load_images(list_image_files(fx.train_dir().string()));
  Tensor calib = fixture_calib(fx);
  const uint64_t seeds[3] = {101, 202, 303};

  // float reference curve over the two quality levels
  std::vector<RDPoint> base_points;
  std::vector<LicModel> baselines;
  std::vector<BitAssignment> fmpq_assignments;
  for (int q : kFixtureQualities) {
    LoadedCheckpoint lc = load_checkpoint(fx.baseline(q).string());
    EvalSummary s = evaluate_model(lc.model, holdout, 2);
    base_points.push_back({s.mean_bpp, s.mean_psnr_db, q, lc.model.lambda});

    SensitivityAnalyzer analyzer(lc.model, calib);
    SearchOptions opts;
    opts.cr_target = 1.0;
    // Start at the tolerance floor: picks the maximum-precision assignment
    // inside the band, the fairest equal-size comparison point.
    opts.beta_init = kBetaFloor;
    auto res = adaptive_search(analyzer, lc.model, opts, 8, 2);
    c.require(res.converged, "size search at CR 1.0 did not converge");
    std::printf("  q%d: mixed assignment at CR %.4f:", q, res.state.cr);
    for (int b : res.assignment.bits) std::printf(" %d", b);
    std::printf("\n");
    fmpq_assignments.push_back(res.assignment);
    baselines.push_back(std::move(lc.model));
  }
  RDCurve base_curve = RDCurve::from_points(base_points, "float");

  TrainConfig qat_cfg;
  qat_cfg.epochs = kQatEpochs;
  qat_cfg.batch_size = 8;
  qat_cfg.lr_weights = 1e-5;
  qat_cfg.lr_quant = 1e-4;
  qat_cfg.crop_size = 64;
  qat_cfg.verbose = false;

  int seeds_passing = 0;
  for (uint64_t seed : seeds) {
    qat_cfg.seed = seed;
    bool losses_ok = true, sizes_ok = true;
    std::vector<RDPoint> fpq_points, fmpq_points;
    for (size_t qi = 0; qi < baselines.size(); ++qi) {
      QuantizedModel fpq = attach_quantizers(
          baselines[qi], BitAssignment::uniform(14, 8), 8);
      QuantizedModel fmpq = attach_quantizers(baselines[qi], fmpq_assignments[qi], 8);
      TrainResult r1 = qat_finetune(fpq, train_images, qat_cfg);
      TrainResult r2 = qat_finetune(fmpq, train_images, qat_cfg);
      c.require(!r1.diverged && !r2.diverged, "qat diverged");

      MethodEval ef = eval_quantized(fpq, holdout);
      MethodEval em = eval_quantized(fmpq, holdout);
      fpq_points.push_back(ef.point);
      fmpq_points.push_back(em.point);
      losses_ok = losses_ok && em.mean_loss <= ef.mean_loss;
      sizes_ok = sizes_ok && std::fabs(em.size_mb - ef.size_mb) / ef.size_mb <= 0.01;
      std::printf("  seed %llu q%d: loss fpq8 %.5f, mixed %.5f; size fpq8 %.4f MB, mixed %.4f MB\n",
                  static_cast<unsigned long long>(seed), baselines[qi].quality_index, ef.mean_loss,
                  em.mean_loss, ef.size_mb, em.size_mb);
    }
    c.require(sizes_ok, "accounted sizes differ by more than 1%");
    double bd_fpq = bd_rate(base_curve, RDCurve::from_points(fpq_points, "fpq8"));
    double bd_fmpq = bd_rate(base_curve, RDCurve::from_points(fmpq_points, "fmpq"));
    const bool bd_ok = bd_fmpq <= bd_fpq;
    std::printf("  seed %llu: bd-rate fpq8 %+.4f%%, mixed %+.4f%% -> %s\n",
                static_cast<unsigned long long>(seed), bd_fpq, bd_fmpq,
                (losses_ok && bd_ok) ? "pass" : "no");
    if (losses_ok && bd_ok) ++seeds_passing;
  }
  c.require(seeds_passing >= 2, "mixed precision beat fixed precision in fewer than 2 of 3 seeds");

  const double secs = t.seconds();
  std::printf("[%s] criterion 7: mixed-precision at CR 1.0 matches or beats 8-bit fixed "
              "precision after identical QAT in %d/3 seeds (%.0f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", seeds_passing, secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 8

bool criterion8(const Fixture& fx) {
  Timer t;
  Check c;
  if (!fx.complete()) {
    std::printf("[FAIL] criterion 8: fixture missing (run --setup)\n");
    return false;
  }
  LoadedCheckpoint lc = load_checkpoint(fx.baseline(kFixtureQualities[1]).string());
  auto holdout = load_images(list_image_files(fx.holdout_dir().string()));
  auto train_images = load_images(list_image_files(fx.train_dir().string()));
  Tensor calib = fixture_calib(fx);
  SensitivityAnalyzer analyzer(lc.model, calib);

  TrainConfig qat_cfg;
  qat_cfg.epochs = kQatEpochs;
  qat_cfg.batch_size = 8;
  qat_cfg.lr_weights = 1e-5;
  qat_cfg.lr_quant = 1e-4;
  qat_cfg.crop_size = 64;
  qat_cfg.seed = 777;
  qat_cfg.verbose = false;

  const double targets[4] = {1.0, 0.9, 0.75, 0.6};
  std::vector<uint64_t> sizes;
  std::vector<double> losses;
  for (double target : targets) {
    SearchOptions opts;
    opts.cr_target = target;
    opts.beta_init = kBetaFloor;
    auto res = adaptive_search(analyzer, lc.model, opts, 8, 2);
    c.require(res.converged, "size search did not converge");
    QuantizedModel qm = attach_quantizers(lc.model, res.assignment, 8);
    TrainResult r = qat_finetune(qm, train_images, qat_cfg);
    c.require(!r.diverged, "qat diverged");
    MethodEval e = eval_quantized(qm, holdout);
    sizes.push_back(model_size_report(qm.model, qm.assignment).total_bits);
    losses.push_back(e.mean_loss);
    std::printf("  target %.2f: achieved CR %.4f, size %.4f MB, holdout loss %.5f\n", target,
                res.state.cr, e.size_mb, e.mean_loss);
  }
  for (size_t i = 1; i < sizes.size(); ++i)
    c.require(sizes[i] <= sizes[i - 1], "model size increased as the target shrank");
  int inversions = 0;
  for (size_t i = 1; i < losses.size(); ++i)
    if (losses[i] < losses[i - 1]) ++inversions;
  c.require(inversions <= 1, "more than one loss inversion across adjacent targets");

  const double secs = t.seconds();
  c.require(secs < 7200.0, "runtime over 2 h");
  std::printf("[%s] criterion 8: shrinking size targets give non-increasing size and "
              "non-decreasing loss (%d inversion(s)) (%.0f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", inversions, secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ------------------------------------------------------------ criterion 9

bool criterion9(const Fixture& fx) {
  Timer t;
  Check c;
  if (!fx.complete()) {
    std::printf("[FAIL] criterion 9: fixture missing (run --setup)\n");
    return false;
  }
  Tensor calib = fixture_calib(fx);
  std::map<int, BitAssignment> byq;
  std::vector<LayerSpec> layers;
  for (int q : kFixtureQualities) {
    LoadedCheckpoint lc = load_checkpoint(fx.baseline(q).string());
    SensitivityAnalyzer analyzer(lc.model, calib);
    byq[q] = assign_bits(analyzer, 1.0, 8, 2);
    layers = list_quantizable_layers(lc.model);
  }
  BitDistributionReport rep = bit_distribution_report(byq, layers);
  c.require(rep.matrix.size() == 14, "matrix does not have 14 layers");
  c.require(rep.quality_indices.size() == byq.size(), "matrix columns mismatch");

  json manifest;
  manifest["criterion"] = 9;
  manifest["quality_indices"] = rep.quality_indices;
  manifest["matrix"] = rep.matrix;
  manifest["mean_main_path_bits"] = rep.mean_main_path_bits;
  manifest["mean_hyper_path_bits"] = rep.mean_hyper_path_bits;
  manifest["main_path_ge_hyper_path"] = rep.main_path_ge_hyper_path;
  const fs::path out = fx.cache / "bit_distribution_manifest.json";
  std::ofstream os(out);
  os << manifest.dump(2) << "\n";
  os.close();
  write_svg_bit_distribution((fx.cache / "bit_distribution.svg").string(), rep);
  c.require(fs::exists(out), "manifest not written");
  std::printf("%s", rep.to_table().c_str());

  const double secs = t.seconds();
  std::printf("[%s] criterion 9: 14-layer x quality bit matrix emitted; reported main>=hyper: %s "
              "(soft check, not asserted) (%.0f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", rep.main_path_ge_hyper_path ? "yes" : "no", secs,
              c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ----------------------------------------------------------- criterion 10

bool criterion10() {
  Timer t;
  Check c;
  std::vector<RDPoint> ref_pts;
  const double bpps[5] = {0.22, 0.41, 0.78, 1.2, 1.9};
  const double psnrs[5] = {29.5, 32.0, 34.8, 36.9, 39.2};
  for (int i = 0; i < 5; ++i) ref_pts.push_back({bpps[i], psnrs[i], i, 0.0});
  RDCurve ref = RDCurve::from_points(ref_pts, "ref");

  c.require(bd_rate(ref, ref) == 0.0, "identical curves not exactly zero");

  std::vector<RDPoint> twice;
  for (const auto& p : ref.points) twice.push_back({2.0 * p.bpp, p.psnr_db, -1, 0.0});
  const double plus100 = bd_rate(ref, RDCurve::from_points(twice, "2x"));
  c.require(std::fabs(plus100 - 100.0) < 1e-6, "2x rate shift not +100%");

  std::vector<RDPoint> skew;
  for (size_t i = 0; i < ref.points.size(); ++i)
    skew.push_back({ref.points[i].bpp * (1.1 + 0.05 * static_cast<double>(i)),
                    ref.points[i].psnr_db, -1, 0.0});
  RDCurve test = RDCurve::from_points(skew, "skew");
  const double base = bd_rate(ref, test);
  for (double scale : {1e-3, 0.7, 42.0, 1e4}) {
    std::vector<RDPoint> r2, t2;
    for (const auto& p : ref.points) r2.push_back({scale * p.bpp, p.psnr_db, -1, 0.0});
    for (const auto& p : test.points) t2.push_back({scale * p.bpp, p.psnr_db, -1, 0.0});
    const double scaled = bd_rate(RDCurve::from_points(r2, "r"), RDCurve::from_points(t2, "t"));
    c.require(std::fabs(scaled - base) < 1e-9, "rate scaling changed the bd-rate");
  }
  const double secs = t.seconds();
  c.require(secs < 1.0, "runtime over 1 s");
  std::printf("[%s] criterion 10: bd-rate oracle (0 exact, +100%% within 1e-6, scale-invariant "
              "within 1e-9) (%.2f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ----------------------------------------------------------- criterion 11

bool criterion11() {
  Timer t;
  Check c;
  const fs::path dir = fs::temp_directory_path() / "licq_acceptance_c11";
  fs::create_directories(dir);

  // model with trained-in quantizer state so every stored value is generic
  LicModel model = build_model(Variant::kMeanScaleHyperprior, WidthConfig{8, 8, 4}, 3, 2024);
  BitAssignment a = BitAssignment::uniform(14, 8);
  for (size_t i = 0; i < a.bits.size(); ++i) a.bits[i] = 2 + static_cast<int>((5 * i) % 7);
  a.beta_used = 0.375;
  QuantizedModel qm = attach_quantizers(model, a, 8);
  Rng drng(11011);
  std::vector<Tensor> imgs;
  {
    Tensor img({3, 48, 48});
    for (int64_t i = 0; i < img.size(); ++i) img[i] = drng.uniform(0.0, 1.0);
    imgs.push_back(std::move(img));
  }
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 1;
  cfg.crop_size = 48;
  cfg.lr_weights = 1e-4;
  cfg.lr_quant = 1e-3;
  cfg.verbose = false;
  qat_finetune(qm, imgs, cfg);

  const std::string f1 = (dir / "a.ckpt").string();
  const std::string f2 = (dir / "b.ckpt").string();
  save_checkpoint(f1, qm);
  LoadedCheckpoint lc1 = load_checkpoint(f1);
  QuantizedModel qm1 = lc1.to_quantized();
  save_checkpoint(f2, qm1);

  // file-level bitwise round trip
  std::ifstream i1(f1, std::ios::binary), i2(f2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(i1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(i2)), std::istreambuf_iterator<char>());
  c.require(!s1.empty() && s1 == s2, "save/load/save not byte-identical");

  // stored tensors round-trip at 0 ULP
  CheckpointData d1 = load_checkpoint_raw(f1);
  CheckpointData d2 = load_checkpoint_raw(f2);
  c.require(d1.tensors.size() == d2.tensors.size(), "tensor count changed");
  for (size_t i = 0; i < d1.tensors.size(); ++i)
    c.require(d1.tensors[i].second.bitwise_equal(d2.tensors[i].second),
              "stored tensor differs after round trip");

  // reloaded quantizer state matches the live model exactly
  c.require(qm1.assignment.bits == qm.assignment.bits, "bit assignment changed");
  c.require(qm1.assignment.beta_used == qm.assignment.beta_used, "beta_used changed");
  for (size_t i = 0; i < qm.weight_quantizers.size(); ++i) {
    c.require(qm1.weight_quantizers[i].log_scale->value.bitwise_equal(
                  qm.weight_quantizers[i].log_scale->value),
              "scales changed");
    c.require(qm1.weight_quantizers[i].zero_point->value.bitwise_equal(
                  qm.weight_quantizers[i].zero_point->value),
              "zero points changed");
  }

  // identical eval-mode rd loss on a fixed batch
  Tensor batch({1, 3, 32, 32});
  for (int64_t i = 0; i < batch.size(); ++i) batch[i] = drng.uniform(0.0, 1.0);
  const double live = eval_rd_quantized(qm, batch).loss;
  const double loaded = eval_rd_quantized(qm1, batch).loss;
  c.require(live == loaded, "eval rd loss changed across persistence");

  fs::remove_all(dir);
  const double secs = t.seconds();
  std::printf("[%s] criterion 11: persistence is bitwise (files, tensors, quantizer state) with "
              "identical eval rd loss (%.1f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cache = "acceptance_cache";
  int criterion = -1;
  bool setup = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--setup") setup = true;
    else if (arg == "--cache" && i + 1 < argc) cache = argv[++i];
    else if (arg == "--criterion" && i + 1 < argc) criterion = std::atoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: %s [--setup] [--criterion N] [--cache DIR]\n", argv[0]);
      return 2;
    }
  }

  Fixture fx{fs::path(cache)};
  if (setup) return run_setup(fx);

  std::map<int, std::function<bool()>> checks = {
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, [&] { return criterion5(fx); }},
      {6, criterion6},
      {7, [&] { return criterion7(fx); }},
      {8, [&] { return criterion8(fx); }},
      {9, [&] { return criterion9(fx); }},
      {10, criterion10},
      {11, criterion11},
  };

  auto guarded = [](int n, const std::function<bool()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %d: unhandled error: %s\n", n, e.what());
      return false;
    }
  };

  if (criterion > 0) {
    auto it = checks.find(criterion);
    if (it == checks.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", criterion);
      return 2;
    }
    return guarded(criterion, it->second) ? 0 : 1;
  }

  bool all = true;
  for (auto& [n, fn] : checks) all = guarded(n, fn) && all;
  return all ? 0 : 1;
}
