// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "licq/train.hpp"
#include "test_util.hpp"

using namespace licq;
using testutil::random_tensor;

namespace {

const WidthConfig kMicro{4, 4, 4};

std::vector<Tensor> toy_images(int count, int size, uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor> out;
  for (int i = 0; i < count; ++i) {
    Tensor img({3, size, size});
    // smooth blobs, not pure noise, so there is structure to learn
    const double cx = rng.uniform(0.2, 0.8) * size, cy = rng.uniform(0.2, 0.8) * size;
    const double col[3] = {rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
    for (int64_t c = 0; c < 3; ++c)
      for (int64_t y = 0; y < size; ++y)
        for (int64_t x = 0; x < size; ++x) {
          const double d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (size * size * 0.1);
          img.data()[(c * size + y) * size + x] = col[c] * std::exp(-d2) + 0.1;
        }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace

TEST_CASE("training presets carry the documented hyperparameters") {
  TrainConfig b = baseline_defaults();
  CHECK(b.epochs == 90);
  CHECK(b.batch_size == 16);
  CHECK(b.lr_weights == 1e-4);
  CHECK(b.schedule == LrSchedule::kCosine);
  TrainConfig q = qat_defaults();
  CHECK(q.epochs == 30);
  CHECK(q.lr_weights == 1e-5);
  CHECK(q.lr_quant == 1e-4);
}

TEST_CASE("adam takes bias-corrected steps toward the minimum of a quadratic") {
  Var p = make_param(Tensor::from_data({1}, {5.0}));
  AdamOptimizer opt({{std::vector<Var>{p}, 0.1}});
  for (int i = 0; i < 400; ++i) {
    opt.zero_grad();
    backward(mul(p, p));
    opt.step();
  }
  CHECK(std::fabs(p->value[0]) < 0.05);
  CHECK(opt.step_count() == 400);
}

TEST_CASE("adam state round-trips through tensors") {
  Var p = make_param(Tensor::from_data({2}, {1.0, -2.0}));
  AdamOptimizer opt({{std::vector<Var>{p}, 0.01}});
  opt.zero_grad();
  backward(sum_all(mul(p, p)));
  opt.step();
  auto state = opt.state_tensors();

  AdamOptimizer opt2({{std::vector<Var>{p}, 0.01}});
  opt2.load_state(state);
  CHECK(opt2.step_count() == 1);
  auto state2 = opt2.state_tensors();
  REQUIRE(state.size() == state2.size());
  for (size_t i = 0; i < state.size(); ++i) {
    CHECK(state[i].first == state2[i].first);
    CHECK(state[i].second.bitwise_equal(state2[i].second));
  }
}

TEST_CASE("epochs=0 leaves parameters bitwise identical") {
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 2, 31);
  std::vector<Tensor> before;
  for (const auto& p : m.parameters()) before.push_back(p->value);
  TrainConfig cfg = baseline_defaults();
  cfg.epochs = 0;
  cfg.crop_size = 16;
  auto result = train_baseline(m, toy_images(2, 32, 1), cfg);
  CHECK(result.history.empty());
  CHECK(!result.diverged);
  auto params = m.parameters();
  for (size_t i = 0; i < params.size(); ++i) CHECK(params[i]->value.bitwise_equal(before[i]));
}

TEST_CASE("baseline training descends on a toy set and is seed-deterministic") {
  auto images = toy_images(4, 32, 2);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 2;
  cfg.lr_weights = 1e-3;
  cfg.crop_size = 32;
  cfg.seed = 9;
  cfg.schedule = LrSchedule::kCosine;

  LicModel m1 = build_model(Variant::kMeanScaleHyperprior, kMicro, 2, 33);
  auto r1 = train_baseline(m1, images, cfg);
  REQUIRE(r1.history.size() == 5);
  CHECK(!r1.diverged);
  CHECK(r1.history.back().mean_loss < r1.history.front().mean_loss);

  LicModel m2 = build_model(Variant::kMeanScaleHyperprior, kMicro, 2, 33);
  auto r2 = train_baseline(m2, images, cfg);
  REQUIRE(r2.history.size() == r1.history.size());
  for (size_t i = 0; i < r1.history.size(); ++i)
    CHECK(r1.history[i].mean_loss == r2.history[i].mean_loss);
  auto p1 = m1.parameters(), p2 = m2.parameters();
  for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->value.bitwise_equal(p2[i]->value));
}

TEST_CASE("a larger lambda trains to lower distortion on the same data") {
  auto images = toy_images(4, 32, 3);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 4;
  cfg.lr_weights = 1e-3;
  cfg.crop_size = 32;
  cfg.seed = 5;

  LicModel low = build_model(Variant::kMeanScaleHyperprior, kMicro, 0, 40);   // 0.0018
  LicModel high = build_model(Variant::kMeanScaleHyperprior, kMicro, 5, 40);  // 0.0483
  auto rl = train_baseline(low, images, cfg);
  auto rh = train_baseline(high, images, cfg);
  CHECK(rh.history.back().mean_mse < rl.history.back().mean_mse);
}

TEST_CASE("qat fine-tuning lowers the quantized rd loss on a fixed batch") {
  auto images = toy_images(1, 32, 4);
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 3, 41);
  // settle the float model a little first so quantization has signal
  TrainConfig pre;
  pre.epochs = 30;
  pre.batch_size = 1;
  pre.lr_weights = 1e-3;
  pre.crop_size = 32;
  pre.seed = 6;
  train_baseline(m, images, pre);

  QuantizedModel qm =
      attach_quantizers(m, BitAssignment::uniform(list_quantizable_layers(m).size(), 4), 8);
  Rng crop_rng(1);
  Tensor batch = crop_batch(images, {0}, 32, crop_rng, false);
  const double before = eval_rd_quantized(qm, batch).loss;

  TrainConfig cfg = qat_defaults();
  cfg.epochs = 200;  // one image per batch -> 200 steps
  cfg.batch_size = 1;
  cfg.crop_size = 32;
  cfg.seed = 7;
  cfg.lr_weights = 1e-4;
  cfg.lr_quant = 1e-3;
  auto res = qat_finetune(qm, images, cfg);
  CHECK(!res.diverged);
  CHECK(res.steps == 200);
  const double after = eval_rd_quantized(qm, batch).loss;
  CHECK(after < before);
  CHECK(res.history.back().mean_loss < res.history.front().mean_loss);
}

TEST_CASE("qat loss history is identical across runs with the same seed") {
  auto images = toy_images(2, 32, 21);
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 3, 46);
  TrainConfig cfg = qat_defaults();
  cfg.epochs = 4;
  cfg.batch_size = 2;
  cfg.crop_size = 32;
  cfg.seed = 17;

  QuantizedModel q1 = attach_quantizers(m, BitAssignment::uniform(14, 5), 8);
  QuantizedModel q2 = attach_quantizers(m, BitAssignment::uniform(14, 5), 8);
  auto r1 = qat_finetune(q1, images, cfg);
  auto r2 = qat_finetune(q2, images, cfg);
  REQUIRE(r1.history.size() == r2.history.size());
  for (size_t i = 0; i < r1.history.size(); ++i)
    CHECK(r1.history[i].mean_loss == r2.history[i].mean_loss);
}

TEST_CASE("qat trains quantizer parameters but never the bit widths") {
  auto images = toy_images(2, 32, 8);
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 3, 42);
  BitAssignment mixed = BitAssignment::uniform(14, 8);
  mixed.bits[2] = 4;
  mixed.bits[9] = 3;
  QuantizedModel qm = attach_quantizers(m, mixed, 8);
  std::vector<Tensor> ls_before, zp_before;
  for (const auto& q : qm.weight_quantizers) {
    ls_before.push_back(q.log_scale->value);
    zp_before.push_back(q.zero_point->value);
  }

  TrainConfig cfg = qat_defaults();
  cfg.epochs = 4;
  cfg.batch_size = 2;
  cfg.crop_size = 32;
  cfg.lr_quant = 1e-3;
  cfg.seed = 11;
  auto res = qat_finetune(qm, images, cfg);
  CHECK(!res.diverged);
  CHECK(qm.assignment.bits == mixed.bits);
  for (size_t i = 0; i < qm.weight_quantizers.size(); ++i)
    CHECK(qm.weight_quantizers[i].bits == mixed.bits[i]);
  bool any_scale_moved = false;
  for (size_t i = 0; i < qm.weight_quantizers.size(); ++i)
    any_scale_moved =
        any_scale_moved || !qm.weight_quantizers[i].log_scale->value.bitwise_equal(ls_before[i]);
  CHECK(any_scale_moved);
}

TEST_CASE("the qat objective is exactly the rate-distortion loss") {
  auto images = toy_images(1, 32, 12);
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 2, 43);
  QuantizedModel qm = attach_quantizers(m, BitAssignment::uniform(14, 6), 8);
  Rng noise(3);
  Tensor batch = crop_batch(images, {0}, 32, noise, false);
  Rng fwd_noise(21);
  auto out = forward_quantized(qm, batch, Mode::kTrain, &fwd_noise);
  RDGraph g = rd_loss_graph(out.reconstruction, batch, out.likelihoods_y, out.likelihoods_z,
                            qm.model.lambda);
  // recompute the objective from the forward outputs; they must agree exactly
  RDMetrics check = rd_loss(out.reconstruction->value, batch, out.likelihoods_y->value,
                            out.likelihoods_z->value, qm.model.lambda);
  CHECK(g.loss->value[0] == check.loss);
  CHECK(g.rate_bpp->value[0] == check.rate_bpp);
  CHECK(g.distortion->value[0] == check.distortion);
}

TEST_CASE("every weight and quantizer parameter is reached by the backward pass") {
  auto images = toy_images(1, 32, 13);
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 2, 44);
  QuantizedModel qm = attach_quantizers(m, BitAssignment::uniform(14, 5), 8);
  Rng crop_rng(2), noise(3);
  Tensor batch = crop_batch(images, {0}, 32, crop_rng, false);
  auto out = forward_quantized(qm, batch, Mode::kTrain, &noise);
  backward(rd_loss_graph(out.reconstruction, batch, out.likelihoods_y, out.likelihoods_z,
                         qm.model.lambda)
               .loss);
  for (const auto& p : qm.model_parameters()) CHECK(p->has_grad());
  for (const auto& p : qm.quant_parameters()) CHECK(p->has_grad());
  // scale gradients are live (zero-points can sit at exact zero gradient
  // while every weight stays inside its calibrated range)
  for (const auto& q : qm.weight_quantizers) {
    bool any = false;
    for (int64_t i = 0; i < q.log_scale->grad.size(); ++i) any = any || q.log_scale->grad[i] != 0.0;
    CHECK(any);
  }
}

TEST_CASE("training divergence restores the last finite epoch") {
  auto images = toy_images(2, 32, 14);
  LicModel m = build_model(Variant::kMeanScaleHyperprior, kMicro, 2, 45);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 2;
  cfg.lr_weights = 1e154;  // one adam step puts weights where products overflow
  cfg.crop_size = 32;
  cfg.seed = 15;
  auto res = train_baseline(m, images, cfg);
  CHECK(res.diverged);
  for (const auto& p : m.parameters()) CHECK(p->value.all_finite());
}
