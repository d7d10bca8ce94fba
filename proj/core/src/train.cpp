// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace licq {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(lr_weights > 0.0) || !(lr_quant > 0.0))
    throw std::invalid_argument("TrainConfig: learning rates must be positive");
  if (crop_size < 16) throw std::invalid_argument("TrainConfig: crop_size must be >= 16");
}

TrainConfig baseline_defaults() {
  TrainConfig c;
  c.epochs = 90;
  c.batch_size = 16;
  c.lr_weights = 1e-4;
  c.lr_quant = 1e-4;
  c.schedule = LrSchedule::kCosine;
  return c;
}

TrainConfig qat_defaults() {
  TrainConfig c;
  c.epochs = 30;
  c.batch_size = 16;
  c.lr_weights = 1e-5;
  c.lr_quant = 1e-4;
  c.schedule = LrSchedule::kConstant;
  return c;
}

AdamOptimizer::AdamOptimizer(std::vector<Group> groups, double beta1, double beta2, double eps)
    : groups_(std::move(groups)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.resize(groups_.size());
  v_.resize(groups_.size());
  for (size_t g = 0; g < groups_.size(); ++g) {
    for (const auto& p : groups_[g].params) {
      m_[g].push_back(Tensor::zeros(p->value.shape()));
      v_[g].push_back(Tensor::zeros(p->value.shape()));
    }
  }
}

void AdamOptimizer::zero_grad() {
  for (auto& g : groups_)
    for (auto& p : g.params) p->zero_grad();
}

void AdamOptimizer::step(double lr_scale) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (size_t g = 0; g < groups_.size(); ++g) {
    const double lr = groups_[g].lr * lr_scale;
    for (size_t i = 0; i < groups_[g].params.size(); ++i) {
      Var& p = groups_[g].params[i];
      if (!p->has_grad()) continue;
      double* m = m_[g][i].data();
      double* v = v_[g][i].data();
      const double* grad = p->grad.data();
      double* value = p->value.data();
      const int64_t n = p->value.size();
      for (int64_t j = 0; j < n; ++j) {
        m[j] = beta1_ * m[j] + (1.0 - beta1_) * grad[j];
        v[j] = beta2_ * v[j] + (1.0 - beta2_) * grad[j] * grad[j];
        const double mh = m[j] / bc1;
        const double vh = v[j] / bc2;
        value[j] -= lr * mh / (std::sqrt(vh) + eps_);
      }
    }
  }
}

std::vector<std::pair<std::string, Tensor>> AdamOptimizer::state_tensors() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("opt.step", Tensor::scalar(static_cast<double>(step_count_)));
  for (size_t g = 0; g < groups_.size(); ++g)
    for (size_t i = 0; i < m_[g].size(); ++i) {
      std::string base = "opt.g" + std::to_string(g) + ".p" + std::to_string(i);
      out.emplace_back(base + ".m", m_[g][i]);
      out.emplace_back(base + ".v", v_[g][i]);
    }
  return out;
}

void AdamOptimizer::load_state(const std::vector<std::pair<std::string, Tensor>>& state) {
  for (const auto& [name, t] : state) {
    if (name == "opt.step") {
      step_count_ = static_cast<int64_t>(t[0]);
      continue;
    }
    // opt.g<G>.p<I>.(m|v)
    size_t gpos = name.find(".g"), ppos = name.find(".p"), dot = name.rfind('.');
    if (gpos == std::string::npos || ppos == std::string::npos || dot == std::string::npos)
      throw std::invalid_argument("AdamOptimizer: bad state tensor name " + name);
    size_t g = std::stoul(name.substr(gpos + 2, ppos - gpos - 2));
    size_t i = std::stoul(name.substr(ppos + 2, dot - ppos - 2));
    if (g >= m_.size() || i >= m_[g].size())
      throw std::invalid_argument("AdamOptimizer: state tensor out of range " + name);
    Tensor& dst = name.substr(dot + 1) == "m" ? m_[g][i] : v_[g][i];
    if (!dst.same_shape(t)) throw std::invalid_argument("AdamOptimizer: state shape mismatch");
    dst = t;
  }
}

Tensor crop_batch(const std::vector<Tensor>& images, const std::vector<size_t>& indices,
                  int crop, Rng& rng, bool random_offsets) {
  if (indices.empty()) throw std::invalid_argument("crop_batch: empty batch");
  Tensor batch({static_cast<int64_t>(indices.size()), 3, crop, crop});
  for (size_t b = 0; b < indices.size(); ++b) {
    const Tensor& img = images[indices[b]];
    if (img.ndim() != 3 || img.dim(0) != 3)
      throw std::invalid_argument("crop_batch: images must be (3,H,W)");
    const int64_t h = img.dim(1), w = img.dim(2);
    if (h < crop || w < crop) throw std::invalid_argument("crop_batch: image smaller than crop");
    int64_t oy, ox;
    if (random_offsets) {
      oy = h == crop ? 0 : rng.uniform_int(h - crop + 1);
      ox = w == crop ? 0 : rng.uniform_int(w - crop + 1);
    } else {
      oy = (h - crop) / 2;
      ox = (w - crop) / 2;
    }
    for (int64_t c = 0; c < 3; ++c)
      for (int64_t y = 0; y < crop; ++y) {
        const double* src = img.data() + (c * h + oy + y) * w + ox;
        double* dst = batch.data() + ((b * 3 + c) * crop + y) * crop;
        for (int64_t x = 0; x < crop; ++x) dst[x] = src[x];
      }
  }
  return batch;
}

namespace {

struct LoopHooks {
  // Builds the loss graph for one batch.
  std::function<RDGraph(const Tensor& batch, Rng& rng)> forward;
  std::vector<Var> snapshot_params;
};

TrainResult run_training(const std::vector<Tensor>& images, const TrainConfig& cfg,
                         AdamOptimizer& opt, const LoopHooks& hooks) {
  cfg.validate();
  TrainResult result;
  if (cfg.epochs == 0) return result;
  if (images.empty()) throw std::invalid_argument("training: dataset is empty");

  Rng master(cfg.seed);
  std::vector<size_t> order(images.size());
  const int64_t steps_per_epoch =
      (static_cast<int64_t>(images.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const int64_t total_steps = steps_per_epoch * cfg.epochs;

  // Last-finite snapshot for divergence recovery.
  std::vector<Tensor> snapshot;
  snapshot.reserve(hooks.snapshot_params.size());
  for (const auto& p : hooks.snapshot_params) snapshot.push_back(p->value);

  int64_t global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(master.fork(static_cast<uint64_t>(epoch + cfg.epoch_offset)));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    deterministic_shuffle(order, rng);

    double sum_loss = 0.0, sum_rate = 0.0, sum_mse = 0.0;
    int64_t batches = 0;
    bool finite = true;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      std::vector<size_t> idx(order.begin() + static_cast<int64_t>(start),
                              order.begin() +
                                  std::min(order.size(), start + static_cast<size_t>(cfg.batch_size)));
      Tensor batch = crop_batch(images, idx, cfg.crop_size, rng, /*random_offsets=*/true);
      opt.zero_grad();
      double loss;
      RDGraph g;
      try {
        g = hooks.forward(batch, rng);
        loss = g.loss->value[0];
      } catch (const std::exception&) {
        // A forward throw with non-finite parameters is a blown-up run;
        // anything else is a real bug and propagates.
        bool params_finite = true;
        for (const auto& p : hooks.snapshot_params)
          params_finite = params_finite && p->value.all_finite();
        if (params_finite) throw;
        loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(loss)) {
        finite = false;
        break;
      }
      backward(g.loss);
      double lr_scale = 1.0;
      if (cfg.schedule == LrSchedule::kCosine && total_steps > 1)
        lr_scale = 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(global_step) /
                                         static_cast<double>(total_steps)));
      opt.step(lr_scale);
      ++global_step;
      ++batches;
      sum_loss += loss;
      sum_rate += g.rate_bpp->value[0];
      sum_mse += g.distortion->value[0];
    }

    if (!finite) {
      for (size_t i = 0; i < hooks.snapshot_params.size(); ++i)
        hooks.snapshot_params[i]->value = snapshot[i];
      result.diverged = true;
      break;
    }

    EpochStats st;
    st.epoch = epoch + cfg.epoch_offset;
    st.mean_loss = sum_loss / static_cast<double>(batches);
    st.mean_rate_bpp = sum_rate / static_cast<double>(batches);
    st.mean_mse = sum_mse / static_cast<double>(batches);
    result.history.push_back(st);
    if (cfg.verbose)
      std::printf("epoch %3d  rate %.4f bpp  mse %.2f  loss %.4f\n", epoch, st.mean_rate_bpp,
                  st.mean_mse, st.mean_loss);
    for (size_t i = 0; i < hooks.snapshot_params.size(); ++i)
      snapshot[i] = hooks.snapshot_params[i]->value;
  }
  result.steps = static_cast<int>(global_step);
  return result;
}

}  // namespace

TrainResult train_baseline(LicModel& model, const std::vector<Tensor>& images,
                           const TrainConfig& config, AdamOptimizer* external_opt) {
  const double lambda = config.lambda > 0.0 ? config.lambda : model.lambda;
  std::optional<AdamOptimizer> local;
  if (!external_opt) {
    local.emplace(std::vector<AdamOptimizer::Group>{{model.parameters(), config.lr_weights}});
    external_opt = &*local;
  }
  LoopHooks hooks;
  hooks.snapshot_params = model.parameters();
  hooks.forward = [&model, lambda](const Tensor& batch, Rng& rng) {
    auto out = forward_compress(model, batch, Mode::kTrain, &rng);
    return rd_loss_graph(out.reconstruction, batch, out.likelihoods_y, out.likelihoods_z, lambda);
  };
  return run_training(images, config, *external_opt, hooks);
}

TrainResult qat_finetune(QuantizedModel& qmodel, const std::vector<Tensor>& images,
                         const TrainConfig& config) {
  qmodel.validate();
  const double lambda = config.lambda > 0.0 ? config.lambda : qmodel.model.lambda;
  AdamOptimizer opt({{qmodel.model_parameters(), config.lr_weights},
                     {qmodel.quant_parameters(), config.lr_quant}});
  LoopHooks hooks;
  hooks.snapshot_params = qmodel.model_parameters();
  for (const auto& p : qmodel.quant_parameters()) hooks.snapshot_params.push_back(p);
  hooks.forward = [&qmodel, lambda](const Tensor& batch, Rng& rng) {
    auto out = forward_quantized(qmodel, batch, Mode::kTrain, &rng);
    return rd_loss_graph(out.reconstruction, batch, out.likelihoods_y, out.likelihoods_z, lambda);
  };
  return run_training(images, config, opt, hooks);
}

}  // namespace licq
