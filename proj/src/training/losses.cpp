// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "radmap/checkpoint.h"
#include "radmap/errors.h"
#include "radmap/ops.h"
#include "radmap/random.h"
#include "radmap/training.h"

namespace radmap {

PerceptualExtractor::PerceptualExtractor(const PerceptualConfig& cfg) {
  if (cfg.channels.empty()) throw ValidationError("perceptual extractor needs at least one level");
  if (cfg.kernel % 2 == 0) throw ValidationError("perceptual kernel size must be odd");
  std::vector<NamedTensor> external;
  if (!cfg.weights.empty()) external = load_checkpoint(cfg.weights);
  std::size_t in = 3;
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const std::size_t out = cfg.channels[l], k = cfg.kernel;
    const std::string prefix = "perc.l" + std::to_string(l);
    Tensor w = Tensor::zeros({out, in, k, k}), b = Tensor::zeros({out});
    if (external.empty()) {
      // Unit-variance responses for unit-variance inputs.
      Rng rng(cfg.seed, l);
      const double bound = std::sqrt(3.0 / double(in * k * k));
      for (double& v : w.data()) v = rng.uniform(-bound, bound);
      for (double& v : b.data()) v = rng.uniform(-0.1, 0.1);
    }
    params_.push_back({prefix + ".w", w});
    params_.push_back({prefix + ".b", b});
    in = out;
  }
  if (!external.empty()) assign_params(params_, external);
}

std::vector<Tensor> PerceptualExtractor::features(Tape& tape, const Tensor& image) const {
  std::vector<Tensor> out;
  Tensor h = image;
  for (std::size_t l = 0; l < params_.size() / 2; ++l) {
    const Tensor& w = params_[2 * l].tensor;
    const std::size_t k = w.dim(2);
    h = ops::relu(tape, ops::conv2d(tape, h, w, params_[2 * l + 1].tensor, l == 0 ? 1 : 2, k / 2));
    out.push_back(h);
  }
  return out;
}

void LossConfig::validate() const {
  if (!(w_l2 >= 0.0) || !(w_perc >= 0.0)) throw ValidationError("loss weights must be non-negative");
}

Tensor perceptual_loss(Tape& tape, const Tensor& pred, const Tensor& gt,
                       const PerceptualExtractor& extractor) {
  if (pred.shape() != gt.shape()) {
    throw DimensionError("perceptual loss shapes differ: " + shape_str(pred.shape()) + " vs " +
                         shape_str(gt.shape()));
  }
  const auto fp = extractor.features(tape, pred);
  const auto fg = extractor.features(tape, gt);
  Tensor total;
  for (std::size_t l = 0; l < fp.size(); ++l) {
    const Tensor term = ops::mse(tape, fp[l], fg[l]);
    total = total.defined() ? ops::add(tape, total, term) : term;
  }
  return total;
}

LossTerms total_loss(Tape& tape, const Tensor& pred, const Tensor& gt, const LossConfig& cfg,
                     const PerceptualExtractor& extractor) {
  cfg.validate();
  LossTerms t;
  const Tensor l2 = ops::mse(tape, pred, gt);
  t.l2 = l2.item();
  t.total = cfg.w_l2 == 1.0 ? l2 : ops::scale(tape, l2, cfg.w_l2);
  if (cfg.w_perc != 0.0) {
    const Tensor perc = perceptual_loss(tape, pred, gt, extractor);
    t.perceptual = perc.item();
    t.total = ops::add(tape, t.total, ops::scale(tape, perc, cfg.w_perc));
  }
  return t;
}

}  // namespace radmap
