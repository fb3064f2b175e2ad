// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "radmap/errors.h"
#include "radmap/models.h"
#include "radmap/ops.h"
#include "radmap/random.h"

namespace radmap {

void RefineConfig::validate() const {
  if (widths.empty()) throw ValidationError("refine net needs at least one level");
  if (!(width_multiplier > 0.0)) throw ValidationError("width multiplier must be positive");
  if (in_channels == 0 || out_channels == 0) throw ValidationError("refine channel counts must be positive");
  for (std::size_t w : widths) {
    if (w == 0) throw ValidationError("refine level widths must be positive");
  }
}

std::size_t RefineConfig::level_width(std::size_t level) const {
  const double w = std::round(double(widths.at(level)) * width_multiplier);
  return std::max<std::size_t>(1, static_cast<std::size_t>(w));
}

RefineNet::Block RefineNet::make_block(const std::string& name, std::size_t in, std::size_t out,
                                       std::uint64_t stream) {
  Rng rng(cfg_.seed, stream);
  const double bound = std::sqrt(1.0 / double(in * 9));
  auto uniform = [&](Shape shape) {
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = rng.uniform(-bound, bound);
    return Tensor::from(std::move(shape), std::move(v), true);
  };
  Block b;
  b.feat_w = uniform({out, in, 3, 3});
  b.feat_b = uniform({out});
  b.gate_w = uniform({out, in, 3, 3});
  b.gate_b = uniform({out});
  b.gamma = Tensor::full({out}, 1.0, true);
  b.beta = Tensor::zeros({out}, true);
  params_.push_back({name + ".feat.w", b.feat_w});
  params_.push_back({name + ".feat.b", b.feat_b});
  params_.push_back({name + ".gate.w", b.gate_w});
  params_.push_back({name + ".gate.b", b.gate_b});
  params_.push_back({name + ".norm.gamma", b.gamma});
  params_.push_back({name + ".norm.beta", b.beta});
  return b;
}

RefineNet::RefineNet(RefineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t levels = cfg_.levels();
  std::uint64_t stream = 0;
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t in = l == 0 ? cfg_.in_channels : cfg_.level_width(l - 1);
    enc_.push_back(make_block("refine.enc" + std::to_string(l), in, cfg_.level_width(l), stream++));
  }
  dec_.resize(levels > 0 ? levels - 1 : 0);
  for (std::size_t l = levels - 1; l-- > 0;) {
    const std::size_t in = cfg_.level_width(l + 1) + cfg_.level_width(l);
    dec_[l] = make_block("refine.dec" + std::to_string(l), in, cfg_.level_width(l), stream++);
  }
  const std::size_t head_in = cfg_.level_width(0) + (cfg_.input_skip ? cfg_.in_channels : 0);
  Rng rng(cfg_.seed, stream);
  const double bound = std::sqrt(1.0 / double(head_in));
  std::vector<double> w(cfg_.out_channels * head_in), b(cfg_.out_channels);
  for (double& v : w) v = rng.uniform(-bound, bound);
  for (double& v : b) v = rng.uniform(-bound, bound);
  out_w_ = Tensor::from({cfg_.out_channels, head_in, 1, 1}, std::move(w), true);
  out_b_ = Tensor::from({cfg_.out_channels}, std::move(b), true);
  params_.push_back({"refine.out.w", out_w_});
  params_.push_back({"refine.out.b", out_b_});
}

Tensor RefineNet::block(Tape& tape, const Block& b, const Tensor& x) const {
  const Tensor feat = ops::conv2d(tape, x, b.feat_w, b.feat_b, 1, 1);
  const Tensor gate = ops::sigmoid(tape, ops::conv2d(tape, x, b.gate_w, b.gate_b, 1, 1));
  return ops::instance_norm(tape, ops::relu(tape, ops::mul(tape, feat, gate)), b.gamma, b.beta);
}

Tensor RefineNet::forward(Tape& tape, const Tensor& fmap) const {
  if (fmap.ndim() != 3 || fmap.dim(0) != cfg_.in_channels) {
    throw DimensionError("refine net expects [" + std::to_string(cfg_.in_channels) +
                         ", H, W], got " + shape_str(fmap.shape()));
  }
  const std::size_t m = cfg_.multiple();
  if (fmap.dim(1) % m != 0 || fmap.dim(2) % m != 0) {
    throw DimensionError("refine net input " + shape_str(fmap.shape()) +
                         " must have H and W divisible by " + std::to_string(m) +
                         "; pad the feature map first");
  }
  std::vector<Tensor> skips;
  Tensor h = fmap;
  for (std::size_t l = 0; l < enc_.size(); ++l) {
    if (l > 0) h = ops::downsample2(tape, h);
    h = block(tape, enc_[l], h);
    skips.push_back(h);
  }
  for (std::size_t l = dec_.size(); l-- > 0;) {
    h = ops::concat_channels(tape, {ops::upsample2(tape, h), skips[l]});
    h = block(tape, dec_[l], h);
  }
  if (cfg_.input_skip) h = ops::concat_channels(tape, {h, fmap});
  return ops::sigmoid(tape, ops::conv2d(tape, h, out_w_, out_b_, 1, 0));
}

std::vector<Tensor> RefineNet::params() const {
  std::vector<Tensor> out;
  for (const auto& p : params_) out.push_back(p.tensor);
  return out;
}

}  // namespace radmap
