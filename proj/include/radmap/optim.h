// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radmap/tensor.h"

namespace radmap {

struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> m;  // first moment, one entry per parameter
  std::vector<std::vector<double>> v;  // second moment
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. step_count is incremented before the correction terms are
/// computed. Parameters without a gradient buffer are treated as g = 0.
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr);

/// Same update with gradients supplied explicitly (one span per parameter).
void adam_step(std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads,
               AdamState& state, double lr);

/// A named parameter group bound to its own Adam state.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::vector<Tensor> params) : params_(std::move(params)) {}

  void step(double lr) { adam_step(params_, state_, lr); }
  void zero_grad();

  std::vector<Tensor>& params() { return params_; }
  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }

 private:
  std::vector<Tensor> params_;
  AdamState state_;
};

/// Learning rate after `step` multiplicative decays, lr0 * decay^step.
double decayed_lr(double lr0, double decay, std::uint64_t step);

}  // namespace radmap
