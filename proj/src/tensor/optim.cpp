// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/optim.h"

#include <cmath>

#include "radmap/errors.h"

namespace radmap {
namespace {

void ensure_moments(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam: moment count does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].numel() || state.v[i].size() != params[i].numel()) {
      throw DimensionError("adam: moment shape mismatch for parameter " + std::to_string(i) +
                           " of shape " + shape_str(params[i].shape()));
    }
  }
}

void update(Tensor& param, std::span<const double> grad, std::vector<double>& m,
            std::vector<double>& v, const AdamState& state, double lr) {
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  auto p = param.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = grad.empty() ? 0.0 : grad[i];
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw UsageError("adam: learning rate must be positive");
  ensure_moments(params, state);
  ++state.step_count;
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i], params[i].grad(), state.m[i], state.v[i], state, lr);
  }
}

void adam_step(std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads,
               AdamState& state, double lr) {
  if (!(lr > 0.0)) throw UsageError("adam: learning rate must be positive");
  if (grads.size() != params.size()) throw DimensionError("adam: gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].numel()) {
      throw DimensionError("adam: gradient shape mismatch for parameter " + std::to_string(i));
    }
  }
  ensure_moments(params, state);
  ++state.step_count;
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i], grads[i], state.m[i], state.v[i], state, lr);
  }
}

void Adam::zero_grad() {
  for (const Tensor& p : params_) p.zero_grad();
}

double decayed_lr(double lr0, double decay, std::uint64_t step) {
  return lr0 * std::pow(decay, static_cast<double>(step));
}

}  // namespace radmap
