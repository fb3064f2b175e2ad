// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "radmap/errors.h"
#include "radmap/models.h"
#include "radmap/ops.h"
#include "radmap/random.h"

namespace radmap {

void MlpConfig::validate() const {
  if (widths.empty()) throw ValidationError("the MLP needs at least one layer");
  for (std::size_t w : widths) {
    if (w == 0) throw ValidationError("MLP layer widths must be positive");
  }
  if (coord_width == 0) throw ValidationError("MLP coordinate width must be positive");
  if (dir_width > 0 && (dir_after == 0 || dir_after >= widths.size())) {
    throw ValidationError("direction input must join between two layers (1 <= dir_after < " +
                          std::to_string(widths.size()) + ")");
  }
}

RadianceMLP::RadianceMLP(MlpConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(cfg_.seed, 0x4D4C50);
  std::size_t in = cfg_.coord_width;
  for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
    if (l == cfg_.dir_after && cfg_.dir_width > 0) in += cfg_.dir_width;
    const std::size_t out = cfg_.widths[l];
    const double bound = std::sqrt(1.0 / double(in));
    std::vector<double> w(in * out), b(out);
    for (double& v : w) v = rng.uniform(-bound, bound);
    for (double& v : b) v = rng.uniform(-bound, bound);
    const std::string prefix = "mlp.l" + std::to_string(l + 1);
    params_.push_back({prefix + ".w", Tensor::from({in, out}, std::move(w), true)});
    params_.push_back({prefix + ".b", Tensor::from({out}, std::move(b), true)});
    in = out;
  }
}

Tensor RadianceMLP::forward(Tape& tape, const Tensor& coords, const Tensor& dirs) const {
  if (coords.ndim() != 2 || coords.dim(1) != cfg_.coord_width) {
    throw DimensionError("MLP expects coordinates [N, " + std::to_string(cfg_.coord_width) +
                         "], got " + shape_str(coords.shape()));
  }
  if (cfg_.dir_width > 0 &&
      (dirs.ndim() != 2 || dirs.dim(1) != cfg_.dir_width || dirs.dim(0) != coords.dim(0))) {
    throw DimensionError("MLP expects directions [" + std::to_string(coords.dim(0)) + ", " +
                         std::to_string(cfg_.dir_width) + "], got " + shape_str(dirs.shape()));
  }
  Tensor h = coords;
  const std::size_t n = cfg_.widths.size();
  for (std::size_t l = 0; l < n; ++l) {
    if (l == cfg_.dir_after && cfg_.dir_width > 0) h = ops::concat_last(tape, {h, dirs});
    h = ops::linear(tape, h, params_[2 * l].tensor, params_[2 * l + 1].tensor);
    if (l + 1 < n) h = ops::relu(tape, h);
  }
  return h;
}

Tensor RadianceMLP::forward(Tape& tape, const QueryBatch& batch) const {
  if (batch.size() == 0) throw UsageError("MLP forward on an empty query batch");
  return forward(tape, batch.coords_encoded, batch.dirs_encoded);
}

std::vector<Tensor> RadianceMLP::params() const {
  std::vector<Tensor> out;
  for (const auto& p : params_) out.push_back(p.tensor);
  return out;
}

ParamCount count_params(const std::vector<NamedTensor>& params) {
  ParamCount c;
  for (const auto& p : params) c.count += p.tensor.numel();
  c.bytes_f32 = 4 * c.count;
  return c;
}

ParamCount count_params(const RadianceMLP& mlp) { return count_params(mlp.named_params()); }

void assign_params(const std::vector<NamedTensor>& target, const std::vector<NamedTensor>& source) {
  for (const auto& t : target) {
    const NamedTensor* s = find_tensor(source, t.name);
    if (!s) throw FormatError("checkpoint lacks tensor '" + t.name + "'");
    if (s->tensor.shape() != t.tensor.shape()) {
      throw FormatError("tensor '" + t.name + "' has shape " + shape_str(s->tensor.shape()) +
                        " in the checkpoint but " + shape_str(t.tensor.shape()) + " in the model");
    }
    Tensor dst = t.tensor;
    std::copy(s->tensor.data().begin(), s->tensor.data().end(), dst.data().begin());
  }
}

}  // namespace radmap
