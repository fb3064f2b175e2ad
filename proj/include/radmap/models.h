// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radmap/checkpoint.h"
#include "radmap/sampling.h"
#include "radmap/tensor.h"

namespace radmap {

struct MlpConfig {
  std::size_t coord_width = 63;
  std::size_t dir_width = 27;
  std::vector<std::size_t> widths{256, 256, 256, 128, 8};
  // The encoded direction joins the activation after this many layers.
  std::size_t dir_after = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ParamCount {
  std::size_t count = 0;
  std::size_t bytes_f32 = 0;
};

/// Maps encoded (coordinate, direction) rows to latent features.
class RadianceMLP {
 public:
  explicit RadianceMLP(MlpConfig cfg = {});

  // coords: [N, coord_width], dirs: [N, dir_width] -> [N, widths.back()]
  Tensor forward(Tape& tape, const Tensor& coords, const Tensor& dirs) const;
  Tensor forward(Tape& tape, const QueryBatch& batch) const;

  const MlpConfig& config() const { return cfg_; }
  std::size_t out_channels() const { return cfg_.widths.back(); }
  // Names "mlp.l{1..n}.{w,b}"; w is [in, out].
  const std::vector<NamedTensor>& named_params() const { return params_; }
  std::vector<Tensor> params() const;

 private:
  MlpConfig cfg_;
  std::vector<NamedTensor> params_;
};

ParamCount count_params(const RadianceMLP& mlp);
ParamCount count_params(const std::vector<NamedTensor>& params);

struct RefineConfig {
  std::size_t in_channels = 8;
  std::size_t out_channels = 3;
  std::vector<std::size_t> widths{16, 32, 64, 128, 256};
  double width_multiplier = 1.0;
  // Feeds the input feature map to the output head next to the decoder.
  bool input_skip = true;
  std::uint64_t seed = 2;

  void validate() const;
  std::size_t level_width(std::size_t level) const;
  std::size_t levels() const { return widths.size(); }
  std::size_t multiple() const { return std::size_t{1} << (widths.size() - 1); }
};

/// Encoder-decoder over [C, H, W] feature maps built from gated blocks:
/// conv(feat) * sigmoid(conv(gate)) -> relu -> instance norm.
class RefineNet {
 public:
  explicit RefineNet(RefineConfig cfg = {});

  // fmap: [in_channels, H, W] with H, W multiples of config().multiple().
  // Returns [out_channels, H, W] in (0, 1).
  Tensor forward(Tape& tape, const Tensor& fmap) const;

  const RefineConfig& config() const { return cfg_; }
  const std::vector<NamedTensor>& named_params() const { return params_; }
  std::vector<Tensor> params() const;

 private:
  struct Block {
    Tensor feat_w, feat_b, gate_w, gate_b, gamma, beta;
  };
  Tensor block(Tape& tape, const Block& b, const Tensor& x) const;
  Block make_block(const std::string& name, std::size_t in, std::size_t out, std::uint64_t stream);

  RefineConfig cfg_;
  std::vector<Block> enc_, dec_;
  Tensor out_w_, out_b_;
  std::vector<NamedTensor> params_;
};

/// [N, C] rows -> [C, H, W] map with zeros at pixels without a row. An
/// undefined `features` with no ids gives an all-zero map.
Tensor scatter_features(Tape& tape, const Tensor& features, std::span<const std::size_t> pixel_ids,
                        std::size_t channels, std::size_t height, std::size_t width);

/// Full image from a query batch: MLP, scatter, reflect-pad to the refine
/// multiple, refine, crop back. Returns [3, H, W].
Tensor render_image(Tape& tape, const RadianceMLP& mlp, const RefineNet& net, const QueryBatch& batch);

/// Copies values from `source` into same-named tensors of `target`; throws
/// FormatError naming the first missing or mis-shaped tensor.
void assign_params(const std::vector<NamedTensor>& target, const std::vector<NamedTensor>& source);

struct VolumeSamples {
  std::vector<double> ts;      // strictly increasing
  std::vector<double> sigmas;  // non-negative
  std::vector<Eigen::Vector3d> colors;
  double t_near = 0.0;
  double t_far = 1.0;

  void validate() const;
};

/// Quadrature C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i with
/// delta_i = t_{i+1} - t_i and the last interval running to t_far.
Eigen::Vector3d volume_render_oracle(const VolumeSamples& samples);

}  // namespace radmap
