// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/errors.h"
#include "radmap/models.h"
#include "radmap/ops.h"

namespace radmap {

Tensor scatter_features(Tape& tape, const Tensor& features, std::span<const std::size_t> pixel_ids,
                        std::size_t channels, std::size_t height, std::size_t width) {
  if (!features.defined()) {
    if (!pixel_ids.empty()) throw UsageError("scatter_features: ids given without feature rows");
    return Tensor::zeros({channels, height, width});
  }
  if (features.ndim() != 2 || features.dim(1) != channels) {
    throw DimensionError("scatter_features expects [N, " + std::to_string(channels) + "], got " +
                         shape_str(features.shape()));
  }
  return ops::scatter_rows(tape, features, pixel_ids, height, width);
}

Tensor render_image(Tape& tape, const RadianceMLP& mlp, const RefineNet& net, const QueryBatch& batch) {
  const std::size_t h = std::size_t(batch.height), w = std::size_t(batch.width);
  const std::size_t c = mlp.out_channels();
  if (c != net.config().in_channels) {
    throw DimensionError("MLP emits " + std::to_string(c) + " channels but the refine net takes " +
                         std::to_string(net.config().in_channels));
  }
  Tensor fmap = scatter_features(tape, batch.size() == 0 ? Tensor{} : mlp.forward(tape, batch),
                                 batch.pixel_ids, c, h, w);
  const std::size_t m = net.config().multiple();
  const std::size_t ph = (h + m - 1) / m * m, pw = (w + m - 1) / m * m;
  if (ph == h && pw == w) return net.forward(tape, fmap);
  fmap = ops::pad_reflect(tape, fmap, 0, ph - h, 0, pw - w);
  return ops::crop(tape, net.forward(tape, fmap), 0, 0, h, w);
}

}  // namespace radmap
