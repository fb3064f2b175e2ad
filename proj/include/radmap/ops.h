// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "radmap/tensor.h"

// Differentiable primitives. Every function records a node on `tape` when
// any input requires a gradient, and throws DimensionError on shape
// mismatch. Feature maps are channel-first: [C, H, W].
namespace radmap::ops {

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);

// Subgradient at exactly 0 is 0.
Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);

// Concatenation along the last axis; all other extents must agree.
Tensor concat_last(Tape& tape, const std::vector<Tensor>& parts);
// Concatenation along the first (channel) axis of [C, H, W] maps.
Tensor concat_channels(Tape& tape, const std::vector<Tensor>& parts);

// x: [B, I], w: [I, O], b: [O] -> [B, O]
Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

// Zero-padded cross-correlation. x: [Cin, H, W], k: [Cout, Cin, K, K] with
// K odd, b: [Cout].
Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& k, const Tensor& b,
              std::size_t stride, std::size_t padding);

// Per-channel normalisation over the spatial plane, population variance.
Tensor instance_norm(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                     double eps = 1e-5);

// 2x2 average pooling; H and W must be even.
Tensor downsample2(Tape& tape, const Tensor& x);
// Nearest-neighbour 2x replication.
Tensor upsample2(Tape& tape, const Tensor& x);

// Reflect padding of a [C, H, W] map (edge sample not repeated).
Tensor pad_reflect(Tape& tape, const Tensor& x, std::size_t top, std::size_t bottom,
                   std::size_t left, std::size_t right);
Tensor crop(Tape& tape, const Tensor& x, std::size_t top, std::size_t left, std::size_t height,
            std::size_t width);

// rows: [N, C] -> [C, H, W]; row i lands at flat pixel ids[i], every other
// pixel is zero. ids must be unique and < H*W (UsageError otherwise).
Tensor scatter_rows(Tape& tape, const Tensor& rows, std::span<const std::size_t> ids,
                    std::size_t height, std::size_t width);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);
// Mean of squared differences; returns a single-element tensor.
Tensor mse(Tape& tape, const Tensor& pred, const Tensor& target);

}  // namespace radmap::ops
