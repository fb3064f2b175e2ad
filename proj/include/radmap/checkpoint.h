// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radmap/tensor.h"

namespace radmap {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// RMCK container, all integers little-endian:
//   "RMCK" | u32 version (=1) | u32 tensor count
//   per tensor: u16 name length | UTF-8 name | u8 ndim | ndim x u64 dims |
//               prod(dims) x f32 payload
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& tensors);
/// Throws FormatError on a bad magic or version, LengthError on truncation.
std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

/// Bytes taken by the f32 payloads alone.
std::size_t checkpoint_payload_bytes(const std::vector<NamedTensor>& tensors);

const NamedTensor* find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);

// Strings (config echoes) travel as one f32 per byte.
Tensor string_to_tensor(const std::string& text);
std::string tensor_to_string(const Tensor& t);

}  // namespace radmap
