// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "radmap/errors.h"

namespace radmap {
namespace {

static_assert(std::endian::native == std::endian::little, "RMCK I/O assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw LengthError("checkpoint truncated: need " + std::to_string(pos_ + n) + " bytes, have " +
                        std::to_string(bytes_.size()));
    }
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& tensors) {
  std::vector<std::uint8_t> out = {'R', 'M', 'C', 'K'};
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& nt : tensors) {
    if (nt.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw UsageError("checkpoint tensor name too long: " + nt.name.substr(0, 32) + "...");
    }
    put<std::uint16_t>(out, static_cast<std::uint16_t>(nt.name.size()));
    out.insert(out.end(), nt.name.begin(), nt.name.end());
    const Shape& shape = nt.tensor.shape();
    put<std::uint8_t>(out, static_cast<std::uint8_t>(shape.size()));
    for (std::size_t d : shape) put<std::uint64_t>(out, d);
    for (double v : nt.tensor.data()) put<float>(out, static_cast<float>(v));
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), "RMCK", 4) != 0) throw FormatError("not an RMCK checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported RMCK version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>();
    const auto name_bytes = r.take(name_len);
    NamedTensor nt;
    nt.name.assign(name_bytes.begin(), name_bytes.end());
    const auto ndim = r.get<std::uint8_t>();
    Shape shape(ndim);
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.get<std::uint64_t>());
      if (d == 0) throw FormatError("tensor '" + nt.name + "' has a zero extent");
    }
    const std::size_t n = shape_numel(shape);
    const auto payload = r.take(n * sizeof(float));
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) {
      float f;
      std::memcpy(&f, payload.data() + k * sizeof(float), sizeof f);
      values[k] = f;
    }
    nt.tensor = Tensor::from(std::move(shape), std::move(values));
    out.push_back(std::move(nt));
  }
  if (!r.done()) throw FormatError("trailing bytes after the last checkpoint tensor");
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  const auto bytes = encode_checkpoint(tensors);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::size_t checkpoint_payload_bytes(const std::vector<NamedTensor>& tensors) {
  std::size_t total = 0;
  for (const NamedTensor& nt : tensors) total += nt.tensor.numel() * sizeof(float);
  return total;
}

const NamedTensor* find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const NamedTensor& nt : tensors) {
    if (nt.name == name) return &nt;
  }
  return nullptr;
}

Tensor string_to_tensor(const std::string& text) {
  std::vector<double> v;
  for (unsigned char c : text) v.push_back(c);
  if (v.empty()) v.push_back(0.0);
  const std::size_t n = v.size();
  return Tensor::from({n}, std::move(v));
}

std::string tensor_to_string(const Tensor& t) {
  std::string s;
  for (double c : t.data()) {
    if (c != 0.0) s.push_back(static_cast<char>(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace radmap
