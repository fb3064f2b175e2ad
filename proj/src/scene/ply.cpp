// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/ply.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radmap/errors.h"

namespace radmap {
namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<Scalar> parse_scalar(const std::string& name) {
  if (name == "char" || name == "int8") return Scalar::i8;
  if (name == "uchar" || name == "uint8") return Scalar::u8;
  if (name == "short" || name == "int16") return Scalar::i16;
  if (name == "ushort" || name == "uint16") return Scalar::u16;
  if (name == "int" || name == "int32") return Scalar::i32;
  if (name == "uint" || name == "uint32") return Scalar::u32;
  if (name == "float" || name == "float32") return Scalar::f32;
  if (name == "double" || name == "float64") return Scalar::f64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::i8:
    case Scalar::u8: return 1;
    case Scalar::i16:
    case Scalar::u16: return 2;
    case Scalar::i32:
    case Scalar::u32:
    case Scalar::f32: return 4;
    case Scalar::f64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::f32;
  bool is_list = false;
  Scalar count_type = Scalar::u8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

template <typename T>
double read_as(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double read_scalar(Scalar s, const unsigned char* p) {
  switch (s) {
    case Scalar::i8: return read_as<std::int8_t>(p);
    case Scalar::u8: return read_as<std::uint8_t>(p);
    case Scalar::i16: return read_as<std::int16_t>(p);
    case Scalar::u16: return read_as<std::uint16_t>(p);
    case Scalar::i32: return read_as<std::int32_t>(p);
    case Scalar::u32: return read_as<std::uint32_t>(p);
    case Scalar::f32: return read_as<float>(p);
    case Scalar::f64: return read_as<double>(p);
  }
  return 0.0;
}

class VertexSink {
 public:
  explicit VertexSink(const Element& e) {
    for (std::size_t i = 0; i < e.properties.size(); ++i) {
      const std::string& n = e.properties[i].name;
      if (e.properties[i].is_list) continue;
      if (n == "x") slot_[0] = i;
      if (n == "y") slot_[1] = i;
      if (n == "z") slot_[2] = i;
      if (n == "red") slot_[3] = i;
      if (n == "green") slot_[4] = i;
      if (n == "blue") slot_[5] = i;
    }
    for (int k = 0; k < 3; ++k) {
      if (!slot_[k]) throw FormatError("PLY vertex element lacks property x, y or z");
    }
    has_color_ = slot_[3] && slot_[4] && slot_[5];
    if (has_color_) {
      for (int k = 3; k < 6; ++k) byte_color_[k - 3] = e.properties[*slot_[k]].type == Scalar::u8;
    }
    values_.assign(e.properties.size(), 0.0);
  }

  std::vector<double>& values() { return values_; }

  void commit(PointCloud& cloud) const {
    cloud.positions.emplace_back(values_[*slot_[0]], values_[*slot_[1]], values_[*slot_[2]]);
    if (has_color_) {
      Eigen::Vector3d c;
      for (int k = 0; k < 3; ++k) {
        const double v = values_[*slot_[3 + k]];
        c[k] = byte_color_[k] ? v / 255.0 : v;
      }
      cloud.colors.push_back(c);
    }
  }

 private:
  std::optional<std::size_t> slot_[6];
  bool has_color_ = false;
  bool byte_color_[3] = {false, false, false};
  std::vector<double> values_;
};

}  // namespace

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file " + path.string());

  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError("missing 'ply' magic", line_no == 0 ? 1 : line_no);
  bool binary = false;
  bool have_format = false;
  std::vector<Element> elements;
  bool ended = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt == "binary_big_endian") {
        throw UnsupportedFormatError("big-endian PLY payloads are not supported: " + path.string());
      } else {
        throw ParseError("unknown PLY format '" + fmt + "'", line_no);
      }
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      if (!(ls >> e.name >> count) || count < 0) throw ParseError("malformed element line", line_no);
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (elements.empty()) throw ParseError("property before any element", line_no);
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        auto ct = parse_scalar(count_type);
        auto it = parse_scalar(item_type);
        if (!ct || !it || p.name.empty()) throw ParseError("malformed list property", line_no);
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        auto t = parse_scalar(type);
        ls >> p.name;
        if (!t || p.name.empty()) throw ParseError("unknown property type '" + type + "'", line_no);
        p.type = *t;
      }
      elements.back().properties.push_back(p);
    } else if (keyword == "end_header") {
      ended = true;
      break;
    } else {
      throw ParseError("unexpected header keyword '" + keyword + "'", line_no);
    }
  }
  if (!ended) throw ParseError("header not terminated by end_header", line_no + 1);
  if (!have_format) throw ParseError("header has no format line", line_no);

  PointCloud cloud;
  if (binary) {
    std::vector<unsigned char> body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
      if (pos + n > body.size()) throw LengthError("PLY body truncated: " + path.string());
    };
    for (const Element& e : elements) {
      std::optional<VertexSink> sink;
      if (e.name == "vertex") sink.emplace(e);
      for (std::size_t r = 0; r < e.count; ++r) {
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (p.is_list) {
            need(scalar_size(p.count_type));
            const auto n = static_cast<std::size_t>(read_scalar(p.count_type, &body[pos]));
            pos += scalar_size(p.count_type);
            need(n * scalar_size(p.type));
            pos += n * scalar_size(p.type);
          } else {
            need(scalar_size(p.type));
            if (sink) sink->values()[k] = read_scalar(p.type, &body[pos]);
            pos += scalar_size(p.type);
          }
        }
        if (sink) sink->commit(cloud);
      }
      if (sink) break;
    }
  } else {
    for (const Element& e : elements) {
      std::optional<VertexSink> sink;
      if (e.name == "vertex") sink.emplace(e);
      for (std::size_t r = 0; r < e.count; ++r) {
        if (!next_line()) throw LengthError("PLY body truncated: " + path.string());
        std::istringstream ls(line);
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          double v = 0.0;
          if (!(ls >> v)) throw ParseError("too few values in element row", line_no);
          if (p.is_list) {
            for (long long i = 0; i < static_cast<long long>(v); ++i) {
              double skip;
              if (!(ls >> skip)) throw ParseError("too few list entries", line_no);
            }
          } else if (sink) {
            sink->values()[k] = p.type == Scalar::f32 ? double(float(v)) : v;
          }
        }
        if (sink) sink->commit(cloud);
      }
      if (sink) break;
    }
  }
  return cloud;
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file " + path.string());
  const bool color = cloud.has_colors();
  out << "ply\n"
      << "format " << (encoding == PlyEncoding::ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (color) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  auto to_byte = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float xyz[3] = {static_cast<float>(cloud.positions[i].x()),
                          static_cast<float>(cloud.positions[i].y()),
                          static_cast<float>(cloud.positions[i].z())};
    std::uint8_t rgb[3] = {0, 0, 0};
    if (color) {
      for (int k = 0; k < 3; ++k) rgb[k] = to_byte(cloud.colors[i][k]);
    }
    if (encoding == PlyEncoding::ascii) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g", xyz[0], xyz[1], xyz[2]);
      out << buf;
      if (color) out << ' ' << int(rgb[0]) << ' ' << int(rgb[1]) << ' ' << int(rgb[2]);
      out << '\n';
    } else {
      out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
      if (color) out.write(reinterpret_cast<const char*>(rgb), sizeof rgb);
    }
  }
  if (!out) throw IoError("failed writing PLY file " + path.string());
}

}  // namespace radmap
