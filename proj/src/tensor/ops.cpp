// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "radmap/errors.h"

namespace radmap::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& x, std::size_t rank) {
  if (x.ndim() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " tensor, got " + shape_str(x.shape()));
  }
}

ConstMapMat as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMapMat(t.data().data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

MapMat as_matrix(std::span<double> s, std::size_t rows, std::size_t cols) {
  return MapMat(s.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

ConstMapMat as_matrix(std::span<const double> s, std::size_t rows, std::size_t cols) {
  return ConstMapMat(s.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.data();
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
  if (tape.wants({&a, &b})) {
    tape.record("add", {a, b}, out, [a, b, out]() mutable {
      auto g = out.grad();
      for (const Tensor* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        auto tg = t->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) tg[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.data();
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] - bv[i];
  if (tape.wants({&a, &b})) {
    tape.record("sub", {a, b}, out, [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ag = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
      }
      if (b.requires_grad()) {
        auto bg = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) bg[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.data();
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  if (tape.wants({&a, &b})) {
    tape.record("mul", {a, b}, out, [a, b, out]() mutable {
      auto g = out.grad();
      auto av = a.data();
      auto bv = b.data();
      if (a.requires_grad()) {
        auto ag = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto bg = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) bg[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.data();
  auto av = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * factor;
  if (tape.wants({&a})) {
    tape.record("scale", {a}, out, [a, out, factor]() mutable {
      auto g = out.grad();
      auto ag = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * factor;
    });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  auto o = out.data();
  auto xv = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  if (tape.wants({&x})) {
    tape.record("relu", {x}, out, [x, out]() mutable {
      auto g = out.grad();
      auto xv = x.data();
      auto xg = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xv[i] > 0.0) xg[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  auto o = out.data();
  auto xv = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = stable_sigmoid(xv[i]);
  if (tape.wants({&x})) {
    tape.record("sigmoid", {x}, out, [x, out]() mutable {
      auto g = out.grad();
      auto y = out.data();
      auto xg = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * y[i] * (1.0 - y[i]);
    });
  }
  return out;
}

Tensor concat_last(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw UsageError("concat_last: no inputs");
  const Shape& first = parts.front().shape();
  if (first.empty()) throw DimensionError("concat_last: scalar inputs");
  const Shape lead(first.begin(), first.end() - 1);
  const std::size_t rows = shape_numel(lead);
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      throw DimensionError("concat_last: leading extents differ, " + shape_str(first) + " vs " +
                           shape_str(s));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out = Tensor::zeros(out_shape);
  auto o = out.data();
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pv = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.begin() + r * widths[k], widths[k], o.begin() + r * total + offset);
    }
    offset += widths[k];
  }
  bool any = false;
  for (const Tensor& p : parts) any = any || (tape.enabled() && p.requires_grad());
  if (any) {
    tape.record("concat_last", parts, out, [parts, out, widths, rows, total]() mutable {
      auto g = out.grad();
      std::size_t offset = 0;
      for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].requires_grad()) {
          auto pg = parts[k].grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < widths[k]; ++c) {
              pg[r * widths[k] + c] += g[r * total + offset + c];
            }
          }
        }
        offset += widths[k];
      }
    });
  }
  return out;
}

Tensor concat_channels(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw UsageError("concat_channels: no inputs");
  const Shape& first = parts.front().shape();
  if (first.size() != 3) throw DimensionError("concat_channels: expected [C,H,W], got " + shape_str(first));
  std::size_t channels = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != 3 || s[1] != first[1] || s[2] != first[2]) {
      throw DimensionError("concat_channels: spatial extents differ, " + shape_str(first) +
                           " vs " + shape_str(s));
    }
    channels += s[0];
  }
  Tensor out = Tensor::zeros({channels, first[1], first[2]});
  auto o = out.data();
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    std::copy(p.data().begin(), p.data().end(), o.begin() + offset);
    offset += p.numel();
  }
  bool any = false;
  for (const Tensor& p : parts) any = any || (tape.enabled() && p.requires_grad());
  if (any) {
    tape.record("concat_channels", parts, out, [parts, out]() mutable {
      auto g = out.grad();
      std::size_t offset = 0;
      for (const Tensor& p : parts) {
        if (p.requires_grad()) {
          auto pg = p.grad_buffer();
          for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += g[offset + i];
        }
        offset += p.numel();
      }
    });
  }
  return out;
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank("linear", x, 2);
  require_rank("linear", w, 2);
  require_rank("linear", b, 1);
  const std::size_t batch = x.dim(0), in = x.dim(1), outw = w.dim(1);
  if (w.dim(0) != in || b.dim(0) != outw) {
    throw DimensionError("linear: x " + shape_str(x.shape()) + " incompatible with w " +
                         shape_str(w.shape()) + " and b " + shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros({batch, outw});
  auto o = as_matrix(out.data(), batch, outw);
  o.noalias() = as_matrix(x, batch, in) * as_matrix(w, in, outw);
  o.rowwise() += ConstMapVec(b.data().data(), static_cast<Eigen::Index>(outw)).transpose();
  if (tape.wants({&x, &w, &b})) {
    tape.record("linear", {x, w, b}, out, [x, w, b, out, batch, in, outw]() mutable {
      auto g = as_matrix(out.grad(), batch, outw);
      if (x.requires_grad()) {
        as_matrix(x.grad_buffer(), batch, in).noalias() += g * as_matrix(w, in, outw).transpose();
      }
      if (w.requires_grad()) {
        as_matrix(w.grad_buffer(), in, outw).noalias() += as_matrix(x, batch, in).transpose() * g;
      }
      if (b.requires_grad()) {
        MapVec(b.grad_buffer().data(), static_cast<Eigen::Index>(outw)) +=
            g.colwise().sum().transpose();
      }
    });
  }
  return out;
}

namespace {

struct ConvGeometry {
  std::size_t cin, h, w, cout, k, stride, pad, oh, ow;
  std::size_t patch() const { return cin * k * k; }
  std::size_t pixels() const { return oh * ow; }
};

// cols: [Cin*K*K, OH*OW]
void im2col(const ConvGeometry& g, std::span<const double> x, std::span<double> cols) {
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        double* row = cols.data() + ((c * g.k + ki) * g.k + kj) * g.pixels();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - pad;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - pad;
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.h) &&
                                ix < static_cast<std::ptrdiff_t>(g.w);
            row[oy * g.ow + ox] = inside ? x[(c * g.h + iy) * g.w + ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const ConvGeometry& g, std::span<const double> cols, std::span<double> x) {
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const double* row = cols.data() + ((c * g.k + ki) * g.k + kj) * g.pixels();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            x[(c * g.h + iy) * g.w + ix] += row[oy * g.ow + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& k, const Tensor& b, std::size_t stride,
              std::size_t padding) {
  require_rank("conv2d", x, 3);
  require_rank("conv2d", k, 4);
  require_rank("conv2d", b, 1);
  if (stride == 0) throw UsageError("conv2d: stride must be positive");
  ConvGeometry g{};
  g.cin = x.dim(0);
  g.h = x.dim(1);
  g.w = x.dim(2);
  g.cout = k.dim(0);
  g.k = k.dim(2);
  g.stride = stride;
  g.pad = padding;
  if (k.dim(1) != g.cin || k.dim(3) != g.k || b.dim(0) != g.cout) {
    throw DimensionError("conv2d: input " + shape_str(x.shape()) + " incompatible with kernel " +
                         shape_str(k.shape()) + " and bias " + shape_str(b.shape()));
  }
  if (g.k % 2 == 0) throw DimensionError("conv2d: kernel extent must be odd, got " + shape_str(k.shape()));
  if (g.h + 2 * g.pad < g.k || g.w + 2 * g.pad < g.k) {
    throw DimensionError("conv2d: non-positive output extent for input " + shape_str(x.shape()) +
                         " and kernel " + shape_str(k.shape()));
  }
  g.oh = (g.h + 2 * g.pad - g.k) / g.stride + 1;
  g.ow = (g.w + 2 * g.pad - g.k) / g.stride + 1;

  Buffer cols(g.patch() * g.pixels());
  im2col(g, x.data(), cols);
  Tensor out = Tensor::zeros({g.cout, g.oh, g.ow});
  auto o = as_matrix(out.data(), g.cout, g.pixels());
  o.noalias() = as_matrix(k, g.cout, g.patch()) * as_matrix(std::span<const double>(cols), g.patch(), g.pixels());
  o.colwise() += ConstMapVec(b.data().data(), static_cast<Eigen::Index>(g.cout));

  if (tape.wants({&x, &k, &b})) {
    tape.record("conv2d", {x, k, b}, out,
                [x, k, b, out, g, cols = std::move(cols)]() mutable {
                  auto grad = as_matrix(out.grad(), g.cout, g.pixels());
                  if (k.requires_grad()) {
                    as_matrix(k.grad_buffer(), g.cout, g.patch()).noalias() +=
                        grad * as_matrix(std::span<const double>(cols), g.patch(), g.pixels()).transpose();
                  }
                  if (b.requires_grad()) {
                    MapVec(b.grad_buffer().data(), static_cast<Eigen::Index>(g.cout)) +=
                        grad.rowwise().sum();
                  }
                  if (x.requires_grad()) {
                    Buffer dcols(g.patch() * g.pixels());
                    as_matrix(std::span<double>(dcols), g.patch(), g.pixels()).noalias() =
                        as_matrix(k, g.cout, g.patch()).transpose() * grad;
                    col2im(g, dcols, x.grad_buffer());
                  }
                });
  }
  return out;
}

Tensor instance_norm(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                     double eps) {
  if (x.ndim() < 2) throw DimensionError("instance_norm: expected [C, ...], got " + shape_str(x.shape()));
  const std::size_t channels = x.dim(0);
  const std::size_t n = x.numel() / channels;
  if (gamma.shape() != Shape{channels} || beta.shape() != Shape{channels}) {
    throw DimensionError("instance_norm: gamma " + shape_str(gamma.shape()) + " / beta " +
                         shape_str(beta.shape()) + " do not match input " + shape_str(x.shape()));
  }
  Tensor out = Tensor::zeros(x.shape());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(channels);
  auto xv = x.data();
  auto o = out.data();
  auto gv = gamma.data();
  auto bv = beta.data();
  for (std::size_t c = 0; c < channels; ++c) {
    const double* xc = xv.data() + c * n;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += xc[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (xc[i] - mean) * (xc[i] - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[c] = inv;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = (xc[i] - mean) * inv;
      xhat[c * n + i] = h;
      o[c * n + i] = h * gv[c] + bv[c];
    }
  }
  if (tape.wants({&x, &gamma, &beta})) {
    tape.record("instance_norm", {x, gamma, beta}, out,
                [x, gamma, beta, out, channels, n, xhat = std::move(xhat),
                 inv_std = std::move(inv_std)]() mutable {
                  auto g = out.grad();
                  auto gv = gamma.data();
                  for (std::size_t c = 0; c < channels; ++c) {
                    const double* gc = g.data() + c * n;
                    const double* hc = xhat.data() + c * n;
                    double sum_g = 0.0, sum_gh = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                      sum_g += gc[i];
                      sum_gh += gc[i] * hc[i];
                    }
                    if (gamma.requires_grad()) gamma.grad_buffer()[c] += sum_gh;
                    if (beta.requires_grad()) beta.grad_buffer()[c] += sum_g;
                    if (x.requires_grad()) {
                      auto xg = x.grad_buffer();
                      const double scale = gv[c] * inv_std[c] / static_cast<double>(n);
                      const double nn = static_cast<double>(n);
                      for (std::size_t i = 0; i < n; ++i) {
                        xg[c * n + i] += scale * (nn * gc[i] - sum_g - hc[i] * sum_gh);
                      }
                    }
                  }
                });
  }
  return out;
}

Tensor downsample2(Tape& tape, const Tensor& x) {
  require_rank("downsample2", x, 3);
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("downsample2: extents must be even, got " + shape_str(x.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor out = Tensor::zeros({c, oh, ow});
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        const std::size_t base = (ch * h + 2 * y) * w + 2 * xx;
        o[(ch * oh + y) * ow + xx] = 0.25 * (xv[base] + xv[base + 1] + xv[base + w] + xv[base + w + 1]);
      }
    }
  }
  if (tape.wants({&x})) {
    tape.record("downsample2", {x}, out, [x, out, c, h, w, oh, ow]() mutable {
      auto g = out.grad();
      auto xg = x.grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t xx = 0; xx < ow; ++xx) {
            const double v = 0.25 * g[(ch * oh + y) * ow + xx];
            const std::size_t base = (ch * h + 2 * y) * w + 2 * xx;
            xg[base] += v;
            xg[base + 1] += v;
            xg[base + w] += v;
            xg[base + w + 1] += v;
          }
        }
      }
    });
  }
  return out;
}

Tensor upsample2(Tape& tape, const Tensor& x) {
  require_rank("upsample2", x, 3);
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t oh = 2 * h, ow = 2 * w;
  Tensor out = Tensor::zeros({c, oh, ow});
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        o[(ch * oh + y) * ow + xx] = xv[(ch * h + y / 2) * w + xx / 2];
      }
    }
  }
  if (tape.wants({&x})) {
    tape.record("upsample2", {x}, out, [x, out, c, h, w, oh, ow]() mutable {
      auto g = out.grad();
      auto xg = x.grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t xx = 0; xx < ow; ++xx) {
            xg[(ch * h + y / 2) * w + xx / 2] += g[(ch * oh + y) * ow + xx];
          }
        }
      }
    });
  }
  return out;
}

namespace {

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (m == 1) return 0;
  while (i < 0 || i >= m) {
    if (i < 0) i = -i;
    if (i >= m) i = 2 * (m - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

Tensor pad_reflect(Tape& tape, const Tensor& x, std::size_t top, std::size_t bottom,
                   std::size_t left, std::size_t right) {
  require_rank("pad_reflect", x, 3);
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (std::max(top, bottom) >= h || std::max(left, right) >= w) {
    throw DimensionError("pad_reflect: padding must be smaller than the extent of " +
                         shape_str(x.shape()));
  }
  const std::size_t oh = h + top + bottom, ow = w + left + right;
  std::vector<std::size_t> src(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    const std::size_t sy = reflect_index(static_cast<std::ptrdiff_t>(y) - static_cast<std::ptrdiff_t>(top), h);
    for (std::size_t xx = 0; xx < ow; ++xx) {
      const std::size_t sx = reflect_index(static_cast<std::ptrdiff_t>(xx) - static_cast<std::ptrdiff_t>(left), w);
      src[y * ow + xx] = sy * w + sx;
    }
  }
  Tensor out = Tensor::zeros({c, oh, ow});
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < oh * ow; ++p) o[ch * oh * ow + p] = xv[ch * h * w + src[p]];
  }
  if (tape.wants({&x})) {
    tape.record("pad_reflect", {x}, out, [x, out, c, h, w, oh, ow, src = std::move(src)]() mutable {
      auto g = out.grad();
      auto xg = x.grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < oh * ow; ++p) xg[ch * h * w + src[p]] += g[ch * oh * ow + p];
      }
    });
  }
  return out;
}

Tensor crop(Tape& tape, const Tensor& x, std::size_t top, std::size_t left, std::size_t height,
            std::size_t width) {
  require_rank("crop", x, 3);
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (height == 0 || width == 0 || top + height > h || left + width > w) {
    throw DimensionError("crop: window exceeds " + shape_str(x.shape()));
  }
  Tensor out = Tensor::zeros({c, height, width});
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < height; ++y) {
      std::copy_n(xv.begin() + (ch * h + top + y) * w + left, width,
                  o.begin() + (ch * height + y) * width);
    }
  }
  if (tape.wants({&x})) {
    tape.record("crop", {x}, out, [x, out, c, h, w, top, left, height, width]() mutable {
      auto g = out.grad();
      auto xg = x.grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < height; ++y) {
          for (std::size_t xx = 0; xx < width; ++xx) {
            xg[(ch * h + top + y) * w + left + xx] += g[(ch * height + y) * width + xx];
          }
        }
      }
    });
  }
  return out;
}

Tensor scatter_rows(Tape& tape, const Tensor& rows, std::span<const std::size_t> ids,
                    std::size_t height, std::size_t width) {
  const std::size_t pixels = height * width;
  if (pixels == 0) throw DimensionError("scatter_rows: empty target map");
  std::size_t channels = 0;
  if (!ids.empty()) {
    require_rank("scatter_rows", rows, 2);
    if (rows.dim(0) != ids.size()) {
      throw DimensionError("scatter_rows: " + std::to_string(ids.size()) + " ids for rows " +
                           shape_str(rows.shape()));
    }
    channels = rows.dim(1);
  } else if (rows.defined()) {
    channels = rows.dim(rows.ndim() - 1);
  } else {
    throw UsageError("scatter_rows: channel count unknown for an undefined empty batch");
  }
  std::vector<char> seen(pixels, 0);
  for (std::size_t id : ids) {
    if (id >= pixels) throw UsageError("scatter_rows: pixel id " + std::to_string(id) + " out of range");
    if (seen[id]) throw UsageError("scatter_rows: duplicate pixel id " + std::to_string(id));
    seen[id] = 1;
  }
  Tensor out = Tensor::zeros({channels, height, width});
  auto o = out.data();
  if (!ids.empty()) {
    auto rv = rows.data();
    for (std::size_t r = 0; r < ids.size(); ++r) {
      for (std::size_t ch = 0; ch < channels; ++ch) o[ch * pixels + ids[r]] = rv[r * channels + ch];
    }
  }
  if (!ids.empty() && tape.wants({&rows})) {
    std::vector<std::size_t> id_copy(ids.begin(), ids.end());
    tape.record("scatter_rows", {rows}, out,
                [rows, out, channels, pixels, id_copy = std::move(id_copy)]() mutable {
                  auto g = out.grad();
                  auto rg = rows.grad_buffer();
                  for (std::size_t r = 0; r < id_copy.size(); ++r) {
                    for (std::size_t ch = 0; ch < channels; ++ch) {
                      rg[r * channels + ch] += g[ch * pixels + id_copy[r]];
                    }
                  }
                });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  Tensor out = Tensor::scalar(acc);
  if (tape.wants({&x})) {
    tape.record("sum", {x}, out, [x, out]() mutable {
      const double g = out.grad()[0];
      for (double& v : x.grad_buffer()) v += g;
    });
  }
  return out;
}

Tensor mean(Tape& tape, const Tensor& x) {
  return scale(tape, sum(tape, x), 1.0 / static_cast<double>(x.numel()));
}

Tensor mse(Tape& tape, const Tensor& pred, const Tensor& target) {
  require_same_shape("mse", pred, target);
  auto p = pred.data();
  auto t = target.data();
  const double n = static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - t[i]) * (p[i] - t[i]);
  Tensor out = Tensor::scalar(acc / n);
  if (tape.wants({&pred, &target})) {
    tape.record("mse", {pred, target}, out, [pred, target, out, n]() mutable {
      const double g = out.grad()[0] * 2.0 / n;
      auto p = pred.data();
      auto t = target.data();
      if (pred.requires_grad()) {
        auto pg = pred.grad_buffer();
        for (std::size_t i = 0; i < p.size(); ++i) pg[i] += g * (p[i] - t[i]);
      }
      if (target.requires_grad()) {
        auto tg = target.grad_buffer();
        for (std::size_t i = 0; i < p.size(); ++i) tg[i] -= g * (p[i] - t[i]);
      }
    });
  }
  return out;
}

}  // namespace radmap::ops
