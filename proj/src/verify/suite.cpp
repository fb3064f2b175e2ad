// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>

#include "radmap/gradcheck.h"
#include "radmap/models.h"
#include "radmap/ops.h"
#include "radmap/training.h"

namespace radmap {

namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(rng.integer(std::int64_t(lo), std::int64_t(hi)));
}

Tensor random_tensor(Rng& rng, Shape shape, double stddev = 1.0) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.normal(0.0, stddev);
  return Tensor::from(std::move(shape), std::move(v), true);
}

Shape random_shape(Rng& rng) {
  Shape s(pick(rng, 1, 3));
  for (auto& d : s) d = pick(rng, 1, 4);
  return s;
}

// Contracts an op output with fixed random weights so every output element
// carries a distinct upstream gradient.
std::function<Tensor(Tape&)> weighted(std::function<Tensor(Tape&)> f, Rng& rng, const Shape& out_shape) {
  Tensor w = random_tensor(rng, out_shape);
  w.set_requires_grad(false);
  return [f = std::move(f), w](Tape& tape) { return ops::sum(tape, ops::mul(tape, f(tape), w)); };
}

GradProblem unary(Rng& rng, Shape shape, double stddev,
                  std::function<Tensor(Tape&, const Tensor&)> op, Shape out_shape = {}) {
  Tensor x = random_tensor(rng, shape, stddev);
  if (out_shape.empty()) out_shape = shape;
  return {{{"x", x}}, weighted([x, op](Tape& t) { return op(t, x); }, rng, out_shape)};
}

GradProblem binary(Rng& rng, std::function<Tensor(Tape&, const Tensor&, const Tensor&)> op) {
  const Shape s = random_shape(rng);
  Tensor a = random_tensor(rng, s), b = random_tensor(rng, s);
  return {{{"a", a}, {"b", b}}, weighted([a, b, op](Tape& t) { return op(t, a, b); }, rng, s)};
}

std::vector<GradCase> build_cases() {
  std::vector<GradCase> cases;
  cases.push_back({"add", [](Rng& r) { return binary(r, ops::add); }});
  cases.push_back({"sub", [](Rng& r) { return binary(r, ops::sub); }});
  cases.push_back({"mul", [](Rng& r) { return binary(r, ops::mul); }});
  cases.push_back({"scale", [](Rng& r) {
                     const double f = r.uniform(-3.0, 3.0);
                     return unary(r, random_shape(r), 1.0, [f](Tape& t, const Tensor& x) { return ops::scale(t, x, f); });
                   }});
  cases.push_back({"relu", [](Rng& r) { return unary(r, random_shape(r), 1.0, ops::relu); }});
  cases.push_back({"sigmoid", [](Rng& r) { return unary(r, random_shape(r), 3.0, ops::sigmoid); }});
  cases.push_back({"concat_last", [](Rng& r) {
                     const std::size_t rows = pick(r, 1, 3), parts = pick(r, 1, 3);
                     GradProblem p;
                     std::vector<Tensor> xs;
                     std::size_t cols = 0;
                     for (std::size_t i = 0; i < parts; ++i) {
                       const std::size_t c = pick(r, 1, 4);
                       cols += c;
                       xs.push_back(random_tensor(r, {rows, c}));
                       p.leaves.push_back({"x" + std::to_string(i), xs.back()});
                     }
                     p.loss = weighted([xs](Tape& t) { return ops::concat_last(t, xs); }, r, {rows, cols});
                     return p;
                   }});
  cases.push_back({"concat_channels", [](Rng& r) {
                     const std::size_t h = pick(r, 1, 4), w = pick(r, 1, 4), parts = pick(r, 1, 3);
                     GradProblem p;
                     std::vector<Tensor> xs;
                     std::size_t ch = 0;
                     for (std::size_t i = 0; i < parts; ++i) {
                       const std::size_t c = pick(r, 1, 3);
                       ch += c;
                       xs.push_back(random_tensor(r, {c, h, w}));
                       p.leaves.push_back({"x" + std::to_string(i), xs.back()});
                     }
                     p.loss = weighted([xs](Tape& t) { return ops::concat_channels(t, xs); }, r, {ch, h, w});
                     return p;
                   }});
  cases.push_back({"linear", [](Rng& r) {
                     const std::size_t b = pick(r, 1, 4), i = pick(r, 1, 5), o = pick(r, 1, 5);
                     Tensor x = random_tensor(r, {b, i}), w = random_tensor(r, {i, o}), bias = random_tensor(r, {o});
                     return GradProblem{{{"x", x}, {"w", w}, {"b", bias}},
                                        weighted([x, w, bias](Tape& t) { return ops::linear(t, x, w, bias); }, r, {b, o})};
                   }});
  cases.push_back({"conv2d", [](Rng& r) {
                     const std::size_t cin = pick(r, 1, 3), cout = pick(r, 1, 3);
                     const std::size_t k = 2 * pick(r, 0, 2) + 1, stride = pick(r, 1, 2), pad = pick(r, 0, k / 2 + 1);
                     const std::size_t h = pick(r, std::max<std::size_t>(1, k > 2 * pad ? k - 2 * pad : 1), 7);
                     const std::size_t w = pick(r, std::max<std::size_t>(1, k > 2 * pad ? k - 2 * pad : 1), 7);
                     const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
                     Tensor x = random_tensor(r, {cin, h, w}), kk = random_tensor(r, {cout, cin, k, k}),
                            b = random_tensor(r, {cout});
                     return GradProblem{{{"x", x}, {"k", kk}, {"b", b}},
                                        weighted([=](Tape& t) { return ops::conv2d(t, x, kk, b, stride, pad); }, r,
                                                 {cout, oh, ow})};
                   }});
  cases.push_back({"instance_norm", [](Rng& r) {
                     const std::size_t c = pick(r, 1, 3), h = pick(r, 1, 4), w = pick(r, 2, 4);
                     Tensor x = random_tensor(r, {c, h, w}), g = random_tensor(r, {c}), b = random_tensor(r, {c});
                     return GradProblem{{{"x", x}, {"gamma", g}, {"beta", b}},
                                        weighted([=](Tape& t) { return ops::instance_norm(t, x, g, b); }, r, {c, h, w})};
                   }});
  cases.push_back({"downsample2", [](Rng& r) {
                     const std::size_t c = pick(r, 1, 3), h = 2 * pick(r, 1, 3), w = 2 * pick(r, 1, 3);
                     return unary(r, {c, h, w}, 1.0, ops::downsample2, {c, h / 2, w / 2});
                   }});
  cases.push_back({"upsample2", [](Rng& r) {
                     const std::size_t c = pick(r, 1, 3), h = pick(r, 1, 3), w = pick(r, 1, 3);
                     return unary(r, {c, h, w}, 1.0, ops::upsample2, {c, 2 * h, 2 * w});
                   }});
  cases.push_back({"pad_reflect", [](Rng& r) {
                     const std::size_t c = pick(r, 1, 2), h = pick(r, 2, 5), w = pick(r, 2, 5);
                     const std::size_t t = pick(r, 0, h - 1), b = pick(r, 0, h - 1), l = pick(r, 0, w - 1), rr = pick(r, 0, w - 1);
                     return unary(r, {c, h, w}, 1.0,
                                  [=](Tape& tp, const Tensor& x) { return ops::pad_reflect(tp, x, t, b, l, rr); },
                                  {c, h + t + b, w + l + rr});
                   }});
  cases.push_back({"crop", [](Rng& r) {
                     const std::size_t c = pick(r, 1, 2), h = pick(r, 1, 5), w = pick(r, 1, 5);
                     const std::size_t ch = pick(r, 1, h), cw = pick(r, 1, w);
                     const std::size_t top = pick(r, 0, h - ch), left = pick(r, 0, w - cw);
                     return unary(r, {c, h, w}, 1.0,
                                  [=](Tape& tp, const Tensor& x) { return ops::crop(tp, x, top, left, ch, cw); },
                                  {c, ch, cw});
                   }});
  cases.push_back({"scatter_rows", [](Rng& r) {
                     const std::size_t h = pick(r, 1, 4), w = pick(r, 1, 4), c = pick(r, 1, 3);
                     std::vector<std::size_t> ids(h * w);
                     std::iota(ids.begin(), ids.end(), std::size_t{0});
                     std::shuffle(ids.begin(), ids.end(), r.engine());
                     ids.resize(pick(r, 1, h * w));
                     const std::size_t n = ids.size();
                     return unary(r, {n, c}, 1.0,
                                  [=](Tape& tp, const Tensor& x) { return ops::scatter_rows(tp, x, ids, h, w); },
                                  {c, h, w});
                   }});
  cases.push_back({"sum", [](Rng& r) {
                     Tensor x = random_tensor(r, random_shape(r));
                     return GradProblem{{{"x", x}}, [x](Tape& t) { return ops::sum(t, x); }};
                   }});
  cases.push_back({"mean", [](Rng& r) {
                     Tensor x = random_tensor(r, random_shape(r));
                     return GradProblem{{{"x", x}}, [x](Tape& t) { return ops::mean(t, x); }};
                   }});
  cases.push_back({"mse", [](Rng& r) {
                     const Shape s = random_shape(r);
                     Tensor a = random_tensor(r, s), b = random_tensor(r, s);
                     return GradProblem{{{"pred", a}, {"target", b}}, [a, b](Tape& t) { return ops::mse(t, a, b); }};
                   }});
  cases.push_back({"perceptual_loss", [](Rng& r) {
                     auto ex = std::make_shared<PerceptualExtractor>(PerceptualConfig{{8, 16, 32}, 3, r.engine()(), {}});
                     Tensor pred = random_tensor(r, {3, 8, 8}, 0.3), gt = random_tensor(r, {3, 8, 8}, 0.3);
                     gt.set_requires_grad(false);
                     return GradProblem{{{"pred", pred}},
                                        [=](Tape& t) { return perceptual_loss(t, pred, gt, *ex); }};
                   }});
  cases.push_back({"total_loss", [](Rng& r) {
                     auto ex = std::make_shared<PerceptualExtractor>();
                     Tensor pred = random_tensor(r, {3, 8, 8}, 0.3), gt = random_tensor(r, {3, 8, 8}, 0.3);
                     gt.set_requires_grad(false);
                     const LossConfig cfg{};
                     return GradProblem{{{"pred", pred}},
                                        [=](Tape& t) { return total_loss(t, pred, gt, cfg, *ex).total; }};
                   }});
  cases.push_back({"radiance_mlp", [](Rng& r) {
                     MlpConfig cfg;
                     cfg.seed = r.engine()();
                     auto mlp = std::make_shared<RadianceMLP>(cfg);
                     const std::size_t n = pick(r, 1, 4);
                     Tensor coords = random_tensor(r, {n, cfg.coord_width}), dirs = random_tensor(r, {n, cfg.dir_width});
                     GradProblem p;
                     p.leaves = mlp->named_params();
                     p.leaves.push_back({"coords", coords});
                     p.leaves.push_back({"dirs", dirs});
                     p.loss = weighted([=](Tape& t) { return mlp->forward(t, coords, dirs); }, r, {n, mlp->out_channels()});
                     return p;
                   }});
  cases.push_back({"refine_net", [](Rng& r) {
                     RefineConfig cfg;
                     cfg.width_multiplier = 0.25;
                     cfg.seed = r.engine()();
                     auto net = std::make_shared<RefineNet>(cfg);
                     Tensor fmap = random_tensor(r, {cfg.in_channels, 32, 64});
                     GradProblem p;
                     p.leaves = net->named_params();
                     p.leaves.push_back({"fmap", fmap});
                     p.loss = weighted([=](Tape& t) { return net->forward(t, fmap); }, r, {cfg.out_channels, 32, 64});
                     return p;
                   }});
  return cases;
}

}  // namespace

const std::vector<GradCase>& gradient_cases() {
  static const std::vector<GradCase> cases = build_cases();
  return cases;
}

std::vector<SuiteItem> run_gradient_suite(std::size_t configs, std::uint64_t seed, const GradCheckOptions& opts,
                                          const std::function<bool(const std::string&)>& filter,
                                          const std::function<void(const SuiteItem&)>& progress) {
  std::vector<SuiteItem> items;
  std::uint64_t stream = 0;
  for (const GradCase& c : gradient_cases()) {
    ++stream;
    if (filter && !filter(c.name)) continue;
    SuiteItem item;
    item.name = c.name;
    for (std::size_t k = 0; k < configs; ++k) {
      Rng rng(mix_seed(seed, stream), k);
      const GradProblem problem = c.make(rng);
      const GradCheckResult res = check_gradients(problem, opts, rng);
      ++item.configs;
      item.checked += res.checked;
      item.skipped_kinks += res.skipped_kinks;
      if (res.failures > 0) ++item.failed_configs;
      if (!res.worst.empty() && (item.worst.empty() || res.max_error > item.max_error)) {
        item.max_error = res.max_error;
        item.worst = res.worst;
      }
    }
    if (progress) progress(item);
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace radmap
