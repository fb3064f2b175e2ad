// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "radmap/errors.h"

namespace radmap {

std::vector<std::uint8_t> kink_signature(const Tape& tape) {
  std::vector<std::uint8_t> sig;
  for (const auto& node : tape.nodes()) {
    if (node.op != "relu") continue;
    for (double v : node.inputs[0].data()) sig.push_back(v > 0.0 ? 1 : (v < 0.0 ? 2 : 0));
  }
  return sig;
}

namespace {

struct Eval {
  double value;
  std::vector<std::uint8_t> signature;
};

Eval evaluate(const GradProblem& p) {
  Tape tape;
  const Tensor loss = p.loss(tape);
  return {loss.item(), kink_signature(tape)};
}

}  // namespace

GradCheckResult check_gradients(const GradProblem& problem, const GradCheckOptions& opts, Rng& rng) {
  for (const auto& leaf : problem.leaves) {
    leaf.tensor.set_requires_grad(true);
    leaf.tensor.zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    const Tensor loss = problem.loss(tape);
    backward(tape, loss);
    for (const auto& leaf : problem.leaves) {
      const auto g = leaf.tensor.grad();
      analytic.emplace_back(leaf.tensor.numel(), 0.0);
      std::copy(g.begin(), g.end(), analytic.back().begin());
    }
  }

  GradCheckResult res;
  for (std::size_t li = 0; li < problem.leaves.size(); ++li) {
    Tensor t = problem.leaves[li].tensor;
    const std::size_t n = t.numel();
    std::vector<std::size_t> entries(n);
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (n > opts.entries_per_tensor) {
      std::shuffle(entries.begin(), entries.end(), rng.engine());
      entries.resize(opts.entries_per_tensor);
      std::sort(entries.begin(), entries.end());
    }
    for (std::size_t e : entries) {
      const double saved = t.data()[e];
      t.data()[e] = saved + opts.h;
      const Eval plus = evaluate(problem);
      t.data()[e] = saved - opts.h;
      const Eval minus = evaluate(problem);
      t.data()[e] = saved;
      if (plus.signature != minus.signature) {
        ++res.skipped_kinks;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * opts.h);
      const double a = analytic[li][e];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double err = std::abs(a - numeric) / (scale < opts.small ? 1.0 : scale);
      const bool ok = scale < opts.small ? err < opts.abs_tol : err < opts.rel_tol;
      ++res.checked;
      if (!ok) ++res.failures;
      const double ratio = err / (scale < opts.small ? opts.abs_tol : opts.rel_tol);
      if (res.worst.empty() || ratio > res.max_error) {
        res.max_error = ratio;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s[%zu]: analytic %.10g, numeric %.10g",
                      problem.leaves[li].name.c_str(), e, a, numeric);
        res.worst = buf;
      }
    }
  }
  return res;
}

}  // namespace radmap
