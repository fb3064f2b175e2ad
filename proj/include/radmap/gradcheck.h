// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "radmap/checkpoint.h"
#include "radmap/random.h"
#include "radmap/tensor.h"

namespace radmap {

struct GradCheckOptions {
  double h = 1e-5;
  double rel_tol = 1e-4;
  double abs_tol = 1e-7;  // used where both gradients are below `small`
  double small = 1e-4;
  std::size_t entries_per_tensor = 4;  // random subset; all entries when fewer
};

/// Leaves with requires_grad set and a function building a single-element
/// loss from them.
struct GradProblem {
  std::vector<NamedTensor> leaves;
  std::function<Tensor(Tape&)> loss;
};

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  std::size_t failures = 0;
  double max_error = 0.0;  // worst error over its tolerance; < 1 passes
  std::string worst;       // "<leaf>[<entry>]: analytic a, numeric n"
};

/// Signs of every relu input recorded on the tape. Two evaluations with
/// different signatures straddle a kink.
std::vector<std::uint8_t> kink_signature(const Tape& tape);

/// Central differences against the recorded backward pass. Entries whose
/// +h and -h evaluations cross a relu kink are skipped and counted.
GradCheckResult check_gradients(const GradProblem& problem, const GradCheckOptions& opts, Rng& rng);

struct GradCase {
  std::string name;
  std::function<GradProblem(Rng&)> make;
};

/// One random-configuration generator per differentiable primitive, plus
/// the losses and both models.
const std::vector<GradCase>& gradient_cases();

struct SuiteItem {
  std::string name;
  std::size_t configs = 0;
  std::size_t failed_configs = 0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  double max_error = 0.0;  // as in GradCheckResult
  std::string worst;
  bool passed() const { return failed_configs == 0 && checked > 0; }
};

std::vector<SuiteItem> run_gradient_suite(std::size_t configs, std::uint64_t seed,
                                          const GradCheckOptions& opts = {},
                                          const std::function<bool(const std::string&)>& filter = {},
                                          const std::function<void(const SuiteItem&)>& progress = {});

}  // namespace radmap
