// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "radmap/errors.h"
#include "radmap/models.h"

namespace radmap {

void VolumeSamples::validate() const {
  if (ts.size() != sigmas.size() || ts.size() != colors.size()) {
    throw ValidationError("volume samples need equal counts of depths, densities and colours");
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(sigmas[i] >= 0.0)) throw ValidationError("densities must be non-negative");
    if (i > 0 && !(ts[i] > ts[i - 1])) throw ValidationError("sample depths must increase strictly");
  }
  if (!ts.empty() && (ts.front() < t_near || ts.back() > t_far)) {
    throw ValidationError("sample depths must lie in [t_near, t_far]");
  }
}

Eigen::Vector3d volume_render_oracle(const VolumeSamples& s) {
  s.validate();
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double transmittance = 1.0;
  for (std::size_t i = 0; i < s.ts.size(); ++i) {
    const double delta = (i + 1 < s.ts.size() ? s.ts[i + 1] : s.t_far) - s.ts[i];
    const double alpha = 1.0 - std::exp(-s.sigmas[i] * delta);
    color += transmittance * alpha * s.colors[i];
    transmittance *= 1.0 - alpha;
  }
  return color;
}

}  // namespace radmap
