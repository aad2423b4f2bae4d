//
// Copyright 2026 The TPMDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "tpmdp/population.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tpmdp/rng.h"

namespace tpmdp {

void PopulationParams::Validate() const {
  if (n <= 0) throw std::invalid_argument("population size must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("rho must be in [0, 1]");
  }
  if (!(f_conservative >= 0.0 && f_moderate >= 0.0 &&
        f_conservative + f_moderate <= 1.0 + 1e-12)) {
    throw std::invalid_argument("group fractions must be in [0, 1] and sum <= 1");
  }
  if (!(eps_conservative >= 0.0 && eps_conservative <= eps_moderate &&
        eps_moderate <= eps_liberal)) {
    throw std::invalid_argument(
        "need 0 <= eps_conservative <= eps_moderate <= eps_liberal");
  }
  if (fixed_delta > 1.0) throw std::invalid_argument("delta must be <= 1");
  if (features < 0) throw std::invalid_argument("features must be >= 0");
}

double Population::TrueCount() const {
  double count = 0.0;
  for (uint8_t b : bits) count += b;
  return count;
}

Population GeneratePopulation(const PopulationParams& params, uint64_t seed) {
  params.Validate();
  const int n = params.n;
  SplitMix64 rng(DeriveSeed(seed, /*a=*/0));
  Population pop;

  // Exact group counts up to rounding, then a seeded shuffle assigns them.
  const int n_conservative =
      std::min<int>(n, std::lround(params.f_conservative * n));
  const int n_moderate = std::min<int>(n - n_conservative,
                                       std::lround(params.f_moderate * n));
  pop.groups.assign(n, GroupLabel::kLiberal);
  std::fill_n(pop.groups.begin(), n_conservative, GroupLabel::kConservative);
  std::fill_n(pop.groups.begin() + n_conservative, n_moderate,
              GroupLabel::kModerate);
  for (int i = n - 1; i > 0; --i) {  // Fisher-Yates on the seeded stream
    const int j = static_cast<int>(rng.Next() % static_cast<uint64_t>(i + 1));
    std::swap(pop.groups[i], pop.groups[j]);
  }

  const double delta =
      params.fixed_delta > 0.0 ? params.fixed_delta : 1.0 / (10.0 * n);
  pop.budgets.resize(n);
  for (int i = 0; i < n; ++i) {
    double eps = params.eps_liberal;
    switch (pop.groups[i]) {
      case GroupLabel::kConservative:
        eps = rng.NextUniform(params.eps_conservative, params.eps_moderate);
        break;
      case GroupLabel::kModerate:
        eps = rng.NextUniform(params.eps_moderate, params.eps_liberal);
        break;
      case GroupLabel::kLiberal:
        break;
    }
    pop.budgets[i] = PrivacyBudget{eps, delta};
  }

  pop.bits.resize(n);
  for (int i = 0; i < n; ++i) {
    pop.bits[i] = rng.NextBernoulli(params.rho) ? 1 : 0;
  }

  if (params.features > 0) {
    const int d = params.features;
    pop.feature_count = d;
    pop.features.resize(static_cast<size_t>(n) * d);
    pop.labels.resize(n);
    pop.true_weights.resize(d);
    // Weights scaled so noiseless labels stay inside [-1, 1].
    for (int k = 0; k < d; ++k) {
      pop.true_weights[k] = rng.NextUniform(-1.0, 1.0) / d;
    }
    double max_abs_label = 0.0;
    for (int i = 0; i < n; ++i) {
      double y = 0.0;
      for (int k = 0; k < d; ++k) {
        const double x = rng.NextUniform(-1.0, 1.0);
        pop.features[static_cast<size_t>(i) * d + k] = x;
        y += x * pop.true_weights[k];
      }
      y += rng.NextGaussian(0.05);
      pop.labels[i] = y;
      max_abs_label = std::max(max_abs_label, std::abs(y));
    }
    if (max_abs_label > 1.0) {  // normalize labels to [-1, 1]
      for (double& y : pop.labels) y /= max_abs_label;
      for (double& w : pop.true_weights) w /= max_abs_label;
    }
  }
  return pop;
}

}  // namespace tpmdp
