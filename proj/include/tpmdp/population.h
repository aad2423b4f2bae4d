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

#ifndef TPMDP_POPULATION_H_
#define TPMDP_POPULATION_H_

#include <cstdint>
#include <vector>

#include "tpmdp/budget.h"

namespace tpmdp {

enum class GroupLabel : uint8_t { kConservative, kModerate, kLiberal };

// Knobs for synthetic population generation. Parties split into privacy
// groups with exact counts (up to rounding); epsilons are drawn uniformly
// from [eps_conservative, eps_moderate] and [eps_moderate, eps_liberal] for
// the first two groups and pinned to eps_liberal for the third. Every party
// gets delta = 1 / (10 n) unless fixed_delta overrides it.
struct PopulationParams {
  int n = 1000;
  double rho = 0.15;  // Bernoulli rate of the per-party count bit
  double f_conservative = 0.54;
  double f_moderate = 0.37;
  double eps_conservative = 0.01;
  double eps_moderate = 0.2;
  double eps_liberal = 1.0;
  double fixed_delta = 0.0;  // <= 0 means use 1 / (10 n)
  int features = 0;          // > 0 also generates regression data

  void Validate() const;
};

// One synthetic multi-party dataset: group labels, per-party budgets, one
// binary count record per party, and (when features > 0) one regression
// record per party with attributes and label normalized to [-1, 1].
struct Population {
  std::vector<GroupLabel> groups;
  std::vector<PrivacyBudget> budgets;
  std::vector<uint8_t> bits;
  std::vector<double> features;  // row-major n x d
  std::vector<double> labels;
  int feature_count = 0;
  std::vector<double> true_weights;  // the d-vector the labels came from

  int Size() const { return static_cast<int>(budgets.size()); }
  double TrueCount() const;
};

// Deterministic for a given (params, seed).
Population GeneratePopulation(const PopulationParams& params, uint64_t seed);

}  // namespace tpmdp

#endif  // TPMDP_POPULATION_H_
