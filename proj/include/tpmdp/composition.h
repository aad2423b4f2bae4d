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

#ifndef TPMDP_COMPOSITION_H_
#define TPMDP_COMPOSITION_H_

#include <vector>

#include "tpmdp/budget.h"

namespace tpmdp {

enum class CompositionMode { kBasic, kAdvanced };

// Budgets of m sequentially composed mechanisms over the same n parties
// (and the same threshold, which composition leaves untouched).
// per_mechanism_budgets[j][i] is party i's budget under mechanism j.
struct CompositionRequest {
  std::vector<std::vector<PrivacyBudget>> per_mechanism_budgets;
  CompositionMode mode = CompositionMode::kBasic;
  // Advanced mode only: the per-party slack delta' > 0 added on top of the
  // summed deltas. Either one entry shared by all parties or one per party.
  std::vector<double> delta_prime;

  void Validate() const;
};

// Coordinate-wise budget sums across mechanisms.
std::vector<PrivacyBudget> ComposeBasic(const CompositionRequest& request);

// Advanced composition of m mechanisms that all grant the same (epsilon,
// delta) to a party:
//   epsilon' = sqrt(2 m ln(1 / delta')) * epsilon + m * epsilon * (e^epsilon - 1)
//   delta'   -> m * delta + delta'
// Requires delta_prime > 0 and m >= 1.
PrivacyBudget ComposeAdvanced(double epsilon, double delta, int m,
                              double delta_prime);

// Dispatches on request.mode. Advanced mode requires each party's budget to
// be identical across all m mechanisms; heterogeneous inputs are rejected
// rather than silently coarsened.
std::vector<PrivacyBudget> Compose(const CompositionRequest& request);

}  // namespace tpmdp

#endif  // TPMDP_COMPOSITION_H_
