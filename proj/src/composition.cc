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

#include "tpmdp/composition.h"

#include <cmath>
#include <stdexcept>

namespace tpmdp {

void CompositionRequest::Validate() const {
  if (per_mechanism_budgets.empty()) {
    throw std::invalid_argument("need at least one mechanism");
  }
  const size_t n = per_mechanism_budgets.front().size();
  if (n == 0) throw std::invalid_argument("need at least one party");
  for (const auto& row : per_mechanism_budgets) {
    if (row.size() != n) {
      throw std::invalid_argument("ragged budget table");
    }
    for (const PrivacyBudget& budget : row) budget.Validate();
  }
  if (mode == CompositionMode::kAdvanced) {
    if (delta_prime.size() != 1 && delta_prime.size() != n) {
      throw std::invalid_argument(
          "advanced composition needs one delta' or one per party");
    }
    for (double dp : delta_prime) {
      if (!(dp > 0.0)) throw std::invalid_argument("delta' must be positive");
    }
  }
}

std::vector<PrivacyBudget> ComposeBasic(const CompositionRequest& request) {
  request.Validate();
  const size_t n = request.per_mechanism_budgets.front().size();
  std::vector<PrivacyBudget> combined(n);
  for (const auto& row : request.per_mechanism_budgets) {
    for (size_t i = 0; i < n; ++i) {
      combined[i].epsilon += row[i].epsilon;
      combined[i].delta += row[i].delta;
    }
  }
  return combined;
}

PrivacyBudget ComposeAdvanced(double epsilon, double delta, int m,
                              double delta_prime) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (!(delta_prime > 0.0)) {
    throw std::invalid_argument("delta' must be positive");
  }
  PrivacyBudget single{epsilon, delta};
  single.Validate();
  PrivacyBudget combined;
  combined.epsilon = std::sqrt(2.0 * m * std::log(1.0 / delta_prime)) * epsilon +
                     m * epsilon * std::expm1(epsilon);
  combined.delta = m * delta + delta_prime;
  return combined;
}

std::vector<PrivacyBudget> Compose(const CompositionRequest& request) {
  request.Validate();
  if (request.mode == CompositionMode::kBasic) return ComposeBasic(request);

  const auto& table = request.per_mechanism_budgets;
  const int m = static_cast<int>(table.size());
  const size_t n = table.front().size();
  for (const auto& row : table) {
    for (size_t i = 0; i < n; ++i) {
      if (row[i].epsilon != table.front()[i].epsilon ||
          row[i].delta != table.front()[i].delta) {
        throw std::invalid_argument(
            "advanced composition requires each party's budget to be "
            "identical across mechanisms");
      }
    }
  }
  std::vector<PrivacyBudget> combined(n);
  for (size_t i = 0; i < n; ++i) {
    const double dp = request.delta_prime.size() == 1
                          ? request.delta_prime.front()
                          : request.delta_prime[i];
    combined[i] = ComposeAdvanced(table.front()[i].epsilon,
                                  table.front()[i].delta, m, dp);
  }
  return combined;
}

}  // namespace tpmdp
