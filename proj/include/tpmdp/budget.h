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

#ifndef TPMDP_BUDGET_H_
#define TPMDP_BUDGET_H_

#include <stdexcept>

namespace tpmdp {

// A per-party (epsilon, delta) differential-privacy budget.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  void Validate() const {
    if (!(epsilon >= 0.0)) {
      throw std::invalid_argument("epsilon must be nonnegative");
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
      throw std::invalid_argument("delta must be in [0, 1]");
    }
  }
};

// Budget plus the l2 sensitivity of the query output it protects; the
// input to minimal-sigma calibration.
struct CalibrationTriple {
  PrivacyBudget budget;
  double sensitivity = 1.0;

  void Validate() const {
    budget.Validate();
    if (!(sensitivity > 0.0)) {
      throw std::invalid_argument("sensitivity must be positive");
    }
  }
};

// Result of calibrating Gaussian noise against a CalibrationTriple:
// the minimal standard deviation and the delta it actually achieves.
struct CalibratedSigma {
  double sigma = 0.0;
  double achieved_delta = 0.0;
};

enum class QueryKind {
  kCount,              // one binary record per party, F = sum
  kFunctionalLinReg,   // linear regression via perturbed normal equations
};

// Query descriptor; `features` is only meaningful for kFunctionalLinReg.
struct QuerySpec {
  QueryKind kind = QueryKind::kCount;
  int features = 0;
};

}  // namespace tpmdp

#endif  // TPMDP_BUDGET_H_
