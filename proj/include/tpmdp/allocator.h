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

#ifndef TPMDP_ALLOCATOR_H_
#define TPMDP_ALLOCATOR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace tpmdp {

// One noise-allocation problem: n parties, collusion threshold t, the set of
// parties that receive the query output, and each party's required minimal
// noise standard deviation (from calibration). Immutable value object.
struct ThresholdInstance {
  int n = 0;
  int t = 0;
  std::vector<uint8_t> active;          // size n; 1 = receives the output
  std::vector<double> required_sigma;   // size n; nonnegative

  int ActiveCount() const;
  void Validate() const;  // throws std::invalid_argument on bad invariants
};

// Convenience constructor from 0-based active indices; validates.
ThresholdInstance MakeInstance(int n, int t,
                               const std::vector<int>& active_indices,
                               std::vector<double> required_sigma);

// Per-party noise variances and their sum (the objective value).
struct Allocation {
  std::vector<double> variances;
  double total = 0.0;
};

// Mutually exclusive structural classes of an instance. kTrivial covers
// t = 0 and an empty active set, where no coalition can see the output and
// no noise is required.
enum class Subcase {
  kTrivial,
  kLargeActiveSet,     // |active| >= n - t + 1
  kSingleActive,       // |active| == 1
  kCoveringActiveSet,  // 2 <= |active| <= n - t and t * |active| >= n
  kSparseActiveSet,    // 2 <= |active| <= n - t and t * |active| < n
};

std::string SubcaseName(Subcase subcase);

Subcase ClassifySubcase(int n, int t, int active_size);

// Classification plus the two competing noise levels of the sparse-active
// case: alpha = max(top inactive requirement, second-top active requirement),
// beta = max(top active requirement, second-top inactive requirement).
// surplus_branch marks the t >= 2, alpha > beta branch where one inactive
// party absorbs the surplus. alpha/beta are 0 outside kSparseActiveSet.
struct SubcaseInfo {
  Subcase tag = Subcase::kTrivial;
  double alpha = 0.0;
  double beta = 0.0;
  bool surplus_branch = false;
};

SubcaseInfo AnalyzeSubcase(const ThresholdInstance& inst);

// Cut index separating uniform-share parties from surplus-noise parties in
// the all-active solution: min(floor((2n - t) / (n - t)), t + 1).
// Requires 1 <= t <= n - 1.
int UniformCutIndex(int n, int t);

// Optimal allocation when every party is active. Requires inst.active all
// set and 1 <= t <= n - 1. O(n): one linear-time selection plus one pass.
Allocation AllocateAllActive(const ThresholdInstance& inst);

// Optimal allocation for any instance, dispatching on the subcase. O(n).
Allocation Allocate(const ThresholdInstance& inst);

// Closed-form optimal total variance; equals Allocate(inst).total up to
// floating-point summation order.
double OptimalTotalVariance(const ThresholdInstance& inst);

// Verdict of checking an allocation against every privacy constraint:
// for each party j with a nonempty constraint family, the minimum over
// admissible coalitions A (|A| = t, j outside A, A meets the active set) of
// the variance mass outside A must reach required_sigma[j]^2.
struct FeasibilityReport {
  bool feasible = true;
  int worst_party = -1;       // party with the smallest slack, -1 if vacuous
  double worst_covered = 0.0; // minimal variance mass protecting that party
  double worst_required = 0.0;
  double worst_slack = 0.0;   // covered - required (negative = violated)
};

// Checks feasibility without enumerating coalitions: the binding coalition
// for party j removes the t largest variances among the other parties, with
// a forced swap to the largest-variance active party when that greedy set
// contains none. Tolerance is relative: slack >= -slack_tol * max(1, rhs).
FeasibilityReport CheckFeasibility(const ThresholdInstance& inst,
                                   const Allocation& allocation,
                                   double slack_tol = 1e-9);

// Baseline that forgets personalization: every requirement is replaced by
// the most stringent one, then allocated optimally.
Allocation TmdpBaseline(const ThresholdInstance& inst);

// Baseline that forgets the collusion threshold: allocates with t = n - 1.
Allocation NonThresholdBaseline(const ThresholdInstance& inst);

// Centralized baseline: a trusted aggregator adds one Gaussian noise that
// must satisfy every party with a nonempty constraint family. Returns the
// single noise variance.
double CentralizedMinVariance(const ThresholdInstance& inst);

}  // namespace tpmdp

#endif  // TPMDP_ALLOCATOR_H_
