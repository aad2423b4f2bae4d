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

#ifndef TPMDP_LP_ORACLE_H_
#define TPMDP_LP_ORACLE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tpmdp/allocator.h"

namespace tpmdp {

// One privacy constraint of the variance-minimization program: the variance
// mass over the parties in `included_mask` (bit i = party i, always
// containing the protected party) must reach rhs = required_sigma_j^2.
struct ConstraintRow {
  uint32_t included_mask = 0;
  double rhs = 0.0;
};

// Materializes the full constraint family by brute force, one row per
// (protected party j, coalition A) pair with |A| = t, j outside A and A
// meeting the active set. Duplicate masks are kept. Deliberately shares no
// structure with the allocator so it stays an independent check.
// Requires n <= 22; the row count is n * C(n-1, t) in the worst case.
std::vector<ConstraintRow> EnumerateConstraints(const ThresholdInstance& inst);

// Exact LP minimum of the total variance subject to `rows` and nonnegative
// variances, via a dense two-phase tableau simplex. The optimum is certified
// against an independently solved dual (strong duality plus complementary
// slackness, residuals < 1e-8 after scaling); certification failure throws,
// since the program is always feasible and bounded. Requires n <= 12.
Allocation SolveExact(std::span<const ConstraintRow> rows, int n,
                      bool dedup = false);

// Closed-form row count of EnumerateConstraints without materializing it:
//   n * C(n-1, t) - k * C(n-k, t) - (n-k) * C(n-1-k, t)
// for k = active_size. Exact while it fits a double (< 2^53), +infinity
// beyond that.
double ConstraintCensus(int n, int t, int active_size);

// log2 of the census, usable far past double overflow.
double ConstraintCensusLog2(int n, int t, int active_size);

}  // namespace tpmdp

#endif  // TPMDP_LP_ORACLE_H_
