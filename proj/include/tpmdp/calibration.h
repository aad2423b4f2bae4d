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

#ifndef TPMDP_CALIBRATION_H_
#define TPMDP_CALIBRATION_H_

#include "tpmdp/budget.h"

namespace tpmdp {

// Relative tolerance on sigma for the calibration search. Downstream
// allocation totals are compared at 1e-6 relative, so calibration error has
// to sit far below that.
inline constexpr double kDefaultSigmaRelTol = 1e-12;

// CDF of N(0, 1), evaluated through erfc so the tails keep full relative
// accuracy (1 - Phi(x) cancels catastrophically for x > 8).
double StandardNormalCdf(double x);

// The delta actually achieved by Gaussian noise of the given standard
// deviation against the triple's epsilon and sensitivity:
//   Phi(D/(2s) - es/D) - exp(e) * Phi(-D/(2s) - es/D).
// Strictly decreasing in sigma. Requires sigma > 0.
double GaussianDelta(double sigma, const CalibrationTriple& triple);

// Minimal sigma such that GaussianDelta(sigma) <= triple.budget.delta, found
// by geometric bracketing plus bisection to `rel_tol` relative accuracy on
// sigma. The returned sigma satisfies the budget while sigma * (1 - rel_tol)
// does not. delta = 1 yields sigma = 0; delta = 0 is rejected (no finite
// Gaussian achieves pure epsilon-DP).
CalibratedSigma CalibrateSigma(const CalibrationTriple& triple,
                               double rel_tol = kDefaultSigmaRelTol);

// Worst-case l2 change of the query output when a single party's record
// changes. Count: 1. Functional linear regression with d features:
// sqrt(2 d^2 + 15 d), the coefficient sensitivity of the perturbed
// least-squares objective on data normalized to [-1, 1].
double PartialL2Sensitivity(const QuerySpec& query);

}  // namespace tpmdp

#endif  // TPMDP_CALIBRATION_H_
