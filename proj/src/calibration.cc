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

#include "tpmdp/calibration.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tpmdp {

double StandardNormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Delta achieved at unit sensitivity; the profile only depends on
// sigma / sensitivity, so everything is calibrated at sensitivity 1 and
// scaled afterwards. That keeps sensitivity-linearity of the result exact.
double UnitGaussianDelta(double sigma, double epsilon) {
  const double a = 1.0 / (2.0 * sigma);
  const double b = epsilon * sigma;
  const double upper = StandardNormalCdf(a - b);
  const double lower = StandardNormalCdf(-a - b);
  if (lower == 0.0) {
    // exp(epsilon) * 0 would turn into NaN when exp overflows.
    return upper;
  }
  return upper - std::exp(epsilon) * lower;
}

}  // namespace

double GaussianDelta(double sigma, const CalibrationTriple& triple) {
  triple.Validate();
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  return UnitGaussianDelta(sigma / triple.sensitivity, triple.budget.epsilon);
}

CalibratedSigma CalibrateSigma(const CalibrationTriple& triple,
                               double rel_tol) {
  triple.Validate();
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw std::invalid_argument("rel_tol must be in (0, 1)");
  }
  const double epsilon = triple.budget.epsilon;
  const double delta = triple.budget.delta;
  if (delta <= 0.0) {
    throw std::invalid_argument(
        "delta must be positive: the Gaussian mechanism cannot achieve "
        "pure epsilon-DP");
  }
  if (delta >= 1.0) {
    // Every sigma satisfies the budget; report the sigma -> 0 limit.
    return CalibratedSigma{0.0, 1.0};
  }

  constexpr int kMaxSteps = 2000;

  // Bracket [lo, hi] with delta(lo) > delta >= delta(hi), expanding or
  // shrinking geometrically from sigma = sensitivity (i.e. 1 at unit scale).
  double lo = 1.0;
  double hi = 1.0;
  if (UnitGaussianDelta(1.0, epsilon) > delta) {
    int steps = 0;
    do {
      lo = hi;
      hi *= 2.0;
      if (++steps > kMaxSteps || !std::isfinite(hi)) {
        throw std::runtime_error("sigma calibration failed to bracket");
      }
    } while (UnitGaussianDelta(hi, epsilon) > delta);
  } else {
    int steps = 0;
    do {
      hi = lo;
      lo /= 2.0;
      if (++steps > kMaxSteps || lo <= 0.0) {
        throw std::runtime_error("sigma calibration failed to bracket");
      }
    } while (UnitGaussianDelta(lo, epsilon) <= delta);
  }

  int steps = 0;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // double precision exhausted
    if (UnitGaussianDelta(mid, epsilon) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (++steps > kMaxSteps) {
      throw std::runtime_error("sigma calibration did not converge");
    }
  }

  // The profile is evaluated by callers at sigma / sensitivity, and that
  // round trip can land one ulp above the bracket; nudge up until the
  // round-tripped profile honors the budget.
  double sigma = triple.sensitivity * hi;
  for (int nudges = 0;
       UnitGaussianDelta(sigma / triple.sensitivity, epsilon) > delta;
       ++nudges) {
    if (nudges > 8) {
      throw std::runtime_error("sigma calibration failed to stabilize");
    }
    sigma = std::nextafter(sigma, std::numeric_limits<double>::infinity());
  }

  CalibratedSigma result;
  result.sigma = sigma;
  result.achieved_delta =
      UnitGaussianDelta(sigma / triple.sensitivity, epsilon);
  return result;
}

double PartialL2Sensitivity(const QuerySpec& query) {
  switch (query.kind) {
    case QueryKind::kCount:
      return 1.0;
    case QueryKind::kFunctionalLinReg: {
      const double d = query.features;
      if (query.features <= 0) {
        throw std::invalid_argument("feature count must be positive");
      }
      return std::sqrt(2.0 * d * d + 15.0 * d);
    }
  }
  throw std::invalid_argument("unsupported query kind");
}

}  // namespace tpmdp
