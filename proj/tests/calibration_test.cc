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

#include "gtest/gtest.h"
#include "tpmdp/rng.h"

namespace tpmdp {
namespace {

// Independent slow oracle: Phi(x) = 1/2 + erf(x / sqrt 2) / 2 via the Taylor
// series of erf, summed far past double precision for small |x|.
double SeriesNormalCdf(double x) {
  const double z = x / std::sqrt(2.0);
  double term = z;
  double sum = z;
  for (int k = 1; k < 60; ++k) {
    term *= -z * z / k;
    sum += term / (2 * k + 1);
  }
  return 0.5 + sum / std::sqrt(M_PI);
}

TEST(StandardNormalCdf, AnchorsAndLimits) {
  EXPECT_DOUBLE_EQ(StandardNormalCdf(0.0), 0.5);
  EXPECT_DOUBLE_EQ(StandardNormalCdf(40.0), 1.0);
  EXPECT_DOUBLE_EQ(StandardNormalCdf(1e300), 1.0);
  EXPECT_NEAR(StandardNormalCdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(StandardNormalCdf(1.0), SeriesNormalCdf(1.0), 1e-14);
  EXPECT_NEAR(StandardNormalCdf(-1.3), SeriesNormalCdf(-1.3), 1e-14);
}

TEST(StandardNormalCdf, SymmetryAndMonotonicity) {
  double previous = -1.0;
  for (double x = -12.0; x <= 12.0; x += 0.0625) {
    const double value = StandardNormalCdf(x);
    EXPECT_NEAR(value + StandardNormalCdf(-x), 1.0, 1e-14) << x;
    EXPECT_GE(value, previous) << x;
    previous = value;
  }
}

CalibrationTriple Triple(double eps, double delta, double sensitivity) {
  return CalibrationTriple{PrivacyBudget{eps, delta}, sensitivity};
}

TEST(GaussianDelta, MatchesFrozenProfileValues) {
  // eps = 0 makes the profile the plain two-sided tail mass.
  EXPECT_NEAR(GaussianDelta(1.0, Triple(0.0, 0.5, 1.0)),
              0.3829249225480262, 1e-15);
  // Far above the minimal sigma the achieved delta collapses.
  EXPECT_NEAR(GaussianDelta(1e9, Triple(1.0, 1e-5, 1.0)), 0.0, 1e-12);
  EXPECT_LT(GaussianDelta(4.845, Triple(1.0, 1e-5, 1.0)), 1e-5);
  EXPECT_NEAR(GaussianDelta(4.845, Triple(1.0, 1e-5, 1.0)),
              4.109351761624036e-08, 1e-17);
}

TEST(GaussianDelta, RejectsNonpositiveSigma) {
  EXPECT_THROW(GaussianDelta(0.0, Triple(1.0, 1e-5, 1.0)),
               std::invalid_argument);
  EXPECT_THROW(GaussianDelta(-1.0, Triple(1.0, 1e-5, 1.0)),
               std::invalid_argument);
}

TEST(GaussianDelta, DecreasesInSigma) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto triple =
        Triple(rng.NextUniform(0.0, 3.0), 0.5, rng.NextUniform(0.1, 4.0));
    const double s1 = rng.NextUniform(0.05, 5.0);
    const double s2 = s1 * rng.NextUniform(1.01, 3.0);
    EXPECT_GE(GaussianDelta(s1, triple), GaussianDelta(s2, triple));
  }
}

TEST(CalibrateSigma, FrozenAnchor) {
  const CalibratedSigma result = CalibrateSigma(Triple(1.0, 1e-5, 1.0));
  EXPECT_NEAR(result.sigma, 3.7306316348159418, 3.8e-11);
  EXPECT_GT(result.sigma, 0.0);
  EXPECT_LT(result.sigma, 4.845);
  EXPECT_LE(result.achieved_delta, 1e-5);
}

TEST(CalibrateSigma, DeltaOneNeedsNoNoise) {
  EXPECT_DOUBLE_EQ(CalibrateSigma(Triple(0.7, 1.0, 3.0)).sigma, 0.0);
}

TEST(CalibrateSigma, RejectsDeltaZero) {
  EXPECT_THROW(CalibrateSigma(Triple(1.0, 0.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(CalibrateSigma(Triple(0.0, 0.0, 1.0)), std::invalid_argument);
}

TEST(CalibrateSigma, SensitivityScalingIsExact) {
  const double unit = CalibrateSigma(Triple(1.0, 1e-5, 1.0)).sigma;
  EXPECT_EQ(CalibrateSigma(Triple(1.0, 1e-5, 2.0)).sigma, 2.0 * unit);
  EXPECT_EQ(CalibrateSigma(Triple(1.0, 1e-5, 8.0)).sigma, 8.0 * unit);
}

TEST(CalibrateSigma, InvertsTheProfile) {
  // The profile of the calibrated sigma must land in [delta(1-1e-6), delta],
  // and shrinking sigma must break the budget.
  SplitMix64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const double eps = rng.NextUniform(0.0, 2.0);
    const double delta = std::pow(10.0, rng.NextUniform(-8.0, -1.0));
    const auto triple = Triple(eps, delta, rng.NextUniform(0.1, 5.0));
    const double sigma = CalibrateSigma(triple).sigma;
    const double achieved = GaussianDelta(sigma, triple);
    EXPECT_LE(achieved, delta);
    EXPECT_GE(achieved, delta * (1.0 - 1e-6));
    EXPECT_GT(GaussianDelta(sigma * (1.0 - 1e-9), triple), delta);
  }
}

TEST(CalibrateSigma, MonotoneInBudget) {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const double eps = rng.NextUniform(0.01, 2.0);
    const double delta = std::pow(10.0, rng.NextUniform(-7.0, -2.0));
    const double sens = rng.NextUniform(0.1, 4.0);
    const double base = CalibrateSigma(Triple(eps, delta, sens)).sigma;
    EXPECT_LT(CalibrateSigma(Triple(eps + 0.5, delta, sens)).sigma, base);
    EXPECT_LT(CalibrateSigma(Triple(eps, delta * 10.0, sens)).sigma, base);
    EXPECT_GT(CalibrateSigma(Triple(eps, delta, sens * 2.0)).sigma, base);
  }
}

TEST(CalibrateSigma, ClassicalBoundIsAnEnvelope) {
  SplitMix64 rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const double eps = rng.NextUniform(0.01, 1.0);
    const double delta = std::pow(10.0, rng.NextUniform(-8.0, -2.0));
    const double sens = rng.NextUniform(0.1, 4.0);
    const double classical =
        sens * std::sqrt(2.0 * std::log(1.25 / delta)) / eps;
    EXPECT_LE(CalibrateSigma(Triple(eps, delta, sens)).sigma, classical);
  }
}

TEST(PartialL2Sensitivity, BuiltInQueries) {
  EXPECT_DOUBLE_EQ(PartialL2Sensitivity(QuerySpec{QueryKind::kCount, 0}), 1.0);
  EXPECT_DOUBLE_EQ(
      PartialL2Sensitivity(QuerySpec{QueryKind::kFunctionalLinReg, 4}),
      std::sqrt(92.0));
  EXPECT_DOUBLE_EQ(
      PartialL2Sensitivity(QuerySpec{QueryKind::kFunctionalLinReg, 1}),
      std::sqrt(17.0));
  EXPECT_THROW(
      PartialL2Sensitivity(QuerySpec{QueryKind::kFunctionalLinReg, 0}),
      std::invalid_argument);
}

}  // namespace
}  // namespace tpmdp
