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

#ifndef TPMDP_MECHANISM_H_
#define TPMDP_MECHANISM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tpmdp/allocator.h"
#include "tpmdp/budget.h"
#include "tpmdp/population.h"

namespace tpmdp {

// One simulated execution of the multi-party Gaussian mechanism. The secure
// aggregation is modeled as an ideal functionality: every party's noise
// vector is summed directly onto the true query output, and only parties in
// the active set may read released_output.
struct MechanismRun {
  std::vector<double> true_output;
  std::vector<double> released_output;
  std::vector<std::vector<double>> noise_draws;  // per party, per coordinate
  uint64_t seed = 0;
};

// Draws each party's zero-mean Gaussian noise at its allocated variance and
// releases true + sum of noises. Per-coordinate aggregate noise variance is
// allocation.total. Only kCount is a vector query of dimension 1 here;
// regression goes through FunctionalLinRegWeights instead.
MechanismRun RunMechanism(const Population& pop, const ThresholdInstance& inst,
                          const Allocation& allocation, const QuerySpec& query,
                          uint64_t seed);

// Functional-mechanism linear regression: perturbs the least-squares
// sufficient statistics with Gaussian noise of standard deviation `sigma`
// (calibrated against sensitivity sqrt(2 d^2 + 15 d)) and solves
//   (X'X + N1 + 4 sigma I) w = X'y + N2,
// where N1 is symmetric with i.i.d. N(0, sigma^2) upper triangle and N2 has
// i.i.d. N(0, sigma^2 / 4) entries. sigma = 0 reduces to ordinary least
// squares. Throws on a numerically singular system.
std::vector<double> FunctionalLinRegWeights(std::span<const double> features,
                                            std::span<const double> labels,
                                            int d, double sigma, uint64_t seed);

// Per-record keep probabilities and draw of the Sample baseline: records
// with epsilon below the threshold are kept with probability
// (e^eps - 1) / (e^threshold - 1), the rest always.
struct SampleDraw {
  double eps_threshold = 0.0;
  std::vector<uint8_t> kept;
};

double SampleEpsThreshold(const Population& pop);  // mean of the epsilons
double SampleKeepProbability(double epsilon, double eps_threshold);
SampleDraw DrawSample(const Population& pop, uint64_t seed);

// Sample-baseline count: Gaussian mechanism at (mean epsilon, delta) on the
// subsampled bits. The error against the full true count includes the
// records the subsampling dropped.
double SampleCountEstimate(const Population& pop, uint64_t seed);

// Local randomized response, the PLDP count baseline. Every party reports
// its bit truthfully with probability e^eps / (1 + e^eps) and flipped
// otherwise; the aggregator debiases each report. Unbiased. Rejects
// epsilon = 0, where the debiasing divisor vanishes.
double RandomizedResponseCount(const Population& pop, uint64_t seed);

// Root mean squared error of scalar estimates against the truth.
double EvaluateRmse(std::span<const double> estimates, double truth);

// Root mean square of raw errors (regression prediction residuals).
double RmseOfErrors(std::span<const double> errors);

}  // namespace tpmdp

#endif  // TPMDP_MECHANISM_H_
