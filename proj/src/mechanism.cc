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

#include "tpmdp/mechanism.h"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tpmdp/calibration.h"
#include "tpmdp/rng.h"

namespace tpmdp {

MechanismRun RunMechanism(const Population& pop, const ThresholdInstance& inst,
                          const Allocation& allocation, const QuerySpec& query,
                          uint64_t seed) {
  inst.Validate();
  if (pop.Size() != inst.n ||
      static_cast<int>(allocation.variances.size()) != inst.n) {
    throw std::invalid_argument("population/instance/allocation size mismatch");
  }
  if (query.kind != QueryKind::kCount) {
    throw std::invalid_argument(
        "RunMechanism only simulates the count query; use "
        "FunctionalLinRegWeights for regression");
  }

  MechanismRun run;
  run.seed = seed;
  run.true_output = {pop.TrueCount()};
  run.noise_draws.resize(inst.n);
  double noise_sum = 0.0;
  for (int i = 0; i < inst.n; ++i) {
    SplitMix64 rng(DeriveSeed(seed, /*a=*/1, /*b=*/static_cast<uint64_t>(i)));
    const double draw = rng.NextGaussian(std::sqrt(allocation.variances[i]));
    run.noise_draws[i] = {draw};
    noise_sum += draw;
  }
  run.released_output = {run.true_output[0] + noise_sum};
  return run;
}

std::vector<double> FunctionalLinRegWeights(std::span<const double> features,
                                            std::span<const double> labels,
                                            int d, double sigma,
                                            uint64_t seed) {
  if (d <= 0) throw std::invalid_argument("feature count must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  const int rows = static_cast<int>(labels.size());
  if (static_cast<int>(features.size()) != rows * d || rows == 0) {
    throw std::invalid_argument("features must be rows x d and nonempty");
  }

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(features.data(), rows, d);
  Eigen::Map<const Eigen::VectorXd> y(labels.data(), rows);

  Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::VectorXd moment = x.transpose() * y;

  if (sigma > 0.0) {
    SplitMix64 rng(DeriveSeed(seed, /*a=*/2));
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        const double noise = rng.NextGaussian(sigma);
        gram(i, j) += noise;
        if (j != i) gram(j, i) += noise;
      }
    }
    for (int i = 0; i < d; ++i) moment(i) += rng.NextGaussian(sigma / 2.0);
    gram.diagonal().array() += 4.0 * sigma;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) {
    throw std::runtime_error("perturbed normal equations are singular");
  }
  Eigen::VectorXd w = lu.solve(moment);
  return std::vector<double>(w.data(), w.data() + d);
}

double SampleEpsThreshold(const Population& pop) {
  if (pop.Size() == 0) throw std::invalid_argument("empty population");
  double sum = 0.0;
  for (const PrivacyBudget& b : pop.budgets) sum += b.epsilon;
  return sum / pop.Size();
}

double SampleKeepProbability(double epsilon, double eps_threshold) {
  if (epsilon >= eps_threshold) return 1.0;
  return std::expm1(epsilon) / std::expm1(eps_threshold);
}

SampleDraw DrawSample(const Population& pop, uint64_t seed) {
  SampleDraw draw;
  draw.eps_threshold = SampleEpsThreshold(pop);
  draw.kept.resize(pop.Size());
  SplitMix64 rng(DeriveSeed(seed, /*a=*/3));
  for (int i = 0; i < pop.Size(); ++i) {
    const double p =
        SampleKeepProbability(pop.budgets[i].epsilon, draw.eps_threshold);
    draw.kept[i] = rng.NextBernoulli(p) ? 1 : 0;
  }
  return draw;
}

double SampleCountEstimate(const Population& pop, uint64_t seed) {
  const SampleDraw draw = DrawSample(pop, seed);
  double sampled_count = 0.0;
  for (int i = 0; i < pop.Size(); ++i) {
    if (draw.kept[i]) sampled_count += pop.bits[i];
  }
  const CalibrationTriple triple{
      PrivacyBudget{draw.eps_threshold, pop.budgets.front().delta}, 1.0};
  const double sigma = CalibrateSigma(triple).sigma;
  SplitMix64 rng(DeriveSeed(seed, /*a=*/4));
  return sampled_count + rng.NextGaussian(sigma);
}

double RandomizedResponseCount(const Population& pop, uint64_t seed) {
  SplitMix64 rng(DeriveSeed(seed, /*a=*/5));
  double estimate = 0.0;
  for (int i = 0; i < pop.Size(); ++i) {
    const double eps = pop.budgets[i].epsilon;
    if (eps == 0.0) {
      throw std::invalid_argument(
          "randomized response is undefined at epsilon = 0");
    }
    const double p = std::exp(eps) / (1.0 + std::exp(eps));
    const bool truthful = rng.NextBernoulli(p);
    const double report = truthful ? pop.bits[i] : 1 - pop.bits[i];
    estimate += (report - (1.0 - p)) / (2.0 * p - 1.0);
  }
  return estimate;
}

double EvaluateRmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::invalid_argument("no estimates");
  double sum_sq = 0.0;
  for (double e : estimates) {
    const double err = e - truth;
    sum_sq += err * err;
  }
  return std::sqrt(sum_sq / estimates.size());
}

double RmseOfErrors(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("no errors");
  double sum_sq = 0.0;
  for (double e : errors) sum_sq += e * e;
  return std::sqrt(sum_sq / errors.size());
}

}  // namespace tpmdp
