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

#include "tpmdp/allocator.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tpmdp/lp_oracle.h"
#include "tpmdp/rng.h"

namespace tpmdp {
namespace {

std::vector<int> AllParties(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

TEST(UniformCutIndex, Examples) {
  EXPECT_EQ(UniformCutIndex(1000, 500), 3);
  EXPECT_EQ(UniformCutIndex(5, 2), 2);
  EXPECT_EQ(UniformCutIndex(4, 2), 3);
  for (int n : {2, 3, 7, 12}) {
    EXPECT_EQ(UniformCutIndex(n, n - 1), n);
  }
  EXPECT_THROW(UniformCutIndex(5, 0), std::invalid_argument);
  EXPECT_THROW(UniformCutIndex(5, 5), std::invalid_argument);
}

TEST(ClassifySubcase, Examples) {
  EXPECT_EQ(ClassifySubcase(1000, 500, 600), Subcase::kLargeActiveSet);
  EXPECT_EQ(ClassifySubcase(5, 2, 2), Subcase::kSparseActiveSet);
  EXPECT_EQ(ClassifySubcase(10, 0, 4), Subcase::kTrivial);
  EXPECT_EQ(ClassifySubcase(10, 3, 0), Subcase::kTrivial);
  EXPECT_EQ(ClassifySubcase(4, 1, 1), Subcase::kSingleActive);
  EXPECT_EQ(ClassifySubcase(6, 3, 2), Subcase::kCoveringActiveSet);
  // Full-active always reduces to the unrestricted coalition family.
  EXPECT_EQ(ClassifySubcase(8, 3, 8), Subcase::kLargeActiveSet);
}

TEST(AllocateAllActive, WorkedExamples) {
  const auto a = AllocateAllActive(MakeInstance(4, 2, AllParties(4),
                                                {3, 2, 1, 1}));
  EXPECT_EQ(a.variances, (std::vector<double>{8.5, 3.5, 0.5, 0.5}));
  EXPECT_DOUBLE_EQ(a.total, 13.0);

  const auto b =
      AllocateAllActive(MakeInstance(5, 2, AllParties(5), {1, 1, 1, 1, 1}));
  for (double v : b.variances) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  EXPECT_NEAR(b.total, 5.0 / 3.0, 1e-15);

  // t = n-1 collapses to each party covering its own requirement.
  const auto c =
      AllocateAllActive(MakeInstance(3, 2, AllParties(3), {2, 1, 0.5}));
  EXPECT_EQ(c.variances, (std::vector<double>{4.0, 1.0, 0.25}));
}

TEST(AllocateAllActive, RequiresFullActiveSet) {
  EXPECT_THROW(AllocateAllActive(MakeInstance(3, 1, {0}, {1, 1, 1})),
               std::invalid_argument);
}

TEST(Allocate, SparseActiveWorkedExample) {
  const auto inst = MakeInstance(5, 2, {0, 1}, {2, 1, 1.5, 0.5, 0.5});
  const SubcaseInfo info = AnalyzeSubcase(inst);
  EXPECT_EQ(info.tag, Subcase::kSparseActiveSet);
  EXPECT_DOUBLE_EQ(info.alpha, 1.5);
  EXPECT_DOUBLE_EQ(info.beta, 2.0);
  EXPECT_FALSE(info.surplus_branch);

  const Allocation alloc = Allocate(inst);
  EXPECT_EQ(alloc.variances,
            (std::vector<double>{1.75, 0.0, 1.125, 1.125, 1.125}));
  EXPECT_DOUBLE_EQ(alloc.total, 5.125);
  EXPECT_DOUBLE_EQ(OptimalTotalVariance(inst), 5.125);
}

TEST(Allocate, SingleActiveThresholdOne) {
  const auto inst = MakeInstance(4, 1, {0}, {5, 1, 1, 1});
  const Allocation alloc = Allocate(inst);
  EXPECT_DOUBLE_EQ(alloc.variances[0], 0.0);
  for (int i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(alloc.variances[i], 1.0 / 3.0);
}

TEST(Allocate, SingleActiveRecursesOnInactive) {
  // t >= 2: the inactive parties solve (t-1, n-1) among themselves.
  const auto inst = MakeInstance(5, 3, {2}, {9, 2, 1, 1, 2});
  const Allocation alloc = Allocate(inst);
  EXPECT_DOUBLE_EQ(alloc.variances[2], 0.0);
  const auto sub = AllocateAllActive(MakeInstance(4, 2, AllParties(4),
                                                  {9, 2, 1, 2}));
  EXPECT_DOUBLE_EQ(alloc.variances[0], sub.variances[0]);
  EXPECT_DOUBLE_EQ(alloc.variances[1], sub.variances[1]);
  EXPECT_DOUBLE_EQ(alloc.variances[3], sub.variances[2]);
  EXPECT_DOUBLE_EQ(alloc.variances[4], sub.variances[3]);
  EXPECT_NEAR(alloc.total, OptimalTotalVariance(inst), 1e-9 * alloc.total);
}

TEST(Allocate, TrivialCasesAreAllZero) {
  for (const auto& inst :
       {MakeInstance(6, 0, AllParties(6), {1, 2, 3, 4, 5, 6}),
        MakeInstance(6, 3, {}, {1, 2, 3, 4, 5, 6})}) {
    const Allocation alloc = Allocate(inst);
    EXPECT_DOUBLE_EQ(alloc.total, 0.0);
    for (double v : alloc.variances) EXPECT_DOUBLE_EQ(v, 0.0);
    EXPECT_DOUBLE_EQ(OptimalTotalVariance(inst), 0.0);
    EXPECT_TRUE(CheckFeasibility(inst, alloc).feasible);
  }
}

TEST(Allocate, DegenerateCollapseAtMaxThreshold) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.Next() % 6);
    std::vector<double> sigma(n);
    for (double& s : sigma) s = rng.NextUniform(0.0, 3.0);
    const auto inst = MakeInstance(n, n - 1, AllParties(n), sigma);
    const Allocation alloc = Allocate(inst);
    for (int i = 0; i < n; ++i) {
      EXPECT_DOUBLE_EQ(alloc.variances[i], sigma[i] * sigma[i]);
    }
    const FeasibilityReport report = CheckFeasibility(inst, alloc);
    EXPECT_TRUE(report.feasible);
    EXPECT_NEAR(report.worst_slack, 0.0, 1e-12);  // every constraint tight
  }
}

TEST(Allocate, PermutationEquivariance) {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const ThresholdInstance inst = testing::RandomInstance(rng);
    const Allocation alloc = Allocate(inst);

    std::vector<int> perm(inst.n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = inst.n - 1; i > 0; --i) {
      const int j =
          static_cast<int>(rng.Next() % static_cast<uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    ThresholdInstance shuffled = inst;
    for (int i = 0; i < inst.n; ++i) {
      shuffled.active[perm[i]] = inst.active[i];
      shuffled.required_sigma[perm[i]] = inst.required_sigma[i];
    }
    const Allocation shuffled_alloc = Allocate(shuffled);
    EXPECT_NEAR(shuffled_alloc.total, alloc.total,
                1e-12 * std::max(1.0, alloc.total));
    for (int i = 0; i < inst.n; ++i) {
      EXPECT_DOUBLE_EQ(shuffled_alloc.variances[perm[i]], alloc.variances[i])
          << "trial " << trial;
    }
  }
}

TEST(OptimalTotalVariance, MatchesAllocateEverywhere) {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 3000; ++trial) {
    const ThresholdInstance inst = testing::RandomInstance(rng);
    const double closed = OptimalTotalVariance(inst);
    const double total = Allocate(inst).total;
    EXPECT_NEAR(total, closed, 1e-9 * std::max(1.0, closed))
        << "n=" << inst.n << " t=" << inst.t;
  }
}

TEST(CheckFeasibility, WorkedExampleTightConstraints) {
  const auto inst = MakeInstance(5, 2, {0, 1}, {2, 1, 1.5, 0.5, 0.5});
  const Allocation alloc = Allocate(inst);
  const FeasibilityReport report = CheckFeasibility(inst, alloc);
  EXPECT_TRUE(report.feasible);
  EXPECT_NEAR(report.worst_slack, 0.0, 1e-12);

  // Parties 1 and 3 (0-based 0 and 2) sit exactly at their requirement.
  const auto rows = EnumerateConstraints(inst);
  EXPECT_DOUBLE_EQ(testing::BruteForceMinCoverage(rows, alloc.variances, 0),
                   4.0);
  EXPECT_DOUBLE_EQ(testing::BruteForceMinCoverage(rows, alloc.variances, 2),
                   2.25);
}

TEST(CheckFeasibility, AllZeroIsInfeasibleUnderThreat) {
  const auto inst = MakeInstance(4, 2, {0, 1, 2, 3}, {1, 1, 1, 1});
  Allocation zeros;
  zeros.variances.assign(4, 0.0);
  zeros.total = 0.0;
  const FeasibilityReport report = CheckFeasibility(inst, zeros);
  EXPECT_FALSE(report.feasible);
  EXPECT_LT(report.worst_slack, 0.0);
}

TEST(CheckFeasibility, AgreesWithBruteForceEnumeration) {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 1500; ++trial) {
    const ThresholdInstance inst = testing::RandomInstance(rng);
    Allocation alloc = Allocate(inst);
    // Scale around 1 so both feasible and infeasible cases occur.
    const double scale = rng.NextUniform(0.8, 1.2);
    for (double& v : alloc.variances) v *= scale;
    alloc.total *= scale;

    const auto rows = EnumerateConstraints(inst);
    const bool brute = testing::BruteForceFeasible(rows, alloc.variances);
    const FeasibilityReport fast = CheckFeasibility(inst, alloc);
    EXPECT_EQ(fast.feasible, brute)
        << "n=" << inst.n << " t=" << inst.t << " scale=" << scale;
    if (fast.worst_party >= 0) {
      const double brute_covered = testing::BruteForceMinCoverage(
          rows, alloc.variances, fast.worst_party);
      EXPECT_NEAR(fast.worst_covered, brute_covered,
                  1e-9 * std::max(1.0, brute_covered));
    }
  }
}

TEST(Baselines, TmdpWorstCaseBudget) {
  const auto inst = MakeInstance(4, 2, AllParties(4), {3, 2, 1, 1});
  const Allocation tmdp = TmdpBaseline(inst);
  EXPECT_DOUBLE_EQ(tmdp.total, 18.0);
  for (double v : tmdp.variances) EXPECT_DOUBLE_EQ(v, 4.5);

  // Homogeneous requirements make the replacement a no-op.
  const auto flat = MakeInstance(5, 3, AllParties(5), {2, 2, 2, 2, 2});
  EXPECT_EQ(TmdpBaseline(flat).variances, Allocate(flat).variances);
}

TEST(Baselines, NonThresholdWorstCase) {
  const auto inst = MakeInstance(4, 2, AllParties(4), {3, 2, 1, 1});
  const Allocation worst = NonThresholdBaseline(inst);
  EXPECT_EQ(worst.variances, (std::vector<double>{9.0, 4.0, 1.0, 1.0}));

  const auto already = MakeInstance(4, 3, AllParties(4), {3, 2, 1, 1});
  EXPECT_EQ(NonThresholdBaseline(already).variances,
            Allocate(already).variances);
}

TEST(Baselines, CentralizedMin) {
  EXPECT_DOUBLE_EQ(
      CentralizedMinVariance(MakeInstance(4, 2, AllParties(4), {3, 2, 1, 1})),
      9.0);
  // The lone active party is unprotected against itself, so only the
  // inactive requirements bind.
  EXPECT_DOUBLE_EQ(CentralizedMinVariance(MakeInstance(3, 1, {0}, {9, 2, 1})),
                   4.0);
  EXPECT_DOUBLE_EQ(
      CentralizedMinVariance(MakeInstance(3, 0, {0, 1, 2}, {9, 2, 1})), 0.0);
}

TEST(Baselines, OrderingHoldsOnRandomInstances) {
  SplitMix64 rng(321);
  for (int trial = 0; trial < 2000; ++trial) {
    const ThresholdInstance inst = testing::RandomInstance(rng);
    const double optimal = Allocate(inst).total;
    const double tolerance = 1e-9 * std::max(1.0, optimal);
    EXPECT_LE(CentralizedMinVariance(inst), optimal + tolerance);
    EXPECT_GE(TmdpBaseline(inst).total, optimal - tolerance);
    EXPECT_GE(NonThresholdBaseline(inst).total, optimal - tolerance);
  }
}

TEST(Allocate, MillionPartiesStaysExact) {
  const int n = 1000000;
  SplitMix64 rng(42);
  std::vector<double> sigma(n);
  for (double& s : sigma) s = rng.NextUniform(0.1, 3.0);
  ThresholdInstance inst;
  inst.n = n;
  inst.t = n / 2;
  inst.active.assign(n, 1);
  inst.required_sigma = std::move(sigma);
  const Allocation alloc = Allocate(inst);
  const double closed = OptimalTotalVariance(inst);
  EXPECT_NEAR(alloc.total, closed, 1e-9 * closed);
  EXPECT_TRUE(CheckFeasibility(inst, alloc).feasible);
}

}  // namespace
}  // namespace tpmdp
