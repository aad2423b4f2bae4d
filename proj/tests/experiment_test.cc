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

#include "tpmdp/experiment.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"

namespace tpmdp {
namespace {

TEST(ParseExperimentConfig, DefaultsAndOverrides) {
  const ExperimentConfig config = ParseExperimentConfig(R"({
    "query": "count", "n": 200, "t": 0.5, "rho": 0.3,
    "repetitions": 10, "seed": 9
  })");
  EXPECT_EQ(config.query, QueryKind::kCount);
  EXPECT_EQ(config.n, 200);
  EXPECT_EQ(config.ResolvedThreshold(config.n), 100);
  EXPECT_DOUBLE_EQ(config.rho, 0.3);
  EXPECT_EQ(config.repetitions, 10);
  EXPECT_EQ(config.seed, 9u);
}

TEST(ParseExperimentConfig, UnknownKeyIsAHardError) {
  EXPECT_THROW(ParseExperimentConfig(R"({"n": 100, "rh0": 0.2})"),
               std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig("not json"), std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"(["array"])"), std::invalid_argument);
}

TEST(ParseExperimentConfig, TypeAndRangeChecks) {
  EXPECT_THROW(ParseExperimentConfig(R"({"n": "many"})"),
               std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"({"query": "sum"})"),
               std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"({"n": 100, "t": 1.5})"),
               std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"({"n": 100, "t": 100})"),
               std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"({"delta": 0.0})"),
               std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"({"delta": "sometimes"})"),
               std::invalid_argument);
  EXPECT_THROW(
      ParseExperimentConfig(R"({"active": {"random_k": 3, "extra": 1}})"),
      std::invalid_argument);
  EXPECT_THROW(ParseExperimentConfig(R"({"n": 10, "active": [10]})"),
               std::invalid_argument);
}

TEST(ParseExperimentConfig, ThresholdResolution) {
  ExperimentConfig config;
  config.n = 1000;
  config.t = 0.5;
  EXPECT_EQ(config.ResolvedThreshold(1000), 500);
  config.t = 1.0;
  EXPECT_EQ(config.ResolvedThreshold(1000), 1);
  config.t = 0.0;
  EXPECT_EQ(config.ResolvedThreshold(1000), 0);
  config.t = 999.0;
  EXPECT_EQ(config.ResolvedThreshold(1000), 999);
}

TEST(ParseExperimentConfig, ActiveSpecs) {
  const auto all = ParseExperimentConfig(R"({"n": 10, "active": "all"})");
  EXPECT_EQ(all.ResolveActiveMask(10, 1),
            std::vector<uint8_t>(10, 1));

  const auto random_k =
      ParseExperimentConfig(R"({"n": 10, "active": {"random_k": 4}})");
  const auto mask = random_k.ResolveActiveMask(10, 1);
  int count = 0;
  for (uint8_t bit : mask) count += bit;
  EXPECT_EQ(count, 4);
  EXPECT_EQ(mask, random_k.ResolveActiveMask(10, 1));  // seeded, stable

  const auto explicit_set =
      ParseExperimentConfig(R"({"n": 10, "active": [0, 3, 7]})");
  const auto explicit_mask = explicit_set.ResolveActiveMask(10, 1);
  EXPECT_EQ(explicit_mask[0], 1);
  EXPECT_EQ(explicit_mask[3], 1);
  EXPECT_EQ(explicit_mask[7], 1);
  EXPECT_EQ(explicit_mask[1], 0);
}

ExperimentConfig SmallCountConfig() {
  return ParseExperimentConfig(R"({
    "query": "count", "n": 300, "t": 0.5,
    "repetitions": 200, "seed": 12
  })");
}

TEST(RunExperiment, CountSummariesBehave) {
  const ExperimentResult result = RunExperiment(SmallCountConfig());
  // 7 mechanisms (control included), each with repetitions + 1 summary rows.
  EXPECT_EQ(result.rows.size(), 7u * 201u);
  EXPECT_DOUBLE_EQ(result.SummaryRmse("control"), 0.0);
  EXPECT_LE(result.SummaryRmse("G"), result.SummaryRmse("non-thre"));
  EXPECT_GT(result.SummaryRmse("G"), 0.0);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  const ExperimentConfig config = SmallCountConfig();
  const ExperimentResult serial = RunExperiment(config, 1);
  const ExperimentResult parallel = RunExperiment(config, 4);
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (size_t i = 0; i < serial.rows.size(); ++i) {
    EXPECT_EQ(serial.rows[i].mechanism, parallel.rows[i].mechanism);
    EXPECT_EQ(serial.rows[i].repetition, parallel.rows[i].repetition);
    EXPECT_EQ(serial.rows[i].estimate.has_value(),
              parallel.rows[i].estimate.has_value());
    if (serial.rows[i].estimate) {
      EXPECT_EQ(*serial.rows[i].estimate, *parallel.rows[i].estimate);
    }
  }
}

TEST(RunExperiment, GaussianMechanismsIgnoreDataDensity) {
  // The additive noise never looks at the data, so for a fixed seed the
  // errors are identical across rho; only the truth moves.
  ExperimentConfig low = SmallCountConfig();
  low.rho = 0.05;
  ExperimentConfig high = SmallCountConfig();
  high.rho = 0.5;
  const ExperimentResult a = RunExperiment(low);
  const ExperimentResult b = RunExperiment(high);
  EXPECT_EQ(a.SummaryRmse("G"), b.SummaryRmse("G"));
  EXPECT_EQ(a.SummaryRmse("MIN"), b.SummaryRmse("MIN"));
}

TEST(RunExperiment, RegressionProducesFiniteRmse) {
  const ExperimentConfig config = ParseExperimentConfig(R"({
    "query": "linreg", "n": 250, "t": 0.5, "features": 3,
    "repetitions": 4, "cv_folds": 5, "seed": 5
  })");
  const ExperimentResult result = RunExperiment(config, 2);
  EXPECT_EQ(result.rows.size(), 6u * 5u);
  for (const ResultRow& row : result.rows) {
    ASSERT_TRUE(row.rmse || row.repetition != -1);
    if (row.rmse) {
      EXPECT_TRUE(std::isfinite(*row.rmse));
      EXPECT_GE(*row.rmse, 0.0);
    }
  }
  // Noise can only hurt prediction against the non-private fit.
  EXPECT_LE(result.SummaryRmse("non-pri"), result.SummaryRmse("non-thre"));
  EXPECT_LE(result.SummaryRmse("non-pri"), result.SummaryRmse("G"));
}

TEST(WriteExperimentCsv, StableShape) {
  const ExperimentConfig config = ParseExperimentConfig(R"({
    "query": "count", "n": 50, "t": 0.5, "repetitions": 3, "seed": 2
  })");
  const ExperimentResult result = RunExperiment(config);
  std::ostringstream first;
  WriteExperimentCsv(result, config.query, first);
  std::ostringstream second;
  WriteExperimentCsv(RunExperiment(config), config.query, second);
  EXPECT_EQ(first.str(), second.str());

  std::istringstream lines(first.str());
  std::string line;
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(line, "schema,query,mechanism,repetition,truth,estimate,error,rmse");
  size_t rows = 0;
  size_t summaries = 0;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.find(",summary,") != std::string::npos) ++summaries;
  }
  EXPECT_EQ(rows, 7u * 4u);
  EXPECT_EQ(summaries, 7u);
}

}  // namespace
}  // namespace tpmdp
