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

#ifndef TPMDP_EXPERIMENT_H_
#define TPMDP_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tpmdp/budget.h"
#include "tpmdp/population.h"

namespace tpmdp {

// How the active set (parties that receive the output) is chosen.
enum class ActiveSpecKind { kAll, kRandomK, kExplicit };

struct ActiveSpec {
  ActiveSpecKind kind = ActiveSpecKind::kAll;
  int random_k = 0;                 // kRandomK
  std::vector<int> indices;         // kExplicit, 0-based
};

// Full description of one experiment; parsed from a JSON document with a
// fixed schema where unknown keys are hard errors.
struct ExperimentConfig {
  QueryKind query = QueryKind::kCount;
  int n = 1000;
  double t = 0.5;  // integer >= 1: absolute; in (0, 1): fraction of n; 0: none
  double rho = 0.15;
  double f_conservative = 0.54;
  double f_moderate = 0.37;
  double eps_conservative = 0.01;
  double eps_moderate = 0.2;
  double eps_liberal = 1.0;
  double fixed_delta = 0.0;  // <= 0: use 1 / (10 n)
  ActiveSpec active;
  int repetitions = 100;  // for regression: runs of cross-validation
  int features = 4;       // regression only
  int cv_folds = 5;       // regression only
  bool include_control = true;  // emit the zero-noise control row (count)
  uint64_t seed = 1;
  std::string out;  // optional output path

  void Validate() const;
  PopulationParams ToPopulationParams() const;
  int ResolvedThreshold(int parties) const;
  std::vector<uint8_t> ResolveActiveMask(int parties, uint64_t seed) const;
};

// Parses and validates a JSON config document. Throws std::invalid_argument
// with a diagnostic on schema violations, including unknown keys.
ExperimentConfig ParseExperimentConfig(const std::string& json_text);

struct ResultRow {
  std::string mechanism;
  int repetition = 0;      // -1 marks the per-mechanism summary row
  std::optional<double> truth;
  std::optional<double> estimate;
  std::optional<double> error;
  std::optional<double> rmse;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;

  // Mean RMSE from a mechanism's summary row; throws if absent.
  double SummaryRmse(const std::string& mechanism) const;
};

// Runs every mechanism for the configured query. Repetitions fan out over
// `threads` workers; each (mechanism, repetition) cell derives its own RNG
// stream from the config seed, so the output is identical for any thread
// count and any completion order.
ExperimentResult RunExperiment(const ExperimentConfig& config, int threads = 1);

// Versioned CSV with one header row; numeric cells are written with full
// round-trip precision. Byte-stable across runs for a fixed config.
void WriteExperimentCsv(const ExperimentResult& result, QueryKind query,
                        std::ostream& out);

}  // namespace tpmdp

#endif  // TPMDP_EXPERIMENT_H_
