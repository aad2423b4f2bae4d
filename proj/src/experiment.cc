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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tpmdp/allocator.h"
#include "tpmdp/calibration.h"
#include "tpmdp/csv.h"
#include "tpmdp/mechanism.h"
#include "tpmdp/rng.h"

namespace tpmdp {

namespace {

using nlohmann::json;

// Stable mechanism ids; they key the RNG streams, so adding or removing a
// mechanism from a run must never shift the draws of another.
enum MechanismId : uint64_t {
  kMechG = 1,
  kMechNonThreshold = 2,
  kMechTmdp = 3,
  kMechMin = 4,
  kMechSample = 5,
  kMechPldp = 6,
  kMechControl = 7,
  kMechNonPrivate = 8,
};

struct MechanismPlan {
  MechanismId id;
  std::string name;
};

std::vector<MechanismPlan> MechanismsFor(const ExperimentConfig& config) {
  if (config.query == QueryKind::kCount) {
    std::vector<MechanismPlan> plans = {
        {kMechG, "G"},           {kMechNonThreshold, "non-thre"},
        {kMechTmdp, "TMDP"},     {kMechMin, "MIN"},
        {kMechSample, "Sample"}, {kMechPldp, "PLDP"},
    };
    if (config.include_control) plans.push_back({kMechControl, "control"});
    return plans;
  }
  return {
      {kMechG, "G"},           {kMechNonThreshold, "non-thre"},
      {kMechTmdp, "TMDP"},     {kMechMin, "MIN"},
      {kMechSample, "Sample"}, {kMechNonPrivate, "non-pri"},
  };
}

}  // namespace

void ExperimentConfig::Validate() const {
  ToPopulationParams().Validate();
  if (repetitions <= 0) throw std::invalid_argument("repetitions must be > 0");
  if (query == QueryKind::kFunctionalLinReg) {
    if (features <= 0) throw std::invalid_argument("features must be > 0");
    if (cv_folds < 2 || cv_folds > n) {
      throw std::invalid_argument("cv_folds must be in [2, n]");
    }
  }
  ResolvedThreshold(n);
  if (active.kind == ActiveSpecKind::kRandomK &&
      (active.random_k < 0 || active.random_k > n)) {
    throw std::invalid_argument("random_k must be in [0, n]");
  }
  if (active.kind == ActiveSpecKind::kExplicit) {
    for (int idx : active.indices) {
      if (idx < 0 || idx >= n) {
        throw std::invalid_argument("active index out of range");
      }
    }
  }
}

PopulationParams ExperimentConfig::ToPopulationParams() const {
  PopulationParams params;
  params.n = n;
  params.rho = rho;
  params.f_conservative = f_conservative;
  params.f_moderate = f_moderate;
  params.eps_conservative = eps_conservative;
  params.eps_moderate = eps_moderate;
  params.eps_liberal = eps_liberal;
  params.fixed_delta = fixed_delta;
  params.features = query == QueryKind::kFunctionalLinReg ? features : 0;
  return params;
}

int ExperimentConfig::ResolvedThreshold(int parties) const {
  double value = t;
  if (value > 0.0 && value < 1.0) {
    value = std::floor(value * parties);
  }
  if (value != std::floor(value)) {
    throw std::invalid_argument(
        "t must be an integer or a fraction in (0, 1)");
  }
  const int resolved = static_cast<int>(value);
  if (resolved < 0 || resolved > parties - 1) {
    throw std::invalid_argument("resolved threshold must be in [0, n-1]");
  }
  return resolved;
}

std::vector<uint8_t> ExperimentConfig::ResolveActiveMask(int parties,
                                                         uint64_t seed) const {
  std::vector<uint8_t> mask(parties, 0);
  switch (active.kind) {
    case ActiveSpecKind::kAll:
      std::fill(mask.begin(), mask.end(), 1);
      break;
    case ActiveSpecKind::kRandomK: {
      std::vector<int> ids(parties);
      std::iota(ids.begin(), ids.end(), 0);
      SplitMix64 rng(DeriveSeed(seed, /*a=*/6));
      for (int i = parties - 1; i > 0; --i) {
        const int j =
            static_cast<int>(rng.Next() % static_cast<uint64_t>(i + 1));
        std::swap(ids[i], ids[j]);
      }
      for (int k = 0; k < active.random_k; ++k) mask[ids[k]] = 1;
      break;
    }
    case ActiveSpecKind::kExplicit:
      for (int idx : active.indices) mask[idx] = 1;
      break;
  }
  return mask;
}

ExperimentConfig ParseExperimentConfig(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be an object");

  static const char* kKnownKeys[] = {
      "query",        "n",           "t",
      "rho",          "f_conservative", "f_moderate",
      "eps_conservative", "eps_moderate", "eps_liberal",
      "delta",        "active",      "repetitions",
      "features",     "cv_folds",    "include_control",
      "seed",         "out",
  };
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* candidate : kKnownKeys) {
      if (key == candidate) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }

  ExperimentConfig config;
  try {
    if (doc.contains("query")) {
      const std::string q = doc["query"].get<std::string>();
      if (q == "count") {
        config.query = QueryKind::kCount;
      } else if (q == "linreg") {
        config.query = QueryKind::kFunctionalLinReg;
      } else {
        throw std::invalid_argument("query must be \"count\" or \"linreg\"");
      }
    }
    if (doc.contains("n")) config.n = doc["n"].get<int>();
    if (doc.contains("t")) config.t = doc["t"].get<double>();
    if (doc.contains("rho")) config.rho = doc["rho"].get<double>();
    if (doc.contains("f_conservative")) {
      config.f_conservative = doc["f_conservative"].get<double>();
    }
    if (doc.contains("f_moderate")) {
      config.f_moderate = doc["f_moderate"].get<double>();
    }
    if (doc.contains("eps_conservative")) {
      config.eps_conservative = doc["eps_conservative"].get<double>();
    }
    if (doc.contains("eps_moderate")) {
      config.eps_moderate = doc["eps_moderate"].get<double>();
    }
    if (doc.contains("eps_liberal")) {
      config.eps_liberal = doc["eps_liberal"].get<double>();
    }
    if (doc.contains("delta")) {
      if (doc["delta"].is_string()) {
        if (doc["delta"].get<std::string>() != "one_over_10n") {
          throw std::invalid_argument(
              "delta must be a number or \"one_over_10n\"");
        }
        config.fixed_delta = 0.0;
      } else {
        config.fixed_delta = doc["delta"].get<double>();
        if (!(config.fixed_delta > 0.0 && config.fixed_delta <= 1.0)) {
          throw std::invalid_argument("delta must be in (0, 1]");
        }
      }
    }
    if (doc.contains("active")) {
      const json& spec = doc["active"];
      if (spec.is_string()) {
        if (spec.get<std::string>() != "all") {
          throw std::invalid_argument("active string form must be \"all\"");
        }
        config.active.kind = ActiveSpecKind::kAll;
      } else if (spec.is_object()) {
        if (!spec.contains("random_k") || spec.size() != 1) {
          throw std::invalid_argument(
              "active object form must be {\"random_k\": k}");
        }
        config.active.kind = ActiveSpecKind::kRandomK;
        config.active.random_k = spec["random_k"].get<int>();
      } else if (spec.is_array()) {
        config.active.kind = ActiveSpecKind::kExplicit;
        config.active.indices = spec.get<std::vector<int>>();
      } else {
        throw std::invalid_argument("bad active spec");
      }
    }
    if (doc.contains("repetitions")) {
      config.repetitions = doc["repetitions"].get<int>();
    }
    if (doc.contains("features")) config.features = doc["features"].get<int>();
    if (doc.contains("cv_folds")) config.cv_folds = doc["cv_folds"].get<int>();
    if (doc.contains("include_control")) {
      config.include_control = doc["include_control"].get<bool>();
    }
    if (doc.contains("seed")) config.seed = doc["seed"].get<uint64_t>();
    if (doc.contains("out")) config.out = doc["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field has wrong type: ") +
                                e.what());
  }
  config.Validate();
  return config;
}

double ExperimentResult::SummaryRmse(const std::string& mechanism) const {
  for (const ResultRow& row : rows) {
    if (row.repetition == -1 && row.mechanism == mechanism && row.rmse) {
      return *row.rmse;
    }
  }
  throw std::invalid_argument("no summary row for mechanism " + mechanism);
}

namespace {

// Everything derivable from the config before any repetition runs.
struct CountSetup {
  Population pop;
  ThresholdInstance instance;
  Allocation alloc_g;
  Allocation alloc_tmdp;
  Allocation alloc_non_threshold;
  double min_variance = 0.0;
  double truth = 0.0;
};

CountSetup PrepareCount(const ExperimentConfig& config) {
  CountSetup setup;
  setup.pop = GeneratePopulation(config.ToPopulationParams(), config.seed);
  const int n = config.n;
  setup.instance.n = n;
  setup.instance.t = config.ResolvedThreshold(n);
  setup.instance.active = config.ResolveActiveMask(n, config.seed);
  setup.instance.required_sigma.resize(n);
  for (int i = 0; i < n; ++i) {
    setup.instance.required_sigma[i] =
        CalibrateSigma(CalibrationTriple{setup.pop.budgets[i], 1.0}).sigma;
  }
  setup.instance.Validate();
  setup.alloc_g = Allocate(setup.instance);
  setup.alloc_tmdp = TmdpBaseline(setup.instance);
  setup.alloc_non_threshold = NonThresholdBaseline(setup.instance);
  setup.min_variance = CentralizedMinVariance(setup.instance);
  setup.truth = setup.pop.TrueCount();
  return setup;
}

double CountEstimate(const CountSetup& setup, const ExperimentConfig& config,
                     MechanismId mech, int rep) {
  const uint64_t rep_seed = DeriveSeed(config.seed, mech, rep);
  switch (mech) {
    case kMechG:
      return RunMechanism(setup.pop, setup.instance, setup.alloc_g,
                          QuerySpec{QueryKind::kCount, 0}, rep_seed)
          .released_output[0];
    case kMechTmdp:
      return RunMechanism(setup.pop, setup.instance, setup.alloc_tmdp,
                          QuerySpec{QueryKind::kCount, 0}, rep_seed)
          .released_output[0];
    case kMechNonThreshold:
      return RunMechanism(setup.pop, setup.instance,
                          setup.alloc_non_threshold,
                          QuerySpec{QueryKind::kCount, 0}, rep_seed)
          .released_output[0];
    case kMechMin: {
      SplitMix64 rng(DeriveSeed(rep_seed, /*a=*/1));
      return setup.truth + rng.NextGaussian(std::sqrt(setup.min_variance));
    }
    case kMechSample:
      return SampleCountEstimate(setup.pop, rep_seed);
    case kMechPldp:
      return RandomizedResponseCount(setup.pop, rep_seed);
    case kMechControl:
      return setup.truth;
    default:
      throw std::logic_error("mechanism not defined for count");
  }
}

struct RegressionFold {
  std::vector<int> train_ids;
  std::vector<int> test_ids;
  std::vector<double> train_features;
  std::vector<double> train_labels;
  double g_sigma = 0.0;             // sqrt of allocated total variance
  double tmdp_sigma = 0.0;
  double non_threshold_sigma = 0.0;
  double min_sigma = 0.0;
  double sample_sigma = 0.0;        // Gaussian scale at the mean epsilon
  double eps_threshold = 0.0;
};

struct RegressionSetup {
  Population pop;
  std::vector<RegressionFold> folds;
  double sensitivity = 0.0;
};

RegressionSetup PrepareRegression(const ExperimentConfig& config) {
  RegressionSetup setup;
  setup.pop = GeneratePopulation(config.ToPopulationParams(), config.seed);
  const int n = config.n;
  const int d = config.features;
  setup.sensitivity =
      PartialL2Sensitivity(QuerySpec{QueryKind::kFunctionalLinReg, d});

  std::vector<double> sigma_all(n);
  for (int i = 0; i < n; ++i) {
    sigma_all[i] = CalibrateSigma(CalibrationTriple{setup.pop.budgets[i],
                                                    setup.sensitivity})
                       .sigma;
  }
  const std::vector<uint8_t> active_mask =
      config.ResolveActiveMask(n, config.seed);

  // Seeded permutation defines the folds once; repetitions only redraw noise.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 fold_rng(DeriveSeed(config.seed, /*a=*/7));
  for (int i = n - 1; i > 0; --i) {
    const int j =
        static_cast<int>(fold_rng.Next() % static_cast<uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }

  const int folds = config.cv_folds;
  setup.folds.resize(folds);
  for (int f = 0; f < folds; ++f) {
    RegressionFold& fold = setup.folds[f];
    for (int r = 0; r < n; ++r) {
      if (r % folds == f) {
        fold.test_ids.push_back(order[r]);
      } else {
        fold.train_ids.push_back(order[r]);
      }
    }
    const int train_n = static_cast<int>(fold.train_ids.size());
    fold.train_features.reserve(static_cast<size_t>(train_n) * d);
    fold.train_labels.reserve(train_n);
    ThresholdInstance inst;
    inst.n = train_n;
    inst.t = config.ResolvedThreshold(train_n);
    inst.active.reserve(train_n);
    inst.required_sigma.reserve(train_n);
    double eps_sum = 0.0;
    for (int id : fold.train_ids) {
      for (int k = 0; k < d; ++k) {
        fold.train_features.push_back(
            setup.pop.features[static_cast<size_t>(id) * d + k]);
      }
      fold.train_labels.push_back(setup.pop.labels[id]);
      inst.active.push_back(active_mask[id]);
      inst.required_sigma.push_back(sigma_all[id]);
      eps_sum += setup.pop.budgets[id].epsilon;
    }
    inst.Validate();
    fold.g_sigma = std::sqrt(Allocate(inst).total);
    fold.tmdp_sigma = std::sqrt(TmdpBaseline(inst).total);
    fold.non_threshold_sigma = std::sqrt(NonThresholdBaseline(inst).total);
    fold.min_sigma = std::sqrt(CentralizedMinVariance(inst));
    fold.eps_threshold = eps_sum / train_n;
    fold.sample_sigma =
        CalibrateSigma(CalibrationTriple{
                           PrivacyBudget{fold.eps_threshold,
                                         setup.pop.budgets.front().delta},
                           setup.sensitivity})
            .sigma;
  }
  return setup;
}

// One cross-validation pass of one mechanism; returns the prediction RMSE
// over all held-out records.
double RegressionRmse(const RegressionSetup& setup,
                      const ExperimentConfig& config, MechanismId mech,
                      int rep) {
  const int d = config.features;
  const uint64_t rep_seed = DeriveSeed(config.seed, mech, rep);
  std::vector<double> errors;
  errors.reserve(config.n);
  for (size_t f = 0; f < setup.folds.size(); ++f) {
    const RegressionFold& fold = setup.folds[f];
    const uint64_t fold_seed = DeriveSeed(rep_seed, /*a=*/10 + f);
    std::vector<double> weights;
    switch (mech) {
      case kMechG:
        weights = FunctionalLinRegWeights(fold.train_features,
                                          fold.train_labels, d, fold.g_sigma,
                                          fold_seed);
        break;
      case kMechTmdp:
        weights = FunctionalLinRegWeights(fold.train_features,
                                          fold.train_labels, d,
                                          fold.tmdp_sigma, fold_seed);
        break;
      case kMechNonThreshold:
        weights = FunctionalLinRegWeights(fold.train_features,
                                          fold.train_labels, d,
                                          fold.non_threshold_sigma, fold_seed);
        break;
      case kMechMin:
        weights = FunctionalLinRegWeights(fold.train_features,
                                          fold.train_labels, d,
                                          fold.min_sigma, fold_seed);
        break;
      case kMechSample: {
        SplitMix64 rng(DeriveSeed(fold_seed, /*a=*/1));
        std::vector<double> kept_features;
        std::vector<double> kept_labels;
        for (size_t row = 0; row < fold.train_ids.size(); ++row) {
          const int id = fold.train_ids[row];
          const double p = SampleKeepProbability(
              setup.pop.budgets[id].epsilon, fold.eps_threshold);
          if (rng.NextBernoulli(p)) {
            for (int k = 0; k < d; ++k) {
              kept_features.push_back(fold.train_features[row * d + k]);
            }
            kept_labels.push_back(fold.train_labels[row]);
          }
        }
        if (kept_labels.empty()) {
          weights.assign(d, 0.0);  // nothing survived the subsampling
        } else {
          weights = FunctionalLinRegWeights(kept_features, kept_labels, d,
                                            fold.sample_sigma, fold_seed);
        }
        break;
      }
      case kMechNonPrivate:
        weights = FunctionalLinRegWeights(fold.train_features,
                                          fold.train_labels, d, 0.0,
                                          fold_seed);
        break;
      default:
        throw std::logic_error("mechanism not defined for regression");
    }
    for (int id : fold.test_ids) {
      double prediction = 0.0;
      for (int k = 0; k < d; ++k) {
        prediction +=
            weights[k] * setup.pop.features[static_cast<size_t>(id) * d + k];
      }
      errors.push_back(prediction - setup.pop.labels[id]);
    }
  }
  return RmseOfErrors(errors);
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config, int threads) {
  config.Validate();
  if (threads < 1) threads = 1;
  const std::vector<MechanismPlan> plans = MechanismsFor(config);
  const int reps = config.repetitions;

  const bool is_count = config.query == QueryKind::kCount;
  CountSetup count_setup;
  RegressionSetup reg_setup;
  if (is_count) {
    count_setup = PrepareCount(config);
  } else {
    reg_setup = PrepareRegression(config);
  }

  // cell value: count -> estimate; regression -> per-repetition RMSE
  std::vector<std::vector<double>> cells(plans.size(),
                                         std::vector<double>(reps));
  std::atomic<size_t> cursor{0};
  const size_t total_cells = plans.size() * static_cast<size_t>(reps);
  auto worker = [&]() {
    for (;;) {
      const size_t at = cursor.fetch_add(1);
      if (at >= total_cells) return;
      const size_t m = at / reps;
      const int rep = static_cast<int>(at % reps);
      cells[m][rep] =
          is_count
              ? CountEstimate(count_setup, config, plans[m].id, rep)
              : RegressionRmse(reg_setup, config, plans[m].id, rep);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  ExperimentResult result;
  result.rows.reserve(total_cells + plans.size());
  for (size_t m = 0; m < plans.size(); ++m) {
    for (int rep = 0; rep < reps; ++rep) {
      ResultRow row;
      row.mechanism = plans[m].name;
      row.repetition = rep;
      if (is_count) {
        row.truth = count_setup.truth;
        row.estimate = cells[m][rep];
        row.error = cells[m][rep] - count_setup.truth;
      } else {
        row.rmse = cells[m][rep];
      }
      result.rows.push_back(std::move(row));
    }
    ResultRow summary;
    summary.mechanism = plans[m].name;
    summary.repetition = -1;
    if (is_count) {
      summary.truth = count_setup.truth;
      summary.rmse = EvaluateRmse(cells[m], count_setup.truth);
    } else {
      double mean = 0.0;
      for (double v : cells[m]) mean += v;
      summary.rmse = mean / reps;
    }
    result.rows.push_back(std::move(summary));
  }
  return result;
}

void WriteExperimentCsv(const ExperimentResult& result, QueryKind query,
                        std::ostream& out) {
  out << "schema,query,mechanism,repetition,truth,estimate,error,rmse\n";
  const char* query_name =
      query == QueryKind::kCount ? "count" : "linreg";
  auto cell = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  for (const ResultRow& row : result.rows) {
    out << "tpmdp.experiment.v1," << query_name << ',' << row.mechanism << ','
        << (row.repetition == -1 ? std::string("summary")
                                 : std::to_string(row.repetition))
        << ',' << cell(row.truth) << ',' << cell(row.estimate) << ','
        << cell(row.error) << ',' << cell(row.rmse) << '\n';
  }
}

}  // namespace tpmdp
