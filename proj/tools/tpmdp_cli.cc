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

// Command-line front-end: noise allocation, oracle verification, scaling
// benchmarks, utility-loss experiments, and budget composition.
//
// Exit codes: 0 success, 1 verification or feasibility failure, 2 bad input.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpmdp/allocator.h"
#include "tpmdp/calibration.h"
#include "tpmdp/composition.h"
#include "tpmdp/csv.h"
#include "tpmdp/experiment.h"
#include "tpmdp/lp_oracle.h"
#include "tpmdp/rng.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitInputError = 2;

struct GlobalOptions {
  uint64_t seed = 1;
  std::string out;
  std::string config;
  int threads = 1;
};

std::ostream& OpenOutput(const GlobalOptions& global, std::ofstream& file) {
  if (global.out.empty()) return std::cout;
  file.open(global.out, std::ios::binary);
  if (!file) throw std::invalid_argument("cannot open output: " + global.out);
  return file;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Instance inputs come either from a JSON file ({"n":..,"t":..,"active":..,
// "sigma": [..]}) or from the inline --n/--t/--sigma/--active flags.
// Party indices are 1-based on the CLI surface.
struct InstanceOptions {
  std::string file;
  int n = 0;
  double t = -1.0;
  std::vector<double> sigma;
  std::string active = "all";
};

int ResolveThreshold(double t, int n) {
  double value = t;
  if (value > 0.0 && value < 1.0) value = std::floor(value * n);
  if (value != std::floor(value) || value < 0 || value > n - 1) {
    throw std::invalid_argument("t must resolve to an integer in [0, n-1]");
  }
  return static_cast<int>(value);
}

std::vector<uint8_t> ParseActiveSpec(const std::string& spec, int n,
                                     uint64_t seed) {
  std::vector<uint8_t> mask(n, 0);
  if (spec == "all") {
    std::fill(mask.begin(), mask.end(), 1);
    return mask;
  }
  if (spec.rfind("random:", 0) == 0) {
    const int k = std::stoi(spec.substr(7));
    if (k < 0 || k > n) throw std::invalid_argument("random:k needs k in [0, n]");
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    tpmdp::SplitMix64 rng(tpmdp::DeriveSeed(seed, 6));
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.Next() % static_cast<uint64_t>(i + 1));
      std::swap(ids[i], ids[j]);
    }
    for (int i = 0; i < k; ++i) mask[ids[i]] = 1;
    return mask;
  }
  std::stringstream stream(spec);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const int party = std::stoi(token);
    if (party < 1 || party > n) {
      throw std::invalid_argument("active party index out of range: " + token);
    }
    mask[party - 1] = 1;
  }
  return mask;
}

tpmdp::ThresholdInstance LoadInstance(const InstanceOptions& options,
                                      uint64_t seed) {
  tpmdp::ThresholdInstance inst;
  if (!options.file.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(ReadFile(options.file));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("bad instance JSON: ") + e.what());
    }
    for (const auto& [key, value] : doc.items()) {
      if (key != "n" && key != "t" && key != "active" && key != "sigma") {
        throw std::invalid_argument("unknown instance key: " + key);
      }
    }
    inst.n = doc.at("n").get<int>();
    inst.t = ResolveThreshold(doc.at("t").get<double>(), inst.n);
    inst.required_sigma = doc.at("sigma").get<std::vector<double>>();
    if (doc.contains("active")) {
      if (doc["active"].is_string()) {
        inst.active = ParseActiveSpec(doc["active"].get<std::string>(), inst.n,
                                      seed);
      } else {
        inst.active.assign(inst.n, 0);
        for (int party : doc["active"].get<std::vector<int>>()) {
          if (party < 1 || party > inst.n) {
            throw std::invalid_argument("active party index out of range");
          }
          inst.active[party - 1] = 1;
        }
      }
    } else {
      inst.active.assign(inst.n, 1);
    }
  } else {
    if (options.n <= 0 || options.sigma.empty()) {
      throw std::invalid_argument(
          "need --config or the inline --n/--t/--sigma flags");
    }
    inst.n = options.n;
    inst.t = ResolveThreshold(options.t, inst.n);
    inst.required_sigma = options.sigma;
    inst.active = ParseActiveSpec(options.active, inst.n, seed);
  }
  inst.Validate();
  return inst;
}

int CmdAllocate(const GlobalOptions& global, const InstanceOptions& options) {
  const tpmdp::ThresholdInstance inst = LoadInstance(options, global.seed);
  const tpmdp::SubcaseInfo info = tpmdp::AnalyzeSubcase(inst);
  const tpmdp::Allocation alloc = tpmdp::Allocate(inst);
  const tpmdp::FeasibilityReport feasibility =
      tpmdp::CheckFeasibility(inst, alloc);
  const double closed_form = tpmdp::OptimalTotalVariance(inst);

  std::ofstream file;
  std::ostream& out = OpenOutput(global, file);
  out << "schema,party,active,required_sigma,variance\n";
  for (int i = 0; i < inst.n; ++i) {
    out << "tpmdp.allocation.v1," << (i + 1) << ','
        << (inst.active[i] ? 1 : 0) << ','
        << tpmdp::FormatDouble(inst.required_sigma[i]) << ','
        << tpmdp::FormatDouble(alloc.variances[i]) << '\n';
  }
  out << "# subcase=" << tpmdp::SubcaseName(info.tag)
      << " total=" << tpmdp::FormatDouble(alloc.total)
      << " closed_form=" << tpmdp::FormatDouble(closed_form)
      << " feasible=" << (feasibility.feasible ? "yes" : "no") << '\n';
  return feasibility.feasible ? kExitOk : kExitVerificationFailure;
}

int CmdVerify(const GlobalOptions& global, const InstanceOptions& options,
              int max_n, double scale_alloc) {
  const tpmdp::ThresholdInstance inst = LoadInstance(options, global.seed);
  if (inst.n > max_n) {
    throw std::invalid_argument("instance exceeds --max-n (oracle blow-up)");
  }
  tpmdp::Allocation alloc = tpmdp::Allocate(inst);
  for (double& v : alloc.variances) v *= scale_alloc;
  alloc.total *= scale_alloc;

  const auto rows = tpmdp::EnumerateConstraints(inst);
  const tpmdp::Allocation reference = tpmdp::SolveExact(rows, inst.n);
  const double gap = std::abs(alloc.total - reference.total) /
                     std::max(1.0, reference.total);
  const tpmdp::FeasibilityReport feasibility =
      tpmdp::CheckFeasibility(inst, alloc);

  std::ofstream file;
  std::ostream& out = OpenOutput(global, file);
  out << "allocator_total=" << tpmdp::FormatDouble(alloc.total)
      << " oracle_total=" << tpmdp::FormatDouble(reference.total)
      << " relative_gap=" << tpmdp::FormatDouble(gap)
      << " constraints=" << rows.size()
      << " feasible=" << (feasibility.feasible ? "yes" : "no") << '\n';
  if (!feasibility.feasible) {
    out << "worst_party=" << (feasibility.worst_party + 1)
        << " covered=" << tpmdp::FormatDouble(feasibility.worst_covered)
        << " required=" << tpmdp::FormatDouble(feasibility.worst_required)
        << '\n';
  }
  return (gap <= 1e-6 && feasibility.feasible) ? kExitOk
                                               : kExitVerificationFailure;
}

int CmdBench(const GlobalOptions& global, const std::vector<int64_t>& sizes,
             const std::string& t_rule, int reps) {
  std::ofstream file;
  std::ostream& out = OpenOutput(global, file);
  out << "schema,n,t,alloc_ns,census\n";
  for (int64_t n64 : sizes) {
    const int n = static_cast<int>(n64);
    int t;
    if (t_rule == "half") {
      t = n / 2;
    } else if (t_rule.rfind("fixed:", 0) == 0) {
      t = std::stoi(t_rule.substr(6));
    } else {
      throw std::invalid_argument("--t-rule must be half or fixed:<k>");
    }
    if (t < 0 || t > n - 1) throw std::invalid_argument("bench t out of range");

    tpmdp::ThresholdInstance inst;
    inst.n = n;
    inst.t = t;
    inst.active.assign(n, 1);
    inst.required_sigma.resize(n);
    tpmdp::SplitMix64 rng(tpmdp::DeriveSeed(global.seed, 8, n));
    for (int i = 0; i < n; ++i) {
      inst.required_sigma[i] = rng.NextUniform(0.5, 2.0);
    }

    std::vector<int64_t> samples(reps);
    double sink = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const tpmdp::Allocation alloc = tpmdp::Allocate(inst);
      const auto stop = std::chrono::steady_clock::now();
      sink += alloc.total;
      samples[r] = std::chrono::duration_cast<std::chrono::nanoseconds>(
                       stop - start)
                       .count();
    }
    std::sort(samples.begin(), samples.end());
    const int64_t median = samples[reps / 2];
    const double census = tpmdp::ConstraintCensus(n, t, n);
    out << "tpmdp.bench.v1," << n << ',' << t << ',' << median << ','
        << tpmdp::FormatDouble(census) << '\n';
    if (sink < 0) out << "";  // keep the allocation from being optimized out
  }
  return kExitOk;
}

int CmdExperiment(const GlobalOptions& global, bool seed_given) {
  if (global.config.empty()) {
    throw std::invalid_argument("experiment requires --config <json>");
  }
  tpmdp::ExperimentConfig config =
      tpmdp::ParseExperimentConfig(ReadFile(global.config));
  if (seed_given) config.seed = global.seed;
  if (!global.out.empty()) config.out = global.out;
  const tpmdp::ExperimentResult result =
      tpmdp::RunExperiment(config, global.threads);
  if (config.out.empty()) {
    tpmdp::WriteExperimentCsv(result, config.query, std::cout);
  } else {
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
      throw std::invalid_argument("cannot open output: " + config.out);
    }
    tpmdp::WriteExperimentCsv(result, config.query, file);
  }
  return kExitOk;
}

// Budget tables are CSV with a header "mechanism,party,epsilon,delta";
// mechanism and party indices are 1-based and must form a full grid.
tpmdp::CompositionRequest ReadBudgetTable(const std::string& path,
                                          const std::string& mode,
                                          double delta_prime) {
  std::istringstream in(ReadFile(path));
  std::string line;
  if (!std::getline(in, line) ||
      line != "mechanism,party,epsilon,delta") {
    throw std::invalid_argument(
        "budget table must start with header mechanism,party,epsilon,delta");
  }
  int max_mechanism = 0;
  int max_party = 0;
  struct Entry {
    int mechanism;
    int party;
    tpmdp::PrivacyBudget budget;
  };
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    Entry entry;
    std::getline(row, cell, ',');
    entry.mechanism = std::stoi(cell);
    std::getline(row, cell, ',');
    entry.party = std::stoi(cell);
    std::getline(row, cell, ',');
    entry.budget.epsilon = std::stod(cell);
    std::getline(row, cell, ',');
    entry.budget.delta = std::stod(cell);
    if (entry.mechanism < 1 || entry.party < 1) {
      throw std::invalid_argument("mechanism/party indices are 1-based");
    }
    max_mechanism = std::max(max_mechanism, entry.mechanism);
    max_party = std::max(max_party, entry.party);
    entries.push_back(entry);
  }
  if (entries.empty()) throw std::invalid_argument("budget table is empty");
  if (entries.size() !=
      static_cast<size_t>(max_mechanism) * static_cast<size_t>(max_party)) {
    throw std::invalid_argument("budget table must be a full grid");
  }
  tpmdp::CompositionRequest request;
  request.per_mechanism_budgets.assign(
      max_mechanism, std::vector<tpmdp::PrivacyBudget>(max_party));
  for (const Entry& entry : entries) {
    request.per_mechanism_budgets[entry.mechanism - 1][entry.party - 1] =
        entry.budget;
  }
  if (mode == "basic") {
    request.mode = tpmdp::CompositionMode::kBasic;
  } else if (mode == "advanced") {
    request.mode = tpmdp::CompositionMode::kAdvanced;
    request.delta_prime = {delta_prime};
  } else {
    throw std::invalid_argument("--mode must be basic or advanced");
  }
  return request;
}

int CmdCompose(const GlobalOptions& global, const std::string& budgets_path,
               const std::string& mode, double delta_prime) {
  const tpmdp::CompositionRequest request =
      ReadBudgetTable(budgets_path, mode, delta_prime);
  const std::vector<tpmdp::PrivacyBudget> combined = tpmdp::Compose(request);
  std::ofstream file;
  std::ostream& out = OpenOutput(global, file);
  out << "schema,party,epsilon,delta\n";
  for (size_t i = 0; i < combined.size(); ++i) {
    out << "tpmdp.compose.v1," << (i + 1) << ','
        << tpmdp::FormatDouble(combined[i].epsilon) << ','
        << tpmdp::FormatDouble(combined[i].delta) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise allocation and experiments for threshold personalized "
               "multi-party differential privacy"};
  app.require_subcommand(1);

  GlobalOptions global;
  bool seed_given = false;
  app.add_option("--seed", global.seed, "Master RNG seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", global.out, "Output path (default: stdout)");
  app.add_option("--config", global.config, "Config / instance file");
  app.add_option("--threads", global.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  InstanceOptions instance;
  auto add_instance_flags = [&](CLI::App* cmd) {
    cmd->add_option("--n", instance.n, "Party count (inline instance)");
    cmd->add_option("--t", instance.t,
                    "Threshold; integer, or fraction of n in (0,1)");
    cmd->add_option("--sigma", instance.sigma,
                    "Comma-separated required sigmas")
        ->delimiter(',');
    cmd->add_option("--active", instance.active,
                    "all | random:<k> | comma-separated 1-based parties");
  };

  CLI::App* allocate = app.add_subcommand("allocate", "Solve one instance");
  allocate->fallthrough();
  add_instance_flags(allocate);

  CLI::App* verify =
      app.add_subcommand("verify", "Cross-check against the exact LP oracle");
  verify->fallthrough();
  add_instance_flags(verify);
  int max_n = 8;
  double scale_alloc = 1.0;
  verify->add_option("--max-n", max_n, "Oracle size cap");
  verify->add_option("--scale-alloc", scale_alloc,
                     "Scale the allocation before checking (test hook)");

  CLI::App* bench = app.add_subcommand("bench", "Measure allocation scaling");
  bench->fallthrough();
  std::vector<int64_t> sizes = {10000, 100000, 1000000};
  std::string t_rule = "half";
  int bench_reps = 7;
  bench->add_option("--sizes", sizes, "Party counts to sweep")->delimiter(',');
  bench->add_option("--t-rule", t_rule, "half | fixed:<k>");
  bench->add_option("--reps", bench_reps, "Samples per size")
      ->check(CLI::PositiveNumber);

  CLI::App* experiment =
      app.add_subcommand("experiment", "Run the utility-loss experiment");
  experiment->fallthrough();

  CLI::App* compose = app.add_subcommand("compose", "Compose budget tables");
  compose->fallthrough();
  std::string budgets_path;
  std::string mode = "basic";
  double delta_prime = 1e-9;
  compose->add_option("--budgets", budgets_path, "Budget table CSV")
      ->required();
  compose->add_option("--mode", mode, "basic | advanced");
  compose->add_option("--delta-prime", delta_prime,
                      "Slack delta' for advanced mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (allocate->parsed()) {
      if (!global.config.empty()) instance.file = global.config;
      return CmdAllocate(global, instance);
    }
    if (verify->parsed()) {
      if (!global.config.empty()) instance.file = global.config;
      return CmdVerify(global, instance, max_n, scale_alloc);
    }
    if (bench->parsed()) return CmdBench(global, sizes, t_rule, bench_reps);
    if (experiment->parsed()) return CmdExperiment(global, seed_given);
    if (compose->parsed()) {
      return CmdCompose(global, budgets_path, mode, delta_prime);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerificationFailure;
  }
  return kExitInputError;
}
