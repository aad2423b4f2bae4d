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
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tpmdp {

namespace {

// Compensated (Kahan) summation; allocation totals are compared at 1e-9
// relative even for n = 1e6 parties.
double KahanSum(const std::vector<double>& values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

Allocation FinishAllocation(std::vector<double> variances) {
  Allocation result;
  result.total = KahanSum(variances);
  result.variances = std::move(variances);
  return result;
}

// Core of the all-active solver, independent of the instance wrapper so the
// single-active case can recurse on the inactive parties.
std::vector<double> AllActiveVariances(int n, int t,
                                       const std::vector<double>& sigma) {
  const int cut = UniformCutIndex(n, t);

  // cut-th largest requirement via linear-time selection; no sort.
  std::vector<double> work(sigma);
  std::nth_element(work.begin(), work.begin() + (cut - 1), work.end(),
                   std::greater<double>());
  const double pivot = work[cut - 1];
  const double pivot_sq = pivot * pivot;

  const double share = pivot_sq / (n - t);
  const double rebate = pivot_sq * (n - t - 1) / (n - t);
  std::vector<double> variances(n);
  for (int i = 0; i < n; ++i) {
    const double s = sigma[i];
    variances[i] = (s <= pivot) ? share : s * s - rebate;
  }
  return variances;
}

struct TopTwo {
  double first = 0.0;   // largest value (0 if none)
  double second = 0.0;  // second largest (0 if fewer than two)
  int first_index = -1;
  int count = 0;

  void Feed(double value, int index) {
    ++count;
    if (value > first || count == 1) {
      second = (count == 1) ? 0.0 : first;
      first = value;
      first_index = index;
    } else if (value > second || count == 2) {
      second = value;
    }
  }
};

}  // namespace

int ThresholdInstance::ActiveCount() const {
  return static_cast<int>(std::count(active.begin(), active.end(), uint8_t{1}));
}

void ThresholdInstance::Validate() const {
  if (n <= 0) throw std::invalid_argument("party count must be positive");
  if (t < 0 || t > n - 1) {
    throw std::invalid_argument("threshold must be in [0, n-1]");
  }
  if (static_cast<int>(active.size()) != n ||
      static_cast<int>(required_sigma.size()) != n) {
    throw std::invalid_argument("active/required_sigma must have length n");
  }
  for (double s : required_sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("required sigma must be finite nonnegative");
    }
  }
}

ThresholdInstance MakeInstance(int n, int t,
                               const std::vector<int>& active_indices,
                               std::vector<double> required_sigma) {
  ThresholdInstance inst;
  inst.n = n;
  inst.t = t;
  inst.active.assign(std::max(n, 0), 0);
  for (int idx : active_indices) {
    if (idx < 0 || idx >= n) {
      throw std::invalid_argument("active index out of range");
    }
    inst.active[idx] = 1;
  }
  inst.required_sigma = std::move(required_sigma);
  inst.Validate();
  return inst;
}

std::string SubcaseName(Subcase subcase) {
  switch (subcase) {
    case Subcase::kTrivial: return "trivial";
    case Subcase::kLargeActiveSet: return "large-active";
    case Subcase::kSingleActive: return "single-active";
    case Subcase::kCoveringActiveSet: return "covering-active";
    case Subcase::kSparseActiveSet: return "sparse-active";
  }
  return "unknown";
}

Subcase ClassifySubcase(int n, int t, int active_size) {
  if (t == 0 || active_size == 0) return Subcase::kTrivial;
  if (active_size >= n - t + 1) return Subcase::kLargeActiveSet;
  if (active_size == 1) return Subcase::kSingleActive;
  // Here 2 <= active_size <= n - t.
  if (n - t * active_size <= 0) return Subcase::kCoveringActiveSet;
  return Subcase::kSparseActiveSet;
}

SubcaseInfo AnalyzeSubcase(const ThresholdInstance& inst) {
  inst.Validate();
  SubcaseInfo info;
  info.tag = ClassifySubcase(inst.n, inst.t, inst.ActiveCount());
  if (info.tag != Subcase::kSparseActiveSet) return info;

  TopTwo active_top;
  TopTwo inactive_top;
  for (int i = 0; i < inst.n; ++i) {
    if (inst.active[i]) {
      active_top.Feed(inst.required_sigma[i], i);
    } else {
      inactive_top.Feed(inst.required_sigma[i], i);
    }
  }
  info.alpha = std::max(inactive_top.first, active_top.second);
  info.beta = std::max(active_top.first, inactive_top.second);
  info.surplus_branch = inst.t >= 2 && info.alpha > info.beta;
  return info;
}

int UniformCutIndex(int n, int t) {
  if (t < 1 || t > n - 1) {
    throw std::invalid_argument("cut index requires 1 <= t <= n-1");
  }
  return std::min((2 * n - t) / (n - t), t + 1);
}

Allocation AllocateAllActive(const ThresholdInstance& inst) {
  inst.Validate();
  if (inst.ActiveCount() != inst.n) {
    throw std::invalid_argument("AllocateAllActive requires all parties active");
  }
  if (inst.t == 0) {
    return FinishAllocation(std::vector<double>(inst.n, 0.0));
  }
  return FinishAllocation(AllActiveVariances(inst.n, inst.t,
                                             inst.required_sigma));
}

Allocation Allocate(const ThresholdInstance& inst) {
  inst.Validate();
  const int n = inst.n;
  const int t = inst.t;
  const SubcaseInfo info = AnalyzeSubcase(inst);

  switch (info.tag) {
    case Subcase::kTrivial:
      return FinishAllocation(std::vector<double>(n, 0.0));

    case Subcase::kLargeActiveSet:
    case Subcase::kCoveringActiveSet:
      // Restricting coalitions to those meeting the active set changes
      // nothing here; solve against all size-t coalitions.
      return FinishAllocation(AllActiveVariances(n, t, inst.required_sigma));

    case Subcase::kSingleActive: {
      std::vector<double> variances(n, 0.0);
      std::vector<int> inactive_ids;
      std::vector<double> inactive_sigma;
      inactive_ids.reserve(n - 1);
      inactive_sigma.reserve(n - 1);
      for (int i = 0; i < n; ++i) {
        if (!inst.active[i]) {
          inactive_ids.push_back(i);
          inactive_sigma.push_back(inst.required_sigma[i]);
        }
      }
      if (t >= 2) {
        // The sole active party needs no noise; the rest solve the problem
        // with one fewer party and one fewer colluder.
        std::vector<double> sub =
            AllActiveVariances(n - 1, t - 1, inactive_sigma);
        for (size_t k = 0; k < inactive_ids.size(); ++k) {
          variances[inactive_ids[k]] = sub[k];
        }
      } else {  // t == 1
        const double top =
            *std::max_element(inactive_sigma.begin(), inactive_sigma.end());
        const double share = top * top / (n - 1);
        for (int id : inactive_ids) variances[id] = share;
      }
      return FinishAllocation(std::move(variances));
    }

    case Subcase::kSparseActiveSet: {
      const int k = inst.ActiveCount();
      const int spread = n - k - t + 1;  // inactive parties sharing the load
      std::vector<double> variances(n, 0.0);
      if (!info.surplus_branch) {
        const double level_sq = info.alpha * info.alpha;
        const double share = level_sq / spread;
        for (int i = 0; i < n; ++i) {
          if (inst.active[i]) {
            const double s = inst.required_sigma[i];
            variances[i] = std::max(0.0, s * s - level_sq);
          } else {
            variances[i] = share;
          }
        }
      } else {
        // One inactive party carrying the top requirement absorbs the
        // surplus; the remaining inactive parties share beta^2. Ties at the
        // top are impossible here (alpha > beta forces a strict gap), so
        // taking the first attainer is only a floating-point guard.
        const double alpha_sq = info.alpha * info.alpha;
        const double beta_sq = info.beta * info.beta;
        const double share = beta_sq / spread;
        bool surplus_assigned = false;
        for (int i = 0; i < n; ++i) {
          if (inst.active[i]) continue;
          if (!surplus_assigned && inst.required_sigma[i] == info.alpha) {
            variances[i] = alpha_sq - beta_sq * (spread - 1) / spread;
            surplus_assigned = true;
          } else {
            variances[i] = share;
          }
        }
      }
      return FinishAllocation(std::move(variances));
    }
  }
  throw std::logic_error("unreachable subcase");
}

namespace {

// Sum of squares of the (cut-1) largest values plus the closed-form tail
// coefficient times the cut-th largest squared.
double OrderStatisticTotal(std::vector<double> values, int cut,
                           double coefficient) {
  std::nth_element(values.begin(), values.begin() + (cut - 1), values.end(),
                   std::greater<double>());
  const double pivot = values[cut - 1];
  double sum = 0.0;
  double carry = 0.0;
  for (int i = 0; i < cut - 1; ++i) {
    const double y = values[i] * values[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum + (coefficient - cut) * pivot * pivot;
}

}  // namespace

double OptimalTotalVariance(const ThresholdInstance& inst) {
  inst.Validate();
  const int n = inst.n;
  const int t = inst.t;
  const Subcase tag = ClassifySubcase(n, t, inst.ActiveCount());

  switch (tag) {
    case Subcase::kTrivial:
      return 0.0;

    case Subcase::kLargeActiveSet:
    case Subcase::kCoveringActiveSet: {
      const int cut = UniformCutIndex(n, t);
      return OrderStatisticTotal(inst.required_sigma, cut,
                                 static_cast<double>(2 * n - t) / (n - t));
    }

    case Subcase::kSingleActive: {
      std::vector<double> inactive_sigma;
      inactive_sigma.reserve(n - 1);
      for (int i = 0; i < n; ++i) {
        if (!inst.active[i]) inactive_sigma.push_back(inst.required_sigma[i]);
      }
      const int cut = std::min((2 * n - t - 1) / (n - t), t);
      return OrderStatisticTotal(std::move(inactive_sigma), cut,
                                 static_cast<double>(2 * n - t - 1) / (n - t));
    }

    case Subcase::kSparseActiveSet: {
      const int k = inst.ActiveCount();
      TopTwo top;
      for (int i = 0; i < n; ++i) top.Feed(inst.required_sigma[i], i);
      const double spread = n - k - t + 1;
      return top.first * top.first +
             top.second * top.second * (t - 1) / spread;
    }
  }
  throw std::logic_error("unreachable subcase");
}

FeasibilityReport CheckFeasibility(const ThresholdInstance& inst,
                                   const Allocation& allocation,
                                   double slack_tol) {
  inst.Validate();
  const int n = inst.n;
  const int t = inst.t;
  if (static_cast<int>(allocation.variances.size()) != n) {
    throw std::invalid_argument("allocation size must match instance");
  }

  FeasibilityReport report;
  const int active_count = inst.ActiveCount();
  if (t == 0 || active_count == 0) return report;  // no coalition sees output

  const std::vector<double>& var = allocation.variances;
  const double total = KahanSum(var);

  // Parties in descending variance order, with prefix sums and prefix
  // active counts, so each party's binding coalition costs O(1).
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return var[a] > var[b]; });
  std::vector<int> position(n);
  std::vector<double> prefix_sum(n + 1, 0.0);
  std::vector<int> prefix_active(n + 1, 0);
  for (int r = 0; r < n; ++r) {
    const int i = order[r];
    position[i] = r;
    prefix_sum[r + 1] = prefix_sum[r] + var[i];
    prefix_active[r + 1] = prefix_active[r] + (inst.active[i] ? 1 : 0);
  }

  TopTwo active_var;  // largest variances among active parties
  for (int i = 0; i < n; ++i) {
    if (inst.active[i]) active_var.Feed(var[i], i);
  }

  double worst_slack = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const bool j_active = inst.active[j] != 0;
    if (active_count - (j_active ? 1 : 0) == 0) continue;  // vacuous

    // Greedy coalition: the t largest variances among parties other than j.
    double removable;
    int coalition_active;
    if (position[j] < t) {
      removable = prefix_sum[t + 1] - var[j];
      coalition_active = prefix_active[t + 1] - (j_active ? 1 : 0);
    } else {
      removable = prefix_sum[t];
      coalition_active = prefix_active[t];
    }
    if (coalition_active == 0) {
      // Swap the smallest coalition member for the best active party.
      const double top_active =
          (active_var.first_index == j) ? active_var.second : active_var.first;
      const double head = (position[j] < t - 1) ? prefix_sum[t] - var[j]
                                                : prefix_sum[t - 1];
      removable = head + top_active;
    }

    const double covered = total - removable;
    const double required = inst.required_sigma[j] * inst.required_sigma[j];
    const double slack = covered - required;
    if (slack < worst_slack) {
      worst_slack = slack;
      report.worst_party = j;
      report.worst_covered = covered;
      report.worst_required = required;
      report.worst_slack = slack;
    }
    if (slack < -slack_tol * std::max(1.0, required)) {
      report.feasible = false;
    }
  }
  return report;
}

Allocation TmdpBaseline(const ThresholdInstance& inst) {
  inst.Validate();
  ThresholdInstance uniform = inst;
  const double top = inst.required_sigma.empty()
                         ? 0.0
                         : *std::max_element(inst.required_sigma.begin(),
                                             inst.required_sigma.end());
  std::fill(uniform.required_sigma.begin(), uniform.required_sigma.end(), top);
  return Allocate(uniform);
}

Allocation NonThresholdBaseline(const ThresholdInstance& inst) {
  inst.Validate();
  ThresholdInstance worst_case = inst;
  worst_case.t = inst.n - 1;
  return Allocate(worst_case);
}

double CentralizedMinVariance(const ThresholdInstance& inst) {
  inst.Validate();
  const int active_count = inst.ActiveCount();
  if (inst.t == 0 || active_count == 0) return 0.0;
  double top = 0.0;
  for (int j = 0; j < inst.n; ++j) {
    const bool vacuous = active_count == 1 && inst.active[j];
    if (vacuous) continue;
    top = std::max(top, inst.required_sigma[j] * inst.required_sigma[j]);
  }
  return top;
}

}  // namespace tpmdp
