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

#include "tpmdp/lp_oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace tpmdp {

namespace {

constexpr double kCertTol = 1e-8;

// Dense tableau simplex for: maximize c.x subject to A x <= b, x >= 0,
// following the classic KACTL formulation with (value, label) pivoting to
// avoid cycling. Inputs are expected pre-scaled to O(1) magnitudes.
class DenseSimplex {
 public:
  DenseSimplex(const std::vector<std::vector<double>>& a,
               const std::vector<double>& b, const std::vector<double>& c)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        nonbasic_(n_ + 1),
        basic_(m_),
        tableau_(m_ + 2, std::vector<double>(n_ + 2)) {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) tableau_[i][j] = a[i][j];
      basic_[i] = n_ + i;
      tableau_[i][n_] = -1.0;
      tableau_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      tableau_[m_][j] = -c[j];
    }
    nonbasic_[n_] = -1;
    tableau_[m_ + 1][n_] = 1.0;
  }

  // Returns false when unbounded (cannot happen for our bounded programs).
  bool Solve(std::vector<double>* x, double* objective) {
    int r = 0;
    for (int i = 1; i < m_; ++i) {
      if (tableau_[i][n_ + 1] < tableau_[r][n_ + 1]) r = i;
    }
    if (tableau_[r][n_ + 1] < -kEps) {
      Pivot(r, n_);
      if (!RunPhase(2) || tableau_[m_ + 1][n_ + 1] < -kEps) {
        return false;  // infeasible; never expected here
      }
      for (int i = 0; i < m_; ++i) {
        if (basic_[i] == -1) {
          int s = 0;
          for (int j = 1; j <= n_; ++j) {
            if (Rank(tableau_[i][j], nonbasic_[j]) <
                Rank(tableau_[i][s], nonbasic_[s])) {
              s = j;
            }
          }
          Pivot(i, s);
        }
      }
    }
    const bool bounded = RunPhase(1);
    x->assign(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] < n_) (*x)[basic_[i]] = tableau_[i][n_ + 1];
    }
    *objective = tableau_[m_][n_ + 1];
    return bounded;
  }

 private:
  static constexpr double kEps = 1e-9;

  static std::pair<double, int> Rank(double value, int label) {
    return {value, label};
  }

  void Pivot(int r, int s) {
    std::vector<double>& row = tableau_[r];
    const double inv = 1.0 / row[s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i != r && std::abs(tableau_[i][s]) > kEps) {
        std::vector<double>& other = tableau_[i];
        const double factor = other[s] * inv;
        for (int j = 0; j < n_ + 2; ++j) other[j] -= row[j] * factor;
        other[s] = row[s] * factor;
      }
    }
    for (int j = 0; j < n_ + 2; ++j) {
      if (j != s) row[j] *= inv;
    }
    for (int i = 0; i < m_ + 2; ++i) {
      if (i != r) tableau_[i][s] *= -inv;
    }
    row[s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  bool RunPhase(int phase) {
    const int obj_row = m_ + phase - 1;
    long pivots = 0;
    const long pivot_cap = 4096L * (m_ + n_ + 16);
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == -phase) continue;
        if (s == -1 || Rank(tableau_[obj_row][j], nonbasic_[j]) <
                           Rank(tableau_[obj_row][s], nonbasic_[s])) {
          s = j;
        }
      }
      if (tableau_[obj_row][s] >= -kEps) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (tableau_[i][s] <= kEps) continue;
        if (r == -1 ||
            Rank(tableau_[i][n_ + 1] / tableau_[i][s], basic_[i]) <
                Rank(tableau_[r][n_ + 1] / tableau_[r][s], basic_[r])) {
          r = i;
        }
      }
      if (r == -1) return false;
      Pivot(r, s);
      if (++pivots > pivot_cap) {
        throw std::runtime_error("simplex exceeded pivot budget");
      }
    }
  }

  int m_, n_;
  std::vector<int> nonbasic_, basic_;
  std::vector<std::vector<double>> tableau_;
};

double Choose(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  k = std::min(k, n - k);
  long double result = 1.0L;  // 64-bit mantissa keeps values < 2^53 exact
  for (int i = 1; i <= k; ++i) {
    result *= static_cast<long double>(n - k + i);
    result /= static_cast<long double>(i);
    if (!std::isfinite(static_cast<double>(result))) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return result > 9007199254740992.0L  // 2^53: past exact integer range
             ? std::numeric_limits<double>::infinity()
             : static_cast<double>(std::round(result));
}

double LogChoose(int n, int k) {
  if (k < 0 || k > n || n < 0) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::vector<ConstraintRow> EnumerateConstraints(const ThresholdInstance& inst) {
  inst.Validate();
  const int n = inst.n;
  const int t = inst.t;
  if (n > 22) {
    throw std::invalid_argument("constraint enumeration capped at n <= 22");
  }
  std::vector<ConstraintRow> rows;
  if (t == 0 || inst.ActiveCount() == 0) return rows;

  const uint32_t full = (uint32_t{1} << n) - 1;  // n <= 22
  uint32_t active_mask = 0;
  for (int i = 0; i < n; ++i) {
    if (inst.active[i]) active_mask |= uint32_t{1} << i;
  }

  for (int j = 0; j < n; ++j) {
    std::vector<int> others;
    others.reserve(n - 1);
    for (int i = 0; i < n; ++i) {
      if (i != j) others.push_back(i);
    }
    const double rhs = inst.required_sigma[j] * inst.required_sigma[j];
    // Walk all t-subsets of the other parties in lexicographic order.
    std::vector<int> pick(t);
    for (int i = 0; i < t; ++i) pick[i] = i;
    while (true) {
      uint32_t coalition = 0;
      for (int i = 0; i < t; ++i) coalition |= uint32_t{1} << others[pick[i]];
      if ((coalition & active_mask) != 0) {
        rows.push_back(ConstraintRow{full & ~coalition, rhs});
      }
      int move = t - 1;
      while (move >= 0 && pick[move] == n - 2 - (t - 1 - move)) --move;
      if (move < 0) break;
      ++pick[move];
      for (int i = move + 1; i < t; ++i) pick[i] = pick[i - 1] + 1;
    }
  }
  return rows;
}

Allocation SolveExact(std::span<const ConstraintRow> rows, int n, bool dedup) {
  if (n <= 0 || n > 12) {
    throw std::invalid_argument("exact LP solve capped at n <= 12");
  }
  Allocation result;
  result.variances.assign(n, 0.0);
  result.total = 0.0;
  if (rows.empty()) return result;

  std::vector<ConstraintRow> work;
  if (dedup) {
    std::map<uint32_t, double> best;
    for (const ConstraintRow& row : rows) {
      auto [it, inserted] = best.emplace(row.included_mask, row.rhs);
      if (!inserted) it->second = std::max(it->second, row.rhs);
    }
    work.reserve(best.size());
    for (const auto& [mask, rhs] : best) work.push_back({mask, rhs});
  } else {
    work.assign(rows.begin(), rows.end());
  }

  double scale = 0.0;
  for (const ConstraintRow& row : work) scale = std::max(scale, row.rhs);
  if (scale <= 0.0) return result;  // all requirements zero

  const int m = static_cast<int>(work.size());

  // Primal: maximize -sum(v) subject to -(mask . v) <= -rhs.
  std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
  std::vector<double> b(m);
  std::vector<double> c(n, -1.0);
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i < n; ++i) {
      if (work[r].included_mask & (uint32_t{1} << i)) a[r][i] = -1.0;
    }
    b[r] = -work[r].rhs / scale;
  }
  std::vector<double> v;
  double neg_total = 0.0;
  if (!DenseSimplex(a, b, c).Solve(&v, &neg_total)) {
    throw std::runtime_error("lp oracle: primal reported infeasible/unbounded");
  }
  const double primal = -neg_total;

  // Dual: maximize rhs.y subject to, per party i, sum of y over the rows
  // containing i at most 1.
  std::vector<std::vector<double>> da(n, std::vector<double>(m, 0.0));
  std::vector<double> db(n, 1.0);
  std::vector<double> dc(m);
  for (int r = 0; r < m; ++r) {
    dc[r] = work[r].rhs / scale;
    for (int i = 0; i < n; ++i) {
      if (work[r].included_mask & (uint32_t{1} << i)) da[i][r] = 1.0;
    }
  }
  std::vector<double> y;
  double dual = 0.0;
  if (!DenseSimplex(da, db, dc).Solve(&y, &dual)) {
    throw std::runtime_error("lp oracle: dual reported infeasible/unbounded");
  }

  // Certify: feasibility, strong duality, complementary slackness.
  if (std::abs(primal - dual) > kCertTol * std::max(1.0, std::abs(primal))) {
    throw std::runtime_error("lp oracle: duality gap exceeds tolerance");
  }
  for (int r = 0; r < m; ++r) {
    if (y[r] < -kCertTol) {
      throw std::runtime_error("lp oracle: negative dual multiplier");
    }
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      if (work[r].included_mask & (uint32_t{1} << i)) mass += v[i];
    }
    const double slack = mass - work[r].rhs / scale;
    if (slack < -kCertTol) {
      throw std::runtime_error("lp oracle: primal constraint violated");
    }
    if (y[r] > kCertTol && std::abs(slack) * y[r] > kCertTol) {
      throw std::runtime_error("lp oracle: complementary slackness violated");
    }
  }
  for (int i = 0; i < n; ++i) {
    double dual_mass = 0.0;
    for (int r = 0; r < m; ++r) {
      if (work[r].included_mask & (uint32_t{1} << i)) dual_mass += y[r];
    }
    if (dual_mass > 1.0 + kCertTol) {
      throw std::runtime_error("lp oracle: dual constraint violated");
    }
    if (v[i] > kCertTol && (1.0 - dual_mass) * v[i] > kCertTol) {
      throw std::runtime_error("lp oracle: complementary slackness violated");
    }
  }

  for (int i = 0; i < n; ++i) {
    result.variances[i] = std::max(0.0, v[i]) * scale;
  }
  double total = 0.0;
  for (double value : result.variances) total += value;
  result.total = total;
  return result;
}

double ConstraintCensus(int n, int t, int active_size) {
  if (n <= 0 || t < 0 || active_size < 0 || active_size > n) {
    throw std::invalid_argument("bad census arguments");
  }
  if (t == 0 || active_size == 0) return 0.0;
  const int k = active_size;
  const double all = static_cast<double>(n) * Choose(n - 1, t);
  const double skipped_active = static_cast<double>(k) * Choose(n - k, t);
  const double skipped_inactive =
      static_cast<double>(n - k) * Choose(n - 1 - k, t);
  const double census = all - skipped_active - skipped_inactive;
  return std::isfinite(census) ? census
                               : std::numeric_limits<double>::infinity();
}

double ConstraintCensusLog2(int n, int t, int active_size) {
  const double exact = ConstraintCensus(n, t, active_size);
  if (std::isfinite(exact)) {
    return exact > 0.0 ? std::log2(exact)
                       : -std::numeric_limits<double>::infinity();
  }
  // Dominant term in log space; the subtracted terms are negligible at the
  // scales where the exact value overflows.
  return (std::log(n) + LogChoose(n - 1, t)) / std::log(2.0);
}

}  // namespace tpmdp
