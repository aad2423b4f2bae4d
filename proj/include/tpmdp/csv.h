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

#ifndef TPMDP_CSV_H_
#define TPMDP_CSV_H_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace tpmdp {

// Shortest representation that round-trips a double exactly; integers are
// written without an exponent.
inline std::string FormatDouble(double value) {
  char buf[64];
  if (std::isfinite(value) && value == std::floor(value) &&
      std::abs(value) < 9007199254740992.0) {  // 2^53
    std::snprintf(buf, sizeof(buf), "%lld",
                  static_cast<long long>(value));
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  double parsed = 0.0;
  for (int precision = 1; precision < 17; ++precision) {
    char candidate[64];
    std::snprintf(candidate, sizeof(candidate), "%.*g", precision, value);
    std::sscanf(candidate, "%lg", &parsed);
    if (parsed == value) return candidate;
  }
  return buf;
}

}  // namespace tpmdp

#endif  // TPMDP_CSV_H_
