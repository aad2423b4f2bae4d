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

#ifndef TPMDP_RNG_H_
#define TPMDP_RNG_H_

#include <cmath>
#include <cstdint>

namespace tpmdp {

// SplitMix64 (Steele/Lea/Flood). Used both as the simulation generator and
// to split independent streams from a master seed, so runs are reproducible
// bit-for-bit regardless of thread scheduling.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t Next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double NextUnit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double NextUniform(double lo, double hi) {
    return lo + (hi - lo) * NextUnit();
  }

  bool NextBernoulli(double p) { return NextUnit() < p; }

  // Standard normal via Box-Muller. Draws exactly two words per call, so the
  // stream position never depends on previously returned values.
  double NextGaussian() {
    const double u1 = 1.0 - NextUnit();  // (0, 1]
    const double u2 = NextUnit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double NextGaussian(double stddev) { return stddev * NextGaussian(); }

 private:
  uint64_t state_;
};

namespace internal {
inline uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace internal

// Derives the seed of an independent substream from (master, a, b), e.g.
// (experiment seed, mechanism id, repetition index).
inline uint64_t DeriveSeed(uint64_t master, uint64_t a, uint64_t b = 0) {
  uint64_t h = internal::Mix64(master + 0x9E3779B97F4A7C15ULL);
  h = internal::Mix64(h ^ (a + 0xC2B2AE3D27D4EB4FULL));
  h = internal::Mix64(h ^ (b + 0x165667B19E3779F9ULL));
  return h;
}

}  // namespace tpmdp

#endif  // TPMDP_RNG_H_
