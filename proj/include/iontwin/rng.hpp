// Copyright 2026 The iontwin Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>

#include "iontwin/constants.hpp"

namespace iontwin {

/// Counter-based random numbers.  A stream is keyed by hashing
/// (seed, a, b, c); draws within the stream advance a splitmix64 state.
/// Identical keys give identical draws under any parallel schedule.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
             std::uint64_t c = 0) {
    state_ = mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1], safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() {
    // Box-Muller; one of the pair is discarded for statelessness.
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * constants::pi * u2);
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  /// Poisson sample.  Knuth's product method for small means, normal
  /// approximation with continuity correction above 60 (never reached by
  /// the fixture models but kept for robustness).
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 60.0) {
      const double limit = std::exp(-mean);
      long k = 0;
      double p = uniform_pos();
      while (p > limit) {
        ++k;
        p *= uniform_pos();
      }
      return k;
    }
    double x = mean + std::sqrt(mean) * normal();
    return x < 0.0 ? 0 : static_cast<long>(std::lround(x));
  }

 private:
  std::uint64_t state_;
};

}  // namespace iontwin
