/* Copyright 2026 The pdmr-sim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pdmr/constants.hpp"

namespace pdmr {

// SplitMix64 finalizer. Used to derive independent, schedule-invariant
// sub-streams from (seed, indices): results are identical whether sweep
// points run serially or on a worker pool.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based stream derivation: each (point, segment) pair of an
// experiment owns one generator, seeded from the run seed and the indices.
inline std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(a + 0x1D8AF066B2F01B57ULL));
  h = splitmix64(h ^ splitmix64(b + 0x7E24C8A1935D30A3ULL));
  h = splitmix64(h ^ splitmix64(c + 0x452821E638D01377ULL));
  return std::mt19937_64(h);
}

// Uniform double in (0,1); never returns an exact 0 or 1.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard-normal draw via Box-Muller. Spelled out rather than using
// std::normal_distribution so the byte stream is pinned to this code,
// not to a particular standard-library implementation.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace pdmr
