//
// Copyright 2026 The DPSyn Authors
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

#ifndef DPSYN_RANDOM_H_
#define DPSYN_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace dpsyn {

// Seeded generator with platform-independent derived distributions.
// std::mt19937_64 is fully specified by the standard, but the std::*
// distributions are not, so every draw used by the library goes through the
// methods below to keep outputs byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double UniformDouble();

  // Uniform in (0, 1).
  double UniformOpenDouble();

  // Uniform integer in [0, bound). `bound` must be positive.
  uint64_t UniformInt(uint64_t bound);

  bool Bernoulli(double p) { return UniformDouble() < p; }

  // Laplace(0, scale) by inverse CDF.
  double Laplace(double scale);

  // N(0, stddev^2) by the Box-Muller transform.
  double Gaussian(double stddev);

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    Shuffle(std::span<T>(items));
  }

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit hash (FNV-1a followed by a splitmix64 finalizer).
uint64_t StableHash(std::string_view text);

// Derives an independent sub-seed from a run seed, a stage label and an
// optional attribute set. Depends only on the arguments, never on process
// state, so stage seeds are reproducible across platforms.
uint64_t DeriveSeed(uint64_t seed, std::string_view stage,
                    std::span<const int> attrs = {});

// Largest-remainder apportionment of `total` units proportionally to
// `weights` (non-negative, not all zero unless total == 0). Ties in the
// fractional parts go to the lower index. The result sums to `total` exactly.
std::vector<int64_t> LargestRemainder(std::span<const double> weights,
                                      int64_t total);

}  // namespace dpsyn

#endif  // DPSYN_RANDOM_H_
