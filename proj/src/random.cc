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

#include "dpsyn/random.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dpsyn {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double Rng::UniformDouble() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::UniformOpenDouble() {
  double u;
  do {
    u = UniformDouble();
  } while (u == 0.0);
  return u;
}

uint64_t Rng::UniformInt(uint64_t bound) {
  assert(bound > 0);
  // Rejection sampling on the top of the range removes modulo bias.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::Laplace(double scale) {
  // u in (-1/2, 1/2), excluding the endpoints so the log stays finite.
  const double u = UniformOpenDouble() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0 ? -magnitude : magnitude;
}

double Rng::Gaussian(double stddev) {
  const double u1 = UniformOpenDouble();
  const double u2 = UniformDouble();
  return stddev * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t StableHash(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(h);
}

uint64_t DeriveSeed(uint64_t seed, std::string_view stage,
                    std::span<const int> attrs) {
  uint64_t h = SplitMix64(seed) ^ StableHash(stage);
  for (int a : attrs) {
    h = SplitMix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(a)));
  }
  return SplitMix64(h);
}

std::vector<int64_t> LargestRemainder(std::span<const double> weights,
                                      int64_t total) {
  std::vector<int64_t> out(weights.size(), 0);
  if (weights.empty() || total <= 0) return out;
  double sum = 0.0;
  for (double w : weights) sum += std::max(0.0, w);
  if (sum <= 0.0) return out;

  std::vector<double> remainder(weights.size());
  int64_t assigned = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double quota =
        std::max(0.0, weights[i]) / sum * static_cast<double>(total);
    out[i] = static_cast<int64_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(out[i]);
    assigned += out[i];
  }
  // Floating error can push the floor sum past `total` by a unit or two.
  while (assigned > total) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  std::vector<size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return (weights[a] > 0.0) > (weights[b] > 0.0);
  });
  for (size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++out[order[i]];
    ++assigned;
  }
  return out;
}

}  // namespace dpsyn
