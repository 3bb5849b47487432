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

#ifndef DPSYN_CONSISTENCY_H_
#define DPSYN_CONSISTENCY_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsyn/marginal.h"

namespace dpsyn {

// An attribute set obtained by intersecting two or more marginal schemas,
// with every marginal whose schema contains it.
struct SharedSet {
  std::vector<int> attrs;  // sorted; may be empty
  std::vector<int> members;

  bool operator==(const SharedSet&) const = default;
};

// All attribute sets that are intersections of >= 2 schemas (the empty set
// included whenever there are >= 2 schemas), ordered so that every subset
// precedes its supersets: by size, then lexicographically.
std::vector<SharedSet> SharedSets(std::span<const MarginalSchema> schemas);

struct ConsistencyReport {
  // Some shared set had a member without noise_std and fell back to equal
  // weights.
  bool equal_weight_fallback = false;
  // Clip/re-average rounds run by NonnegConsistent.
  int nonneg_rounds = 0;
  // Weight of the uniform table mixed in by NonnegConsistent's final step
  // (0 when the rounds alone removed every negative cell).
  double uniform_mix = 0.0;
};

// Makes tables agree on every shared set, processing sets in order. Each
// member's projection is replaced by the inverse-variance weighted average
// (variance of a projected cell = cells collapsed * noise_std^2), and the
// difference is spread uniformly over the cells that collapse into it.
absl::StatusOr<std::vector<MarginalTable>> EnforceConsistency(
    std::vector<MarginalTable> tables, ConsistencyReport* report = nullptr);

// Zeroes negative cells and removes the clipped mass from the positive cells
// in proportion to their size, preserving the total. Fails when the total is
// negative.
absl::Status ClipAndRedistribute(MarginalTable& table);

// Makes consistent tables non-negative while keeping them consistent:
// alternates ClipAndRedistribute with EnforceConsistency (at most 10 rounds,
// stopping once the largest change drops below 1e-6), then mixes in the
// smallest multiple of the uniform table that removes any negatives left.
absl::StatusOr<std::vector<MarginalTable>> NonnegConsistent(
    std::vector<MarginalTable> tables, ConsistencyReport* report = nullptr);

}  // namespace dpsyn

#endif  // DPSYN_CONSISTENCY_H_
