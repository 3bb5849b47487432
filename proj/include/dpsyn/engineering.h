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

#ifndef DPSYN_ENGINEERING_H_
#define DPSYN_ENGINEERING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsyn/domain.h"
#include "dpsyn/marginal.h"

namespace dpsyn {

// ---------------------------------------------------------------------------
// Independence gap.

struct InDifScore {
  int a = 0;
  int b = 0;
  double value = 0.0;
};

// L1 distance between the 2-way marginal of (a, b) and the product of the
// two 1-way marginals, both at dataset scale.
absl::StatusOr<double> InDif(const Dataset& dataset, int a, int b);

// Every pair a < b, sorted by descending score, then by (a, b).
std::vector<InDifScore> InDifMatrix(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Value compression.

enum class ThresholdRule { kFire, kFilterCombine };

// kFire: max(4.5 sigma, 800). kFilterCombine: 3 sigma.
double Threshold(ThresholdRule rule, double sigma);
std::optional<ThresholdRule> ThresholdRuleFromName(std::string_view name);

struct RecodeMap {
  int attr = 0;
  int original_size = 0;
  // Original values that keep their own compressed value (in order).
  std::vector<int> kept;
  // Low-count original values. They share the dummy value when one exists;
  // otherwise their count is taken as 0.
  std::vector<int> grouped;
  std::optional<int> dummy_index;
  // The noisy 1-way counts the map was built from.
  std::vector<double> one_way;

  int compressed_size() const {
    return static_cast<int>(kept.size()) + (dummy_index ? 1 : 0);
  }
  // Compressed value of every original value. Dropped values (grouped with
  // no dummy) go to the kept value with the largest noisy count.
  std::vector<uint32_t> EncodeTable() const;
};

// Keeps values whose noisy count exceeds theta; the rest form a group that
// gets one dummy value if its summed count exceeds theta and is dropped
// otherwise. theta == 0 disables compression.
absl::StatusOr<RecodeMap> CompressAttribute(const MarginalTable& noisy_one_way,
                                            double theta);

// Attribute spec of the compressed column.
AttributeSpec CompressedSpec(const AttributeSpec& original,
                             const RecodeMap& map);

// Re-encodes `map.attr` of `dataset` into the compressed domain.
absl::StatusOr<Dataset> CompressDataset(const Dataset& dataset,
                                        const RecodeMap& map);

// Inverse of CompressDataset: kept values map back to their original index
// and each dummy occurrence becomes a uniformly drawn grouped value.
absl::StatusOr<Dataset> ExpandCompressed(const Dataset& synth,
                                         const RecodeMap& map,
                                         const AttributeSpec& original,
                                         uint64_t seed);

// ---------------------------------------------------------------------------
// Group recoding.

struct GroupDecoder {
  Domain original_domain;
  std::vector<int> attrs;  // grouped attributes, sorted, in original_domain
  int combined_position = 0;
  std::vector<std::vector<uint32_t>> combos;  // combined value -> originals
};

struct GroupRecoding {
  Dataset dataset;
  AttributeSpec combined;
  GroupDecoder decoder;
};

// Replaces `attrs` (>= 2) with one attribute named "A+B+..." placed at the
// position of the first grouped attribute. Its values are the combinations
// observed in the dataset (lexicographic order), or the full Cartesian
// product when `full_product` is set.
absl::StatusOr<GroupRecoding> GroupRecode(const Dataset& dataset,
                                          std::span<const int> attrs,
                                          bool full_product = false);

absl::StatusOr<Dataset> GroupDecode(const Dataset& recoded,
                                    const GroupDecoder& decoder);

}  // namespace dpsyn

#endif  // DPSYN_ENGINEERING_H_
