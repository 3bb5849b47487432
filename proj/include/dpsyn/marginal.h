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

#ifndef DPSYN_MARGINAL_H_
#define DPSYN_MARGINAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsyn/domain.h"

namespace dpsyn {

// A strictly increasing, non-empty list of attribute indices.
class MarginalSchema {
 public:
  // Validates against a domain with `num_attrs` attributes.
  static absl::StatusOr<MarginalSchema> Create(std::vector<int> attrs,
                                               int num_attrs);
  // Sorts and de-duplicates `attrs` before validating.
  static absl::StatusOr<MarginalSchema> FromUnsorted(std::vector<int> attrs,
                                                     int num_attrs);

  const std::vector<int>& attrs() const { return attrs_; }
  int arity() const { return static_cast<int>(attrs_.size()); }
  bool Contains(int attr) const;
  bool IsSubsetOf(const MarginalSchema& other) const;

  auto operator<=>(const MarginalSchema&) const = default;

 private:
  explicit MarginalSchema(std::vector<int> attrs) : attrs_(std::move(attrs)) {}
  std::vector<int> attrs_;
};

// Flat index of a cell; the first attribute varies slowest.
absl::StatusOr<int64_t> CellEncode(std::span<const int> sizes,
                                   std::span<const int> values);
absl::StatusOr<std::vector<int>> CellDecode(std::span<const int> sizes,
                                            int64_t flat);
int64_t LatticeSize(std::span<const int> sizes);

// Real-valued counts over the cell lattice of a schema, stored row-major
// with the first schema attribute slowest-varying. Counts may be negative
// (noisy, not yet made consistent).
class MarginalTable {
 public:
  static absl::StatusOr<MarginalTable> Create(
      MarginalSchema schema, std::vector<int> sizes, std::vector<double> counts,
      std::optional<double> noise_std = std::nullopt);
  static MarginalTable Zeros(MarginalSchema schema, std::vector<int> sizes);

  const MarginalSchema& schema() const { return schema_; }
  const std::vector<int>& attrs() const { return schema_.attrs(); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<double>& counts() const { return counts_; }
  std::vector<double>& mutable_counts() { return counts_; }
  int64_t num_cells() const { return static_cast<int64_t>(counts_.size()); }
  double total() const;

  std::optional<double> noise_std() const { return noise_std_; }
  void set_noise_std(std::optional<double> s) { noise_std_ = s; }

  // Counts divided by the total. The total must be non-zero.
  absl::StatusOr<MarginalTable> Normalized() const;
  MarginalTable Scaled(double factor) const;

  bool operator==(const MarginalTable&) const = default;

 private:
  MarginalTable(MarginalSchema schema, std::vector<int> sizes,
                std::vector<double> counts, std::optional<double> noise_std)
      : schema_(std::move(schema)),
        sizes_(std::move(sizes)),
        counts_(std::move(counts)),
        noise_std_(noise_std) {}

  MarginalSchema schema_;
  std::vector<int> sizes_;
  std::vector<double> counts_;
  std::optional<double> noise_std_;
};

// For every cell of a lattice over `attrs` (sizes `sizes`), the flat index
// of its image in the lattice over `sub` (which must be a subset of
// `attrs`). An empty `sub` maps every cell to 0.
std::vector<int64_t> ProjectionIndex(std::span<const int> attrs,
                                     std::span<const int> sizes,
                                     std::span<const int> sub);

absl::StatusOr<MarginalTable> ComputeMarginal(const Dataset& dataset,
                                              const MarginalSchema& schema);

// Sums out the attributes of `table` that are not in `sub`.
absl::StatusOr<MarginalTable> Project(const MarginalTable& table,
                                      const MarginalSchema& sub);

// Joint table on the union of two disjoint schemas assuming independence,
// scaled to `n` records.
absl::StatusOr<MarginalTable> IndependentProduct(const MarginalTable& a,
                                                 const MarginalTable& b,
                                                 double n);

absl::StatusOr<double> L1Distance(const MarginalTable& a,
                                  const MarginalTable& b);

// Archive document {"marginals":[{"schema":[names],"sizes":[..],
// "counts":[row-major],"noise_std":x}, ...]}; names resolve against
// `domain`.
std::string MarginalArchiveToJson(std::span<const MarginalTable> tables,
                                  const Domain& domain);
absl::StatusOr<std::vector<MarginalTable>> LoadMarginalArchive(
    std::string_view json_text, const Domain& domain);

}  // namespace dpsyn

#endif  // DPSYN_MARGINAL_H_
