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

#ifndef DPSYN_DOMAIN_H_
#define DPSYN_DOMAIN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace dpsyn {

enum class AttributeKind { kCategorical, kNumeric };

// One column of the domain. Categorical attributes carry ordered labels;
// numeric attributes carry strictly increasing bin edges, bin i covering
// [edges[i], edges[i+1]) with the last bin closed on the right.
class AttributeSpec {
 public:
  static absl::StatusOr<AttributeSpec> Categorical(
      std::string name, std::vector<std::string> values);
  static absl::StatusOr<AttributeSpec> Numeric(std::string name,
                                               std::vector<double> bin_edges);

  const std::string& name() const { return name_; }
  AttributeKind kind() const { return kind_; }
  bool is_numeric() const { return kind_ == AttributeKind::kNumeric; }
  const std::vector<std::string>& values() const { return values_; }
  const std::vector<double>& bin_edges() const { return bin_edges_; }
  int size() const;

  // Maps a raw CSV cell to its value index. Label matching is exact.
  absl::StatusOr<uint32_t> Encode(std::string_view cell) const;

  // Text written to CSV for `value`: the label, or the bin midpoint (which
  // re-encodes to the same bin).
  std::string Label(uint32_t value) const;

  // Numeric stand-in for `value`: the bin midpoint, or the index itself for
  // categorical attributes.
  double Representative(uint32_t value) const;

  bool operator==(const AttributeSpec&) const = default;

 private:
  AttributeSpec() = default;

  std::string name_;
  AttributeKind kind_ = AttributeKind::kCategorical;
  std::vector<std::string> values_;
  std::vector<double> bin_edges_;
};

class Domain {
 public:
  static absl::StatusOr<Domain> Create(std::vector<AttributeSpec> attrs);

  int size() const { return static_cast<int>(attrs_.size()); }
  const AttributeSpec& attr(int i) const { return attrs_[i]; }
  const std::vector<AttributeSpec>& attrs() const { return attrs_; }
  std::vector<int> sizes() const;
  std::optional<int> IndexOf(std::string_view name) const;

  // Domain restricted to `indices` (in the given order).
  Domain Select(std::span<const int> indices) const;

  bool operator==(const Domain&) const = default;

 private:
  explicit Domain(std::vector<AttributeSpec> attrs)
      : attrs_(std::move(attrs)) {}

  std::vector<AttributeSpec> attrs_;
};

// N x d matrix of value indices, stored row-major.
class Dataset {
 public:
  explicit Dataset(Domain domain) : domain_(std::move(domain)) {}

  // Validates every index against its column's domain size.
  static absl::StatusOr<Dataset> Create(Domain domain,
                                        std::vector<uint32_t> cells);

  const Domain& domain() const { return domain_; }
  int64_t n() const {
    return d() == 0 ? 0 : static_cast<int64_t>(cells_.size()) / d();
  }
  int d() const { return domain_.size(); }

  uint32_t at(int64_t row, int col) const { return cells_[row * d() + col]; }
  void set(int64_t row, int col, uint32_t v) { cells_[row * d() + col] = v; }

  std::span<const uint32_t> row(int64_t r) const {
    return {cells_.data() + r * d(), static_cast<size_t>(d())};
  }
  std::span<uint32_t> mutable_row(int64_t r) {
    return {cells_.data() + r * d(), static_cast<size_t>(d())};
  }
  std::vector<uint32_t> Column(int col) const;
  const std::vector<uint32_t>& cells() const { return cells_; }

  void AppendRow(std::span<const uint32_t> values);

  // Row order permutation: row i of the result is row perm[i] of this.
  Dataset Permuted(std::span<const int64_t> perm) const;

  bool operator==(const Dataset&) const = default;

 private:
  Domain domain_;
  std::vector<uint32_t> cells_;
};

// Parses the domain document
// {"attrs":[{"name":..,"kind":"categorical","values":[..]} |
//           {"name":..,"kind":"numeric","bin_edges":[..]}]}.
absl::StatusOr<Domain> LoadDomain(std::string_view json_text);
std::string DomainToJson(const Domain& domain);

// Header names must match the domain (any order); output columns follow
// domain order.
absl::StatusOr<Dataset> LoadCsv(std::string_view text, const Domain& domain);
std::string WriteCsv(const Dataset& dataset);

// Each column drawn independently: uniform when `one_way` is absent, else by
// largest-remainder quota from that attribute's distribution followed by a
// shuffle.
absl::StatusOr<Dataset> RandomDataset(
    const Domain& domain, int64_t n,
    const std::optional<std::vector<std::vector<double>>>& one_way,
    uint64_t seed);

// Horizontal concatenation of datasets with equal record counts.
absl::StatusOr<Dataset> ConcatColumns(std::span<const Dataset> parts);

}  // namespace dpsyn

#endif  // DPSYN_DOMAIN_H_
