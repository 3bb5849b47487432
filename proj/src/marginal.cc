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

#include "dpsyn/marginal.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "dpsyn/status_macros.h"
#include "json.hpp"

namespace dpsyn {

using json = nlohmann::json;

absl::StatusOr<MarginalSchema> MarginalSchema::Create(std::vector<int> attrs,
                                                      int num_attrs) {
  if (attrs.empty()) return absl::InvalidArgumentError("empty schema");
  for (size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i] < 0 || attrs[i] >= num_attrs) {
      return absl::InvalidArgumentError(
          absl::StrCat("schema attribute ", attrs[i], " out of range"));
    }
    if (i > 0 && attrs[i] <= attrs[i - 1]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schema {", absl::StrJoin(attrs, ","), "} is not strictly increasing"));
    }
  }
  return MarginalSchema(std::move(attrs));
}

absl::StatusOr<MarginalSchema> MarginalSchema::FromUnsorted(
    std::vector<int> attrs, int num_attrs) {
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
  return Create(std::move(attrs), num_attrs);
}

bool MarginalSchema::Contains(int attr) const {
  return std::binary_search(attrs_.begin(), attrs_.end(), attr);
}

bool MarginalSchema::IsSubsetOf(const MarginalSchema& other) const {
  return std::includes(other.attrs_.begin(), other.attrs_.end(),
                       attrs_.begin(), attrs_.end());
}

int64_t LatticeSize(std::span<const int> sizes) {
  int64_t cells = 1;
  for (int s : sizes) cells *= s;
  return cells;
}

absl::StatusOr<int64_t> CellEncode(std::span<const int> sizes,
                                   std::span<const int> values) {
  if (values.size() != sizes.size()) {
    return absl::InvalidArgumentError("cell arity mismatch");
  }
  int64_t flat = 0;
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (values[i] < 0 || values[i] >= sizes[i]) {
      return absl::OutOfRangeError(
          absl::StrCat("cell coordinate ", i, " = ", values[i],
                       " outside [0, ", sizes[i], ")"));
    }
    flat = flat * sizes[i] + values[i];
  }
  return flat;
}

absl::StatusOr<std::vector<int>> CellDecode(std::span<const int> sizes,
                                            int64_t flat) {
  if (flat < 0 || flat >= LatticeSize(sizes)) {
    return absl::OutOfRangeError(
        absl::StrCat("cell index ", flat, " outside lattice of ",
                     LatticeSize(sizes), " cells"));
  }
  std::vector<int> values(sizes.size());
  for (size_t i = sizes.size(); i-- > 0;) {
    values[i] = static_cast<int>(flat % sizes[i]);
    flat /= sizes[i];
  }
  return values;
}

absl::StatusOr<MarginalTable> MarginalTable::Create(
    MarginalSchema schema, std::vector<int> sizes, std::vector<double> counts,
    std::optional<double> noise_std) {
  if (sizes.size() != schema.attrs().size()) {
    return absl::InvalidArgumentError("sizes do not match schema arity");
  }
  for (int s : sizes) {
    if (s <= 0) return absl::InvalidArgumentError("non-positive domain size");
  }
  if (static_cast<int64_t>(counts.size()) != LatticeSize(sizes)) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", LatticeSize(sizes), " cells, got ",
                     counts.size()));
  }
  return MarginalTable(std::move(schema), std::move(sizes), std::move(counts),
                       noise_std);
}

MarginalTable MarginalTable::Zeros(MarginalSchema schema,
                                   std::vector<int> sizes) {
  std::vector<double> counts(static_cast<size_t>(LatticeSize(sizes)), 0.0);
  return MarginalTable(std::move(schema), std::move(sizes), std::move(counts),
                       std::nullopt);
}

double MarginalTable::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

absl::StatusOr<MarginalTable> MarginalTable::Normalized() const {
  const double t = total();
  if (t == 0.0) {
    return absl::FailedPreconditionError("cannot normalize a zero-total table");
  }
  MarginalTable out = *this;
  for (double& c : out.counts_) c /= t;
  return out;
}

MarginalTable MarginalTable::Scaled(double factor) const {
  MarginalTable out = *this;
  for (double& c : out.counts_) c *= factor;
  return out;
}

std::vector<int64_t> ProjectionIndex(std::span<const int> attrs,
                                     std::span<const int> sizes,
                                     std::span<const int> sub) {
  // Stride of each table position inside the sub-lattice (0 if summed out).
  std::vector<int64_t> stride(attrs.size(), 0);
  int64_t s = 1;
  for (size_t p = attrs.size(); p-- > 0;) {
    if (std::binary_search(sub.begin(), sub.end(), attrs[p])) {
      stride[p] = s;
      s *= sizes[p];
    }
  }
  const int64_t cells = LatticeSize(sizes);
  std::vector<int64_t> out(static_cast<size_t>(cells));
  std::vector<int> digit(attrs.size(), 0);
  int64_t target = 0;
  for (int64_t c = 0; c < cells; ++c) {
    out[c] = target;
    // Odometer increment, last position fastest.
    for (size_t p = attrs.size(); p-- > 0;) {
      if (++digit[p] < sizes[p]) {
        target += stride[p];
        break;
      }
      target -= stride[p] * (sizes[p] - 1);
      digit[p] = 0;
    }
  }
  return out;
}

absl::StatusOr<MarginalTable> ComputeMarginal(const Dataset& dataset,
                                              const MarginalSchema& schema) {
  const std::vector<int>& attrs = schema.attrs();
  for (int a : attrs) {
    if (a >= dataset.d()) {
      return absl::InvalidArgumentError(
          absl::StrCat("schema attribute ", a, " not in dataset"));
    }
  }
  std::vector<int> sizes;
  for (int a : attrs) sizes.push_back(dataset.domain().attr(a).size());
  MarginalTable table = MarginalTable::Zeros(schema, sizes);
  std::vector<double>& counts = table.mutable_counts();
  for (int64_t r = 0; r < dataset.n(); ++r) {
    int64_t flat = 0;
    for (size_t i = 0; i < attrs.size(); ++i) {
      flat = flat * sizes[i] + dataset.at(r, attrs[i]);
    }
    counts[flat] += 1.0;
  }
  return table;
}

absl::StatusOr<MarginalTable> Project(const MarginalTable& table,
                                      const MarginalSchema& sub) {
  if (!sub.IsSubsetOf(table.schema())) {
    return absl::InvalidArgumentError("projection target is not a subset");
  }
  if (sub == table.schema()) return table;
  std::vector<int> sub_sizes;
  for (size_t p = 0; p < table.attrs().size(); ++p) {
    if (sub.Contains(table.attrs()[p])) sub_sizes.push_back(table.sizes()[p]);
  }
  MarginalTable out = MarginalTable::Zeros(sub, sub_sizes);
  const auto index = ProjectionIndex(table.attrs(), table.sizes(), sub.attrs());
  for (int64_t c = 0; c < table.num_cells(); ++c) {
    out.mutable_counts()[index[c]] += table.counts()[c];
  }
  out.set_noise_std(std::nullopt);
  return out;
}

absl::StatusOr<MarginalTable> IndependentProduct(const MarginalTable& a,
                                                 const MarginalTable& b,
                                                 double n) {
  std::vector<int> merged;
  std::set_union(a.attrs().begin(), a.attrs().end(), b.attrs().begin(),
                 b.attrs().end(), std::back_inserter(merged));
  if (merged.size() != a.attrs().size() + b.attrs().size()) {
    return absl::InvalidArgumentError("product schemas overlap");
  }
  const double ta = a.total();
  const double tb = b.total();
  if (ta == 0.0 || tb == 0.0) {
    return absl::InvalidArgumentError("product operand has zero total");
  }
  std::vector<int> sizes;
  for (int attr : merged) {
    auto it = std::lower_bound(a.attrs().begin(), a.attrs().end(), attr);
    if (it != a.attrs().end() && *it == attr) {
      sizes.push_back(a.sizes()[it - a.attrs().begin()]);
    } else {
      auto jt = std::lower_bound(b.attrs().begin(), b.attrs().end(), attr);
      sizes.push_back(b.sizes()[jt - b.attrs().begin()]);
    }
  }
  // The merged schema is valid by construction: sorted, disjoint union.
  DPSYN_ASSIGN_OR_RETURN(MarginalSchema schema,
                         MarginalSchema::Create(merged, merged.back() + 1));
  MarginalTable out = MarginalTable::Zeros(schema, sizes);
  const auto to_a = ProjectionIndex(merged, sizes, a.attrs());
  const auto to_b = ProjectionIndex(merged, sizes, b.attrs());
  for (int64_t c = 0; c < out.num_cells(); ++c) {
    out.mutable_counts()[c] =
        n * (a.counts()[to_a[c]] / ta) * (b.counts()[to_b[c]] / tb);
  }
  return out;
}

absl::StatusOr<double> L1Distance(const MarginalTable& a,
                                  const MarginalTable& b) {
  if (a.schema() != b.schema() || a.sizes() != b.sizes()) {
    return absl::InvalidArgumentError("L1 distance: schema mismatch");
  }
  double sum = 0.0;
  for (int64_t c = 0; c < a.num_cells(); ++c) {
    sum += std::abs(a.counts()[c] - b.counts()[c]);
  }
  return sum;
}

std::string MarginalArchiveToJson(std::span<const MarginalTable> tables,
                                  const Domain& domain) {
  json list = json::array();
  for (const MarginalTable& t : tables) {
    json names = json::array();
    for (int a : t.attrs()) names.push_back(domain.attr(a).name());
    json entry = {{"schema", names},
                  {"sizes", t.sizes()},
                  {"counts", t.counts()}};
    entry["noise_std"] = t.noise_std() ? json(*t.noise_std()) : json(nullptr);
    list.push_back(std::move(entry));
  }
  return json({{"marginals", list}}).dump(1);
}

absl::StatusOr<std::vector<MarginalTable>> LoadMarginalArchive(
    std::string_view json_text, const Domain& domain) {
  const json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("marginals") ||
      !doc["marginals"].is_array()) {
    return absl::InvalidArgumentError(
        "marginal archive: expected {\"marginals\": [...]}");
  }
  std::vector<MarginalTable> out;
  for (const json& m : doc["marginals"]) {
    if (!m.is_object() || !m.contains("schema") || !m.contains("sizes") ||
        !m.contains("counts")) {
      return absl::InvalidArgumentError(
          "marginal archive: entry missing schema/sizes/counts");
    }
    std::vector<int> attrs;
    for (const json& name : m["schema"]) {
      if (!name.is_string()) {
        return absl::InvalidArgumentError("marginal archive: bad schema name");
      }
      const auto idx = domain.IndexOf(name.get<std::string>());
      if (!idx) {
        return absl::InvalidArgumentError(absl::StrCat(
            "marginal archive: unknown attribute ", name.get<std::string>()));
      }
      attrs.push_back(*idx);
    }
    DPSYN_ASSIGN_OR_RETURN(MarginalSchema schema,
                           MarginalSchema::Create(attrs, domain.size()));
    std::vector<int> sizes;
    std::vector<double> counts;
    try {
      sizes = m["sizes"].get<std::vector<int>>();
      counts = m["counts"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("marginal archive: ", e.what()));
    }
    for (size_t i = 0; i < attrs.size() && i < sizes.size(); ++i) {
      if (sizes[i] != domain.attr(attrs[i]).size()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "marginal archive: size of ", domain.attr(attrs[i]).name(),
            " disagrees with the domain"));
      }
    }
    std::optional<double> noise;
    if (m.contains("noise_std") && m["noise_std"].is_number()) {
      noise = m["noise_std"].get<double>();
    }
    DPSYN_ASSIGN_OR_RETURN(
        MarginalTable t, MarginalTable::Create(std::move(schema), std::move(sizes),
                                               std::move(counts), noise));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace dpsyn
