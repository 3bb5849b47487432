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

#include "dpsyn/domain.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpsyn/csv.h"
#include "dpsyn/random.h"
#include "dpsyn/status_macros.h"
#include "json.hpp"

namespace dpsyn {

using json = nlohmann::json;

absl::StatusOr<AttributeSpec> AttributeSpec::Categorical(
    std::string name, std::vector<std::string> values) {
  if (name.empty()) return absl::InvalidArgumentError("attribute name empty");
  if (values.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("attribute ", name, ": no values"));
  }
  std::set<std::string_view> seen;
  for (const auto& v : values) {
    if (!seen.insert(v).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute ", name, ": duplicate label \"", v, "\""));
    }
  }
  AttributeSpec spec;
  spec.name_ = std::move(name);
  spec.kind_ = AttributeKind::kCategorical;
  spec.values_ = std::move(values);
  return spec;
}

absl::StatusOr<AttributeSpec> AttributeSpec::Numeric(
    std::string name, std::vector<double> bin_edges) {
  if (name.empty()) return absl::InvalidArgumentError("attribute name empty");
  if (bin_edges.size() < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("attribute ", name, ": need at least two bin edges"));
  }
  for (size_t i = 0; i < bin_edges.size(); ++i) {
    if (!std::isfinite(bin_edges[i]) ||
        (i > 0 && !(bin_edges[i] > bin_edges[i - 1]))) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute ", name, ": non-increasing edges"));
    }
  }
  AttributeSpec spec;
  spec.name_ = std::move(name);
  spec.kind_ = AttributeKind::kNumeric;
  spec.bin_edges_ = std::move(bin_edges);
  return spec;
}

int AttributeSpec::size() const {
  return is_numeric() ? static_cast<int>(bin_edges_.size()) - 1
                      : static_cast<int>(values_.size());
}

absl::StatusOr<uint32_t> AttributeSpec::Encode(std::string_view cell) const {
  if (!is_numeric()) {
    auto it = std::find(values_.begin(), values_.end(), cell);
    if (it == values_.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "attribute ", name_, ": unknown label \"", std::string(cell), "\""));
    }
    return static_cast<uint32_t>(it - values_.begin());
  }
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "attribute ", name_, ": not a number \"", std::string(cell), "\""));
  }
  if (!(x >= bin_edges_.front() && x <= bin_edges_.back())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "attribute ", name_, ": out-of-range numeric value ", std::string(cell)));
  }
  // First edge strictly greater than x; the last bin is closed.
  auto it = std::upper_bound(bin_edges_.begin(), bin_edges_.end(), x);
  const int bin = std::min(static_cast<int>(it - bin_edges_.begin()) - 1,
                           size() - 1);
  return static_cast<uint32_t>(bin);
}

std::string AttributeSpec::Label(uint32_t value) const {
  if (!is_numeric()) return values_[value];
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), Representative(value));
  return std::string(buf, res.ptr);
}

double AttributeSpec::Representative(uint32_t value) const {
  if (!is_numeric()) return static_cast<double>(value);
  return 0.5 * (bin_edges_[value] + bin_edges_[value + 1]);
}

absl::StatusOr<Domain> Domain::Create(std::vector<AttributeSpec> attrs) {
  if (attrs.empty()) {
    return absl::InvalidArgumentError("domain has no attributes");
  }
  std::set<std::string_view> names;
  for (const auto& a : attrs) {
    if (!names.insert(a.name()).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate attribute name ", a.name()));
    }
  }
  return Domain(std::move(attrs));
}

std::vector<int> Domain::sizes() const {
  std::vector<int> out;
  out.reserve(attrs_.size());
  for (const auto& a : attrs_) out.push_back(a.size());
  return out;
}

std::optional<int> Domain::IndexOf(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (attrs_[i].name() == name) return i;
  }
  return std::nullopt;
}

Domain Domain::Select(std::span<const int> indices) const {
  std::vector<AttributeSpec> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(attrs_[i]);
  return Domain(std::move(out));
}

absl::StatusOr<Dataset> Dataset::Create(Domain domain,
                                        std::vector<uint32_t> cells) {
  const int d = domain.size();
  if (d == 0 || cells.size() % d != 0) {
    return absl::InvalidArgumentError("cell count is not a multiple of d");
  }
  const std::vector<int> sizes = domain.sizes();
  for (size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] >= static_cast<uint32_t>(sizes[i % d])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", i / d, ": value ", cells[i], " out of range for attribute ",
          domain.attr(static_cast<int>(i % d)).name()));
    }
  }
  Dataset out(std::move(domain));
  out.cells_ = std::move(cells);
  return out;
}

std::vector<uint32_t> Dataset::Column(int col) const {
  std::vector<uint32_t> out(static_cast<size_t>(n()));
  for (int64_t r = 0; r < n(); ++r) out[r] = at(r, col);
  return out;
}

void Dataset::AppendRow(std::span<const uint32_t> values) {
  cells_.insert(cells_.end(), values.begin(), values.end());
}

Dataset Dataset::Permuted(std::span<const int64_t> perm) const {
  Dataset out(domain_);
  out.cells_.reserve(cells_.size());
  for (int64_t r : perm) out.AppendRow(row(r));
  return out;
}

absl::StatusOr<Domain> LoadDomain(std::string_view json_text) {
  const json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("attrs") ||
      !doc["attrs"].is_array()) {
    return absl::InvalidArgumentError(
        "domain spec: expected an object with an \"attrs\" array");
  }
  std::vector<AttributeSpec> attrs;
  for (const json& a : doc["attrs"]) {
    if (!a.is_object() || !a.contains("name") || !a["name"].is_string() ||
        !a.contains("kind") || !a["kind"].is_string()) {
      return absl::InvalidArgumentError(
          "domain spec: every attribute needs string \"name\" and \"kind\"");
    }
    std::string name = a["name"].get<std::string>();
    const std::string kind = a["kind"].get<std::string>();
    if (kind == "categorical") {
      if (!a.contains("values") || !a["values"].is_array()) {
        return absl::InvalidArgumentError(
            absl::StrCat("attribute ", name, ": missing \"values\""));
      }
      std::vector<std::string> values;
      for (const json& v : a["values"]) {
        if (!v.is_string()) {
          return absl::InvalidArgumentError(
              absl::StrCat("attribute ", name, ": labels must be strings"));
        }
        values.push_back(v.get<std::string>());
      }
      DPSYN_ASSIGN_OR_RETURN(
          auto spec, AttributeSpec::Categorical(std::move(name), std::move(values)));
      attrs.push_back(std::move(spec));
    } else if (kind == "numeric") {
      if (!a.contains("bin_edges") || !a["bin_edges"].is_array()) {
        return absl::InvalidArgumentError(
            absl::StrCat("attribute ", name, ": missing \"bin_edges\""));
      }
      std::vector<double> edges;
      for (const json& e : a["bin_edges"]) {
        if (!e.is_number()) {
          return absl::InvalidArgumentError(
              absl::StrCat("attribute ", name, ": bin edges must be numbers"));
        }
        edges.push_back(e.get<double>());
      }
      DPSYN_ASSIGN_OR_RETURN(
          auto spec, AttributeSpec::Numeric(std::move(name), std::move(edges)));
      attrs.push_back(std::move(spec));
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute ", name, ": unknown kind \"", kind, "\""));
    }
  }
  return Domain::Create(std::move(attrs));
}

std::string DomainToJson(const Domain& domain) {
  json attrs = json::array();
  for (const auto& a : domain.attrs()) {
    json entry = {{"name", a.name()}};
    if (a.is_numeric()) {
      entry["kind"] = "numeric";
      entry["bin_edges"] = a.bin_edges();
    } else {
      entry["kind"] = "categorical";
      entry["values"] = a.values();
    }
    attrs.push_back(std::move(entry));
  }
  return json({{"attrs", attrs}}).dump(2);
}

absl::StatusOr<Dataset> LoadCsv(std::string_view text, const Domain& domain) {
  DPSYN_ASSIGN_OR_RETURN(std::vector<CsvRow> rows, ParseCsv(text));
  if (rows.empty()) return absl::InvalidArgumentError("csv: missing header");
  const CsvRow& header = rows[0];
  const int d = domain.size();
  // column_of[j] = CSV column holding domain attribute j.
  std::vector<int> column_of(d, -1);
  for (size_t c = 0; c < header.size(); ++c) {
    const auto idx = domain.IndexOf(header[c]);
    if (!idx) {
      return absl::InvalidArgumentError(
          absl::StrCat("csv: column \"", header[c], "\" not in domain"));
    }
    if (column_of[*idx] != -1) {
      return absl::InvalidArgumentError(
          absl::StrCat("csv: duplicate column \"", header[c], "\""));
    }
    column_of[*idx] = static_cast<int>(c);
  }
  for (int j = 0; j < d; ++j) {
    if (column_of[j] == -1) {
      return absl::InvalidArgumentError(
          absl::StrCat("csv: missing column \"", domain.attr(j).name(), "\""));
    }
  }
  std::vector<uint32_t> cells;
  cells.reserve((rows.size() - 1) * d);
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "csv record ", r, ": expected ", header.size(), " fields, got ",
          rows[r].size()));
    }
    for (int j = 0; j < d; ++j) {
      auto v = domain.attr(j).Encode(rows[r][column_of[j]]);
      if (!v.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("csv record ", r, ": ", v.status().message()));
      }
      cells.push_back(*v);
    }
  }
  return Dataset::Create(domain, std::move(cells));
}

std::string WriteCsv(const Dataset& dataset) {
  std::string out;
  const Domain& domain = dataset.domain();
  CsvRow row;
  for (const auto& a : domain.attrs()) row.push_back(a.name());
  AppendCsvRow(row, out);
  for (int64_t r = 0; r < dataset.n(); ++r) {
    row.clear();
    for (int j = 0; j < dataset.d(); ++j) {
      row.push_back(domain.attr(j).Label(dataset.at(r, j)));
    }
    AppendCsvRow(row, out);
  }
  return out;
}

absl::StatusOr<Dataset> RandomDataset(
    const Domain& domain, int64_t n,
    const std::optional<std::vector<std::vector<double>>>& one_way,
    uint64_t seed) {
  if (n < 0) return absl::InvalidArgumentError("record count must be >= 0");
  const int d = domain.size();
  if (one_way && static_cast<int>(one_way->size()) != d) {
    return absl::InvalidArgumentError(
        "one-way marginal count does not match the domain");
  }
  Rng rng(seed);
  std::vector<uint32_t> cells(static_cast<size_t>(n) * d);
  std::vector<uint32_t> column(static_cast<size_t>(n));
  for (int j = 0; j < d; ++j) {
    const int size = domain.attr(j).size();
    if (!one_way) {
      for (auto& v : column) v = static_cast<uint32_t>(rng.UniformInt(size));
    } else {
      const std::vector<double>& dist = (*one_way)[j];
      if (static_cast<int>(dist.size()) != size) {
        return absl::InvalidArgumentError(absl::StrCat(
            "one-way marginal for ", domain.attr(j).name(),
            " has wrong length"));
      }
      double total = 0.0;
      for (double p : dist) {
        if (p < 0.0 || !std::isfinite(p)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "one-way marginal for ", domain.attr(j).name(),
              " has a negative entry"));
        }
        total += p;
      }
      if (total <= 0.0 && n > 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "one-way marginal for ", domain.attr(j).name(), " sums to zero"));
      }
      const std::vector<int64_t> quota = LargestRemainder(dist, n);
      size_t pos = 0;
      for (int v = 0; v < size; ++v) {
        for (int64_t c = 0; c < quota[v]; ++c) column[pos++] = v;
      }
      rng.Shuffle(column);
    }
    for (int64_t r = 0; r < n; ++r) cells[r * d + j] = column[r];
  }
  return Dataset::Create(domain, std::move(cells));
}

absl::StatusOr<Dataset> ConcatColumns(std::span<const Dataset> parts) {
  if (parts.empty()) return absl::InvalidArgumentError("nothing to join");
  std::vector<AttributeSpec> attrs;
  const int64_t n = parts[0].n();
  for (const Dataset& p : parts) {
    if (p.n() != n) {
      return absl::InvalidArgumentError("joined parts differ in record count");
    }
    attrs.insert(attrs.end(), p.domain().attrs().begin(),
                 p.domain().attrs().end());
  }
  DPSYN_ASSIGN_OR_RETURN(Domain domain, Domain::Create(std::move(attrs)));
  std::vector<uint32_t> cells;
  cells.reserve(static_cast<size_t>(n) * domain.size());
  for (int64_t r = 0; r < n; ++r) {
    for (const Dataset& p : parts) {
      auto row = p.row(r);
      cells.insert(cells.end(), row.begin(), row.end());
    }
  }
  return Dataset::Create(std::move(domain), std::move(cells));
}

}  // namespace dpsyn
