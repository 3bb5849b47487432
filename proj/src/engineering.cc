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

#include "dpsyn/engineering.h"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "dpsyn/random.h"
#include "dpsyn/status_macros.h"

namespace dpsyn {

absl::StatusOr<double> InDif(const Dataset& dataset, int a, int b) {
  if (a == b) return absl::InvalidArgumentError("InDif needs two attributes");
  const int d = dataset.d();
  if (a < 0 || b < 0 || a >= d || b >= d) {
    return absl::InvalidArgumentError("InDif attribute out of range");
  }
  if (dataset.n() == 0) return 0.0;
  DPSYN_ASSIGN_OR_RETURN(MarginalSchema joint_schema,
                         MarginalSchema::FromUnsorted({a, b}, d));
  DPSYN_ASSIGN_OR_RETURN(MarginalSchema sa, MarginalSchema::Create({a}, d));
  DPSYN_ASSIGN_OR_RETURN(MarginalSchema sb, MarginalSchema::Create({b}, d));
  DPSYN_ASSIGN_OR_RETURN(MarginalTable joint,
                         ComputeMarginal(dataset, joint_schema));
  DPSYN_ASSIGN_OR_RETURN(MarginalTable ma, Project(joint, sa));
  DPSYN_ASSIGN_OR_RETURN(MarginalTable mb, Project(joint, sb));
  DPSYN_ASSIGN_OR_RETURN(
      MarginalTable product,
      IndependentProduct(ma, mb, static_cast<double>(dataset.n())));
  return L1Distance(joint, product);
}

std::vector<InDifScore> InDifMatrix(const Dataset& dataset) {
  std::vector<InDifScore> out;
  for (int a = 0; a < dataset.d(); ++a) {
    for (int b = a + 1; b < dataset.d(); ++b) {
      // Arguments are valid by construction.
      out.push_back({a, b, InDif(dataset, a, b).value()});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const InDifScore& x, const InDifScore& y) {
                     return x.value > y.value;
                   });
  return out;
}

double Threshold(ThresholdRule rule, double sigma) {
  switch (rule) {
    case ThresholdRule::kFire:
      return std::max(4.5 * sigma, 800.0);
    case ThresholdRule::kFilterCombine:
      return 3.0 * sigma;
  }
  return 0.0;
}

std::optional<ThresholdRule> ThresholdRuleFromName(std::string_view name) {
  if (name == "fire") return ThresholdRule::kFire;
  if (name == "filter_combine") return ThresholdRule::kFilterCombine;
  return std::nullopt;
}

std::vector<uint32_t> RecodeMap::EncodeTable() const {
  std::vector<uint32_t> table(static_cast<size_t>(original_size), 0);
  uint32_t fallback = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < kept.size(); ++i) {
    table[kept[i]] = static_cast<uint32_t>(i);
    if (one_way[kept[i]] > best) {
      best = one_way[kept[i]];
      fallback = static_cast<uint32_t>(i);
    }
  }
  for (int v : grouped) {
    table[v] = dummy_index ? static_cast<uint32_t>(*dummy_index) : fallback;
  }
  return table;
}

absl::StatusOr<RecodeMap> CompressAttribute(const MarginalTable& noisy_one_way,
                                            double theta) {
  if (!(theta >= 0)) return absl::InvalidArgumentError("theta must be >= 0");
  if (noisy_one_way.attrs().size() != 1) {
    return absl::InvalidArgumentError("compression needs a 1-way marginal");
  }
  RecodeMap map;
  map.attr = noisy_one_way.attrs()[0];
  map.original_size = noisy_one_way.sizes()[0];
  map.one_way = noisy_one_way.counts();
  if (theta == 0) {
    map.kept.resize(map.original_size);
    std::iota(map.kept.begin(), map.kept.end(), 0);
    return map;
  }
  double low_sum = 0.0;
  for (int v = 0; v < map.original_size; ++v) {
    if (map.one_way[v] > theta) {
      map.kept.push_back(v);
    } else {
      map.grouped.push_back(v);
      low_sum += map.one_way[v];
    }
  }
  if (!map.grouped.empty() && low_sum > theta) {
    map.dummy_index = static_cast<int>(map.kept.size());
  }
  if (map.kept.empty() && !map.dummy_index) {
    return absl::FailedPreconditionError(absl::StrCat(
        "compressing attribute ", map.attr,
        " leaves no values: every count and their sum are below ", theta));
  }
  return map;
}

AttributeSpec CompressedSpec(const AttributeSpec& original,
                             const RecodeMap& map) {
  std::vector<std::string> labels;
  for (int v : map.kept) {
    if (original.is_numeric()) {
      labels.push_back(absl::StrCat("[", original.bin_edges()[v], ",",
                                    original.bin_edges()[v + 1], ")"));
    } else {
      labels.push_back(original.values()[v]);
    }
  }
  if (map.dummy_index) {
    std::string dummy = "__other__";
    while (std::find(labels.begin(), labels.end(), dummy) != labels.end()) {
      dummy += "_";
    }
    labels.push_back(dummy);
  }
  // Labels are unique: kept labels are unique and the dummy avoids them.
  return AttributeSpec::Categorical(original.name(), std::move(labels)).value();
}

namespace {

absl::StatusOr<Domain> ReplaceAttr(const Domain& domain, int attr,
                                   AttributeSpec spec) {
  std::vector<AttributeSpec> attrs = domain.attrs();
  attrs[attr] = std::move(spec);
  return Domain::Create(std::move(attrs));
}

}  // namespace

absl::StatusOr<Dataset> CompressDataset(const Dataset& dataset,
                                        const RecodeMap& map) {
  if (map.attr >= dataset.d() ||
      dataset.domain().attr(map.attr).size() != map.original_size) {
    return absl::InvalidArgumentError("recode map does not fit the dataset");
  }
  DPSYN_ASSIGN_OR_RETURN(
      Domain domain,
      ReplaceAttr(dataset.domain(), map.attr,
                  CompressedSpec(dataset.domain().attr(map.attr), map)));
  const std::vector<uint32_t> encode = map.EncodeTable();
  std::vector<uint32_t> cells = dataset.cells();
  for (int64_t r = 0; r < dataset.n(); ++r) {
    uint32_t& v = cells[r * dataset.d() + map.attr];
    v = encode[v];
  }
  return Dataset::Create(std::move(domain), std::move(cells));
}

absl::StatusOr<Dataset> ExpandCompressed(const Dataset& synth,
                                         const RecodeMap& map,
                                         const AttributeSpec& original,
                                         uint64_t seed) {
  if (map.attr >= synth.d() ||
      synth.domain().attr(map.attr).size() != map.compressed_size()) {
    return absl::InvalidArgumentError(
        "dataset is not in the recode map's compressed domain");
  }
  if (map.dummy_index && map.grouped.empty()) {
    return absl::InvalidArgumentError("dummy value has no grouped values");
  }
  DPSYN_ASSIGN_OR_RETURN(Domain domain,
                         ReplaceAttr(synth.domain(), map.attr, original));
  Rng rng(seed);
  std::vector<uint32_t> cells = synth.cells();
  for (int64_t r = 0; r < synth.n(); ++r) {
    uint32_t& v = cells[r * synth.d() + map.attr];
    if (map.dummy_index && static_cast<int>(v) == *map.dummy_index) {
      v = map.grouped[rng.UniformInt(map.grouped.size())];
    } else {
      v = map.kept[v];
    }
  }
  return Dataset::Create(std::move(domain), std::move(cells));
}

absl::StatusOr<GroupRecoding> GroupRecode(const Dataset& dataset,
                                          std::span<const int> attrs_in,
                                          bool full_product) {
  std::vector<int> attrs(attrs_in.begin(), attrs_in.end());
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
  if (attrs.size() < 2) {
    return absl::InvalidArgumentError("group recoding needs >= 2 attributes");
  }
  const Domain& domain = dataset.domain();
  for (int a : attrs) {
    if (a < 0 || a >= domain.size()) {
      return absl::InvalidArgumentError("group attribute out of range");
    }
  }

  std::vector<std::vector<uint32_t>> combos;
  if (full_product) {
    std::vector<int> sizes;
    for (int a : attrs) sizes.push_back(domain.attr(a).size());
    const int64_t cells = LatticeSize(sizes);
    for (int64_t c = 0; c < cells; ++c) {
      const std::vector<int> digits = CellDecode(sizes, c).value();
      combos.emplace_back(digits.begin(), digits.end());
    }
  } else {
    std::set<std::vector<uint32_t>> seen;
    for (int64_t r = 0; r < dataset.n(); ++r) {
      std::vector<uint32_t> key;
      for (int a : attrs) key.push_back(dataset.at(r, a));
      seen.insert(std::move(key));
    }
    combos.assign(seen.begin(), seen.end());
  }
  if (combos.empty()) {
    return absl::FailedPreconditionError(
        "group recoding an empty dataset yields an empty domain");
  }

  std::vector<std::string> name_parts;
  for (int a : attrs) name_parts.push_back(domain.attr(a).name());
  std::vector<std::string> labels;
  for (const auto& combo : combos) {
    std::vector<std::string> parts;
    for (size_t i = 0; i < attrs.size(); ++i) {
      parts.push_back(domain.attr(attrs[i]).Label(combo[i]));
    }
    labels.push_back(absl::StrJoin(parts, "|"));
  }
  DPSYN_ASSIGN_OR_RETURN(
      AttributeSpec combined,
      AttributeSpec::Categorical(absl::StrJoin(name_parts, "+"), labels));

  std::vector<AttributeSpec> new_attrs;
  std::vector<int> source;  // original column of each new column, -1 = combined
  for (int j = 0; j < domain.size(); ++j) {
    if (j == attrs[0]) {
      new_attrs.push_back(combined);
      source.push_back(-1);
    } else if (!std::binary_search(attrs.begin(), attrs.end(), j)) {
      new_attrs.push_back(domain.attr(j));
      source.push_back(j);
    }
  }
  DPSYN_ASSIGN_OR_RETURN(Domain new_domain, Domain::Create(std::move(new_attrs)));

  std::map<std::vector<uint32_t>, uint32_t> code;
  for (size_t i = 0; i < combos.size(); ++i) {
    code[combos[i]] = static_cast<uint32_t>(i);
  }
  std::vector<uint32_t> cells;
  cells.reserve(static_cast<size_t>(dataset.n()) * source.size());
  std::vector<uint32_t> key(attrs.size());
  for (int64_t r = 0; r < dataset.n(); ++r) {
    for (int src : source) {
      if (src >= 0) {
        cells.push_back(dataset.at(r, src));
        continue;
      }
      for (size_t i = 0; i < attrs.size(); ++i) key[i] = dataset.at(r, attrs[i]);
      cells.push_back(code.at(key));
    }
  }
  DPSYN_ASSIGN_OR_RETURN(Dataset recoded,
                         Dataset::Create(std::move(new_domain), std::move(cells)));
  GroupDecoder decoder{domain, attrs, attrs[0], std::move(combos)};
  return GroupRecoding{std::move(recoded), std::move(combined),
                       std::move(decoder)};
}

absl::StatusOr<Dataset> GroupDecode(const Dataset& recoded,
                                    const GroupDecoder& decoder) {
  const Domain& original = decoder.original_domain;
  const int expected_d =
      original.size() - static_cast<int>(decoder.attrs.size()) + 1;
  if (recoded.d() != expected_d ||
      recoded.domain().attr(decoder.combined_position).size() !=
          static_cast<int>(decoder.combos.size())) {
    return absl::InvalidArgumentError("dataset does not match group decoder");
  }
  // Column of `recoded` holding each original attribute, or -1 if grouped.
  std::vector<int> column(original.size(), -1);
  for (int j = 0, c = 0; j < original.size(); ++j) {
    if (j == decoder.attrs[0]) {
      ++c;
    } else if (!std::binary_search(decoder.attrs.begin(), decoder.attrs.end(),
                                   j)) {
      column[j] = c++;
    }
  }
  std::vector<uint32_t> cells;
  cells.reserve(static_cast<size_t>(recoded.n()) * original.size());
  for (int64_t r = 0; r < recoded.n(); ++r) {
    const auto& combo = decoder.combos[recoded.at(r, decoder.combined_position)];
    size_t g = 0;
    for (int j = 0; j < original.size(); ++j) {
      if (column[j] >= 0) {
        cells.push_back(recoded.at(r, column[j]));
      } else {
        cells.push_back(combo[g++]);
      }
    }
  }
  return Dataset::Create(original, std::move(cells));
}

}  // namespace dpsyn
