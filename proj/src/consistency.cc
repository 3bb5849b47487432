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

#include "dpsyn/consistency.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpsyn/status_macros.h"

namespace dpsyn {
namespace {

constexpr int kMaxNonnegRounds = 10;
constexpr double kNonnegChangeTol = 1e-6;

std::vector<int> Intersect(const std::vector<int>& a,
                           const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

bool ContainsAll(const std::vector<int>& super, const std::vector<int>& sub) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

void AverageOnSet(std::vector<MarginalTable>& tables, const SharedSet& set,
                  ConsistencyReport* report) {
  const size_t m = set.members.size();
  std::vector<std::vector<int64_t>> index(m);
  std::vector<std::vector<double>> proj(m);
  std::vector<double> collapse(m);
  int64_t set_cells = 1;
  {
    const MarginalTable& t = tables[set.members[0]];
    for (size_t p = 0; p < t.attrs().size(); ++p) {
      if (std::binary_search(set.attrs.begin(), set.attrs.end(), t.attrs()[p])) {
        set_cells *= t.sizes()[p];
      }
    }
  }
  for (size_t i = 0; i < m; ++i) {
    const MarginalTable& t = tables[set.members[i]];
    index[i] = ProjectionIndex(t.attrs(), t.sizes(), set.attrs);
    proj[i].assign(static_cast<size_t>(set_cells), 0.0);
    for (int64_t c = 0; c < t.num_cells(); ++c) {
      proj[i][index[i][c]] += t.counts()[c];
    }
    collapse[i] = static_cast<double>(t.num_cells() / set_cells);
  }

  std::vector<double> weight(m, 1.0);
  bool have_std = true;
  bool any_exact = false;
  for (int member : set.members) {
    const auto s = tables[member].noise_std();
    if (!s) have_std = false;
    if (s && *s == 0.0) any_exact = true;
  }
  if (!have_std) {
    if (report) report->equal_weight_fallback = true;
  } else {
    for (size_t i = 0; i < m; ++i) {
      const double s = *tables[set.members[i]].noise_std();
      if (any_exact) {
        weight[i] = s == 0.0 ? 1.0 : 0.0;
      } else {
        weight[i] = 1.0 / (collapse[i] * s * s);
      }
    }
  }
  double weight_sum = 0.0;
  for (double w : weight) weight_sum += w;

  std::vector<double> avg(static_cast<size_t>(set_cells), 0.0);
  for (size_t i = 0; i < m; ++i) {
    for (int64_t g = 0; g < set_cells; ++g) {
      avg[g] += weight[i] / weight_sum * proj[i][g];
    }
  }
  for (size_t i = 0; i < m; ++i) {
    MarginalTable& t = tables[set.members[i]];
    std::vector<double>& counts = t.mutable_counts();
    for (int64_t c = 0; c < t.num_cells(); ++c) {
      const int64_t g = index[i][c];
      counts[c] += (avg[g] - proj[i][g]) / collapse[i];
    }
  }
}

}  // namespace

std::vector<SharedSet> SharedSets(std::span<const MarginalSchema> schemas) {
  std::vector<SharedSet> out;
  if (schemas.size() < 2) return out;
  // Close the pairwise intersections under intersection: a set that is the
  // intersection of three or more schemas must be averaged before the
  // pairwise sets above it, or later steps undo earlier agreement.
  std::set<std::vector<int>> sets = {{}};
  for (size_t i = 0; i < schemas.size(); ++i) {
    for (size_t j = i + 1; j < schemas.size(); ++j) {
      sets.insert(Intersect(schemas[i].attrs(), schemas[j].attrs()));
    }
  }
  for (bool grew = true; grew;) {
    grew = false;
    const std::vector<std::vector<int>> snapshot(sets.begin(), sets.end());
    for (size_t i = 0; i < snapshot.size(); ++i) {
      for (size_t j = i + 1; j < snapshot.size(); ++j) {
        grew |= sets.insert(Intersect(snapshot[i], snapshot[j])).second;
      }
    }
  }
  for (const auto& attrs : sets) {
    SharedSet s{attrs, {}};
    for (size_t i = 0; i < schemas.size(); ++i) {
      if (ContainsAll(schemas[i].attrs(), attrs)) {
        s.members.push_back(static_cast<int>(i));
      }
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SharedSet& a, const SharedSet& b) {
                     if (a.attrs.size() != b.attrs.size()) {
                       return a.attrs.size() < b.attrs.size();
                     }
                     return a.attrs < b.attrs;
                   });
  return out;
}

absl::StatusOr<std::vector<MarginalTable>> EnforceConsistency(
    std::vector<MarginalTable> tables, ConsistencyReport* report) {
  std::vector<MarginalSchema> schemas;
  for (const auto& t : tables) schemas.push_back(t.schema());
  for (size_t i = 0; i < tables.size(); ++i) {
    for (size_t j = i + 1; j < tables.size(); ++j) {
      // Shared attributes must have matching sizes.
      for (size_t p = 0; p < schemas[i].attrs().size(); ++p) {
        const int a = schemas[i].attrs()[p];
        const auto& other = schemas[j].attrs();
        auto it = std::lower_bound(other.begin(), other.end(), a);
        if (it != other.end() && *it == a &&
            tables[i].sizes()[p] != tables[j].sizes()[it - other.begin()]) {
          return absl::InvalidArgumentError(absl::StrCat(
              "tables ", i, " and ", j, " disagree on the size of attribute ",
              a));
        }
      }
    }
  }
  for (const SharedSet& set : SharedSets(schemas)) {
    AverageOnSet(tables, set, report);
  }
  return tables;
}

absl::Status ClipAndRedistribute(MarginalTable& table) {
  double clipped = 0.0;
  double positive = 0.0;
  for (double c : table.counts()) {
    if (c < 0) clipped -= c;
    if (c > 0) positive += c;
  }
  if (clipped == 0.0) return absl::OkStatus();
  if (clipped > positive) {
    return absl::FailedPreconditionError(
        "marginal total is negative; noise overwhelms the counts");
  }
  const double keep = 1.0 - clipped / positive;
  for (double& c : table.mutable_counts()) c = c < 0 ? 0.0 : c * keep;
  return absl::OkStatus();
}

absl::StatusOr<std::vector<MarginalTable>> NonnegConsistent(
    std::vector<MarginalTable> tables, ConsistencyReport* report) {
  for (size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].total() < 0) {
      return absl::FailedPreconditionError(absl::StrCat(
          "marginal ", i, " has a negative total; budget too small"));
    }
  }
  auto min_count = [&] {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& t : tables) {
      for (double c : t.counts()) lo = std::min(lo, c);
    }
    return lo;
  };

  int rounds = 0;
  while (rounds < kMaxNonnegRounds && min_count() < 0) {
    std::vector<MarginalTable> before = tables;
    for (auto& t : tables) DPSYN_RETURN_IF_ERROR(ClipAndRedistribute(t));
    DPSYN_ASSIGN_OR_RETURN(tables, EnforceConsistency(std::move(tables), report));
    ++rounds;
    double change = 0.0;
    for (size_t i = 0; i < tables.size(); ++i) {
      for (int64_t c = 0; c < tables[i].num_cells(); ++c) {
        change = std::max(change, std::abs(tables[i].counts()[c] -
                                           before[i].counts()[c]));
      }
    }
    if (change < kNonnegChangeTol) break;
  }

  // Any negatives left are removed by moving every table toward the uniform
  // table with its total. Uniform tables with a common total are consistent
  // with each other, so the convex combination stays consistent.
  double mix = 0.0;
  for (const auto& t : tables) {
    const double uniform = t.total() / static_cast<double>(t.num_cells());
    for (double c : t.counts()) {
      if (c < 0) {
        if (uniform <= 0) {
          return absl::FailedPreconditionError(
              "cannot make a zero-total marginal non-negative");
        }
        mix = std::max(mix, -c / (uniform - c));
      }
    }
  }
  if (mix > 0) {
    for (auto& t : tables) {
      const double uniform = t.total() / static_cast<double>(t.num_cells());
      for (double& c : t.mutable_counts()) {
        // Rounding can leave -1e-17 where the mix lands exactly on zero.
        c = std::max(0.0, (1.0 - mix) * c + mix * uniform);
      }
    }
  }
  if (report) {
    report->nonneg_rounds = rounds;
    report->uniform_mix = mix;
  }
  return tables;
}

}  // namespace dpsyn
