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

#include "dpsyn/evaluation.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpsyn/marginal.h"
#include "dpsyn/status_macros.h"
#include "json.hpp"

namespace dpsyn {
namespace {

absl::Status CheckComparable(const Dataset& orig, const Dataset& synth) {
  if (!(orig.domain() == synth.domain())) {
    return absl::InvalidArgumentError("datasets do not share a domain");
  }
  if (orig.d() == 0) return absl::InvalidArgumentError("domain has no attributes");
  if (orig.n() == 0 || synth.n() == 0) {
    return absl::InvalidArgumentError("empty dataset");
  }
  return absl::OkStatus();
}

std::vector<int> SampleSubset(int d, int k, Rng& rng) {
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.UniformInt(d - i));
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

int64_t CountMatches(const Dataset& data, const RangeQuery& q) {
  int64_t hits = 0;
  for (int64_t r = 0; r < data.n(); ++r) hits += q.Matches(data.row(r));
  return hits;
}

}  // namespace

absl::StatusOr<double> DensityScore(const Dataset& orig, const Dataset& synth,
                                    int trials, int arity, uint64_t seed) {
  DPSYN_RETURN_IF_ERROR(CheckComparable(orig, synth));
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (arity < 1 || arity > orig.d()) {
    return absl::InvalidArgumentError(
        absl::StrCat("arity ", arity, " does not fit ", orig.d(), " attributes"));
  }
  Rng rng(DeriveSeed(seed, "density"));
  double penalty = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::vector<int> attrs = SampleSubset(orig.d(), arity, rng);
    DPSYN_ASSIGN_OR_RETURN(MarginalSchema schema,
                           MarginalSchema::Create(attrs, orig.d()));
    DPSYN_ASSIGN_OR_RETURN(MarginalTable a, ComputeMarginal(orig, schema));
    DPSYN_ASSIGN_OR_RETURN(MarginalTable b, ComputeMarginal(synth, schema));
    DPSYN_ASSIGN_OR_RETURN(MarginalTable an, a.Normalized());
    DPSYN_ASSIGN_OR_RETURN(MarginalTable bn, b.Normalized());
    DPSYN_ASSIGN_OR_RETURN(double dist, L1Distance(an, bn));
    penalty += dist;
  }
  const double s = penalty / trials;
  return std::clamp(kMaxScore * (1.0 - s / 2.0), 0.0, kMaxScore);
}

bool RangeQuery::Matches(std::span<const uint32_t> row) const {
  for (size_t i = 0; i < attrs.size(); ++i) {
    if (!allowed[i][row[attrs[i]]]) return false;
  }
  return true;
}

RangeQuery SampleRangeQuery(const Domain& domain, Rng& rng) {
  RangeQuery q;
  while (q.attrs.empty()) {
    for (int a = 0; a < domain.size(); ++a) {
      if (rng.UniformInt(3) != 0) continue;
      const AttributeSpec& spec = domain.attr(a);
      const int m = spec.size();
      std::vector<bool> allowed(m, false);
      if (spec.is_numeric()) {
        // Uniform over the m(m+1)/2 contiguous bin ranges.
        const uint64_t pick = rng.UniformInt(static_cast<uint64_t>(m) * (m + 1) / 2);
        uint64_t seen = 0;
        for (int lo = 0; lo < m; ++lo) {
          const uint64_t here = m - lo;
          if (pick < seen + here) {
            const int hi = lo + static_cast<int>(pick - seen);
            for (int v = lo; v <= hi; ++v) allowed[v] = true;
            break;
          }
          seen += here;
        }
      } else {
        const int count = 1 + static_cast<int>(rng.UniformInt(m));
        std::vector<int> values(m);
        std::iota(values.begin(), values.end(), 0);
        for (int i = 0; i < count; ++i) {
          const int j = i + static_cast<int>(rng.UniformInt(m - i));
          std::swap(values[i], values[j]);
          allowed[values[i]] = true;
        }
      }
      q.attrs.push_back(a);
      q.allowed.push_back(std::move(allowed));
    }
  }
  return q;
}

double QueryLogRatio(double f_orig, double f_synth) {
  return std::log(std::max(f_synth, kQueryFloor) / f_orig);
}

double RangeScoreFromLogRatios(std::span<const double> log_ratios) {
  if (log_ratios.empty()) return kMaxScore;
  double sq = 0.0;
  for (double d : log_ratios) sq += d * d;
  const double rms = std::sqrt(sq / static_cast<double>(log_ratios.size()));
  return kMaxScore * std::max(0.0, 1.0 - rms / std::log(1e3));
}

absl::StatusOr<double> RangeQueryScore(const Dataset& orig,
                                       const Dataset& synth, int trials,
                                       uint64_t seed) {
  if (!(orig.domain() == synth.domain())) {
    return absl::InvalidArgumentError("datasets do not share a domain");
  }
  if (orig.d() == 0) return absl::InvalidArgumentError("domain has no attributes");
  if (orig.n() == 0) return absl::InvalidArgumentError("empty original dataset");
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  constexpr int kMaxResamples = 100000;
  Rng rng(DeriveSeed(seed, "range"));
  std::vector<double> log_ratios;
  log_ratios.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    int attempts = 0;
    while (true) {
      if (++attempts > kMaxResamples) {
        return absl::FailedPreconditionError(
            "range query sampling found no supported query");
      }
      const RangeQuery q = SampleRangeQuery(orig.domain(), rng);
      const int64_t hits = CountMatches(orig, q);
      if (hits == 0) continue;
      const double f_o = static_cast<double>(hits) / orig.n();
      const double f_p = synth.n() == 0 ? 0.0
                                        : static_cast<double>(CountMatches(synth, q)) /
                                              synth.n();
      log_ratios.push_back(QueryLogRatio(f_o, f_p));
      break;
    }
  }
  return RangeScoreFromLogRatios(log_ratios);
}

double GiniIndex(std::span<const double> values) {
  const size_t m = values.size();
  if (m == 0) return 0.0;
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (!(sum > 0)) return 0.0;
  // sum_ij |x_i - x_j| = 2 sum_i (2i - m + 1) x_(i) over ascending order.
  double pair_sum = 0.0;
  for (size_t i = 0; i < m; ++i) {
    pair_sum += (2.0 * static_cast<double>(i) - static_cast<double>(m) + 1.0) * x[i];
  }
  pair_sum *= 2.0;
  const double mean = sum / static_cast<double>(m);
  return pair_sum / (2.0 * static_cast<double>(m) * static_cast<double>(m) * mean);
}

namespace {

struct CityStats {
  std::vector<double> incomes;
  double sum[2] = {0.0, 0.0};
  int64_t count[2] = {0, 0};
};

std::map<uint32_t, CityStats> CollectCities(const Dataset& data, int city,
                                            int sex, int income,
                                            uint32_t male, uint32_t female) {
  std::map<uint32_t, CityStats> out;
  const AttributeSpec& spec = data.domain().attr(income);
  for (int64_t r = 0; r < data.n(); ++r) {
    CityStats& s = out[data.at(r, city)];
    const double x = spec.Representative(data.at(r, income));
    s.incomes.push_back(x);
    const uint32_t g = data.at(r, sex);
    if (g == male) {
      s.sum[0] += x;
      ++s.count[0];
    } else if (g == female) {
      s.sum[1] += x;
      ++s.count[1];
    }
  }
  return out;
}

std::optional<double> PayGap(const CityStats& s) {
  if (s.count[0] == 0 || s.count[1] == 0) return std::nullopt;
  return s.sum[0] / s.count[0] - s.sum[1] / s.count[1];
}

// Rank 1 is the largest gap; ties keep city order.
std::vector<int> RankDescending(const std::vector<double>& gaps) {
  std::vector<int> order(gaps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gaps[a] > gaps[b]; });
  std::vector<int> rank(gaps.size());
  for (size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i) + 1;
  return rank;
}

absl::StatusOr<uint32_t> SexValue(const AttributeSpec& spec,
                                  const std::optional<std::string>& label,
                                  uint32_t fallback) {
  if (!label) {
    if (static_cast<int>(fallback) >= spec.size()) {
      return absl::InvalidArgumentError("sex attribute needs two values");
    }
    return fallback;
  }
  return spec.Encode(*label);
}

}  // namespace

absl::StatusOr<GiniResult> GiniGenderScore(const Dataset& orig,
                                           const Dataset& synth,
                                           const GiniOptions& options) {
  DPSYN_RETURN_IF_ERROR(CheckComparable(orig, synth));
  const Domain& domain = orig.domain();
  auto find = [&](const std::string& name) -> absl::StatusOr<int> {
    auto idx = domain.IndexOf(name);
    if (!idx) return absl::InvalidArgumentError(absl::StrCat("no attribute ", name));
    return *idx;
  };
  DPSYN_ASSIGN_OR_RETURN(int city, find(options.city_attr));
  DPSYN_ASSIGN_OR_RETURN(int sex, find(options.sex_attr));
  DPSYN_ASSIGN_OR_RETURN(int income, find(options.income_attr));
  if (!domain.attr(income).is_numeric()) {
    return absl::InvalidArgumentError("income attribute must be numeric");
  }
  DPSYN_ASSIGN_OR_RETURN(uint32_t male,
                         SexValue(domain.attr(sex), options.male_label, 0));
  DPSYN_ASSIGN_OR_RETURN(uint32_t female,
                         SexValue(domain.attr(sex), options.female_label, 1));
  if (male == female) {
    return absl::InvalidArgumentError("male and female labels coincide");
  }

  const auto a = CollectCities(orig, city, sex, income, male, female);
  const auto b = CollectCities(synth, city, sex, income, male, female);
  GiniResult result;
  double gini_sq = 0.0;
  int gini_cities = 0;
  std::vector<double> gap_orig;
  std::vector<double> gap_synth;
  for (const auto& [value, stats] : a) {
    auto it = b.find(value);
    bool skipped = false;
    if (stats.incomes.size() >= 2 && it != b.end() &&
        it->second.incomes.size() >= 2) {
      const double diff = GiniIndex(stats.incomes) - GiniIndex(it->second.incomes);
      gini_sq += diff * diff;
      ++gini_cities;
    } else {
      skipped = true;
    }
    const auto ga = PayGap(stats);
    const auto gb = it == b.end() ? std::nullopt : PayGap(it->second);
    if (ga && gb) {
      gap_orig.push_back(*ga);
      gap_synth.push_back(*gb);
    } else {
      skipped = true;
    }
    result.skipped_cities += skipped;
  }
  if (gini_cities == 0 && gap_orig.empty()) {
    return absl::FailedPreconditionError("no city qualifies for scoring");
  }
  result.gini_msd = gini_cities > 0 ? gini_sq / gini_cities : 0.0;
  const size_t c = gap_orig.size();
  if (c > 1) {
    const auto ra = RankDescending(gap_orig);
    const auto rb = RankDescending(gap_synth);
    double sq = 0.0;
    for (size_t i = 0; i < c; ++i) sq += std::pow(ra[i] - rb[i], 2);
    result.rank_msd = sq / static_cast<double>(c);
  }
  const double e1 = std::min(1.0, result.gini_msd / 0.25);
  const double e2 =
      c > 1 ? std::min(1.0, result.rank_msd / std::pow(c - 1.0, 2)) : 0.0;
  result.score = kMaxScore * std::max(0.0, 1.0 - (e1 + e2) / 2.0);
  return result;
}

std::string ScoreReportToJson(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["density"] = report.density;
  j["range"] = report.range;
  j["gini_gap"] = report.gini_gap ? nlohmann::ordered_json(*report.gini_gap)
                                  : nlohmann::ordered_json(nullptr);
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["skipped_cities"] = report.skipped_cities;
  return j.dump(2) + "\n";
}

}  // namespace dpsyn
