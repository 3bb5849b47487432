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

#ifndef DPSYN_EVALUATION_H_
#define DPSYN_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsyn/domain.h"
#include "dpsyn/random.h"

namespace dpsyn {

inline constexpr double kMaxScore = 1e6;
inline constexpr double kQueryFloor = 1e-6;

// 10^6 * (1 - mean L1 / 2) over `trials` random attribute subsets of size
// `arity`.
absl::StatusOr<double> DensityScore(const Dataset& orig, const Dataset& synth,
                                    int trials = 300, int arity = 3,
                                    uint64_t seed = 0);

// One condition per selected attribute: the set of allowed values.
// Numeric attributes get a contiguous bin range.
struct RangeQuery {
  std::vector<int> attrs;
  std::vector<std::vector<bool>> allowed;

  bool Matches(std::span<const uint32_t> row) const;
};

// Draws a query with at least one selected attribute. Draws depend only on
// the domain and the generator state.
RangeQuery SampleRangeQuery(const Domain& domain, Rng& rng);

// ln(max(f_p, 10^-6) / f_o).
double QueryLogRatio(double f_orig, double f_synth);

// 10^6 * max(0, 1 - RMS(d) / ln(10^3)).
double RangeScoreFromLogRatios(std::span<const double> log_ratios);

absl::StatusOr<double> RangeQueryScore(const Dataset& orig,
                                       const Dataset& synth, int trials = 300,
                                       uint64_t seed = 0);

struct GiniOptions {
  std::string city_attr;
  std::string sex_attr;
  std::string income_attr;
  // Default to the first and second label of the sex attribute.
  std::optional<std::string> male_label;
  std::optional<std::string> female_label;
};

struct GiniResult {
  double score = 0.0;
  double gini_msd = 0.0;
  double rank_msd = 0.0;
  int skipped_cities = 0;
};

// Gini coefficient sum_ij |x_i - x_j| / (2 m^2 mean). Zero for empty input
// or zero mean.
double GiniIndex(std::span<const double> values);

absl::StatusOr<GiniResult> GiniGenderScore(const Dataset& orig,
                                           const Dataset& synth,
                                           const GiniOptions& options);

struct ScoreReport {
  double density = 0.0;
  double range = 0.0;
  std::optional<double> gini_gap;
  int trials = 0;
  uint64_t seed = 0;
  int skipped_cities = 0;
};

// Pretty-printed JSON object with a trailing newline.
std::string ScoreReportToJson(const ScoreReport& report);

}  // namespace dpsyn

#endif  // DPSYN_EVALUATION_H_
