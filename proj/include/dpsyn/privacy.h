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

#ifndef DPSYN_PRIVACY_H_
#define DPSYN_PRIVACY_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "absl/status/statusor.h"
#include "dpsyn/marginal.h"

namespace dpsyn {

// Unbounded: neighbors differ by adding/removing a record.
// Bounded: neighbors differ by changing one record.
enum class Neighboring { kUnbounded, kBounded };

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 0.0;
  Neighboring neighboring = Neighboring::kUnbounded;

  // Requires epsilon > 0 and 0 <= delta < 1.
  static absl::StatusOr<PrivacyParams> Create(double epsilon, double delta,
                                              Neighboring neighboring);
};

// Global L1 / L2 sensitivity of publishing one marginal table.
struct Sensitivity {
  double l1 = 1.0;
  double l2 = 1.0;

  static Sensitivity ForMarginal(Neighboring neighboring);
};

struct ZcdpBudget {
  double rho = 0.0;
};

// zCDP budgets compose additively.
inline ZcdpBudget Compose(ZcdpBudget a, ZcdpBudget b) {
  return {a.rho + b.rho};
}

enum class Strategy { kLapBasic, kLapAdv, kLapZcdp, kGaussAdv, kGaussZcdp };
inline constexpr std::array<Strategy, 5> kAllStrategies = {
    Strategy::kLapBasic, Strategy::kLapAdv, Strategy::kLapZcdp,
    Strategy::kGaussAdv, Strategy::kGaussZcdp};

std::string_view StrategyName(Strategy s);
std::optional<Strategy> StrategyFromName(std::string_view name);

enum class NoiseDistribution { kLaplace, kGaussian };
NoiseDistribution DistributionOf(Strategy s);

struct NoisePlan {
  Strategy strategy = Strategy::kLapBasic;
  NoiseDistribution distribution = NoiseDistribution::kLaplace;
  int k = 1;
  double per_marginal_std = 0.0;
  // Std of each strategy, indexed like kAllStrategies; empty when the
  // strategy is unavailable (every strategy but lap_basic needs delta > 0).
  std::array<std::optional<double>, 5> candidate_std;
  // Set when the chosen strategy is gauss_adv and its per-marginal epsilon
  // is >= 1, outside the range where the classic Gaussian bound is proven.
  bool gaussian_bound_extrapolated = false;
};

// Standard deviation of Lap(gs / eps_per): sqrt(2) * gs / eps_per.
absl::StatusOr<double> LaplaceStd(double eps_per, double gs);

// sigma = l2 * sqrt(2 ln(1.25 / delta)) / eps.
absl::StatusOr<double> GaussianSigma(double eps, double delta, double l2);

// The rho whose (eps, delta)-DP conversion rho + 2 sqrt(rho ln(1/delta))
// equals eps.
absl::StatusOr<ZcdpBudget> ZcdpFromDp(double eps, double delta);
double DpEpsilonFromZcdp(ZcdpBudget budget, double delta);

// Total epsilon of k-fold composition of eps0-DP mechanisms under the
// advanced composition theorem with slack delta_prime.
double AdvancedCompositionEpsilon(double eps0, double delta_prime, int k);

// Largest eps0 whose k-fold advanced composition stays within eps.
absl::StatusOr<double> AdvancedEpsPer(double eps, double delta_prime, int k);

// Per-marginal noise std of `strategy` for k marginals; nullopt when the
// strategy needs delta > 0 and delta is 0.
absl::StatusOr<std::optional<double>> StrategyStd(Strategy strategy,
                                                  const PrivacyParams& params,
                                                  int k);

// Evaluates all five strategies and picks the smallest std (ties go to the
// earlier strategy in kAllStrategies).
absl::StatusOr<NoisePlan> PlanNoise(const PrivacyParams& params, int k);

struct PrivacyGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Recomputes, from the plan's per-marginal std alone, the (eps, delta)
// guarantee of releasing k marginals under the plan's composition theorem.
PrivacyGuarantee ComposedGuarantee(const NoisePlan& plan,
                                   const PrivacyParams& params);

// Adds i.i.d. noise with standard deviation `std` to every cell and records
// `std` as the table's noise_std.
absl::StatusOr<MarginalTable> AddNoise(const MarginalTable& table, double std,
                                       NoiseDistribution distribution,
                                       uint64_t seed);

}  // namespace dpsyn

#endif  // DPSYN_PRIVACY_H_
