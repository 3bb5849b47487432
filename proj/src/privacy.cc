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

#include "dpsyn/privacy.h"

#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpsyn/random.h"
#include "dpsyn/status_macros.h"

namespace dpsyn {

absl::StatusOr<PrivacyParams> PrivacyParams::Create(double epsilon,
                                                    double delta,
                                                    Neighboring neighboring) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  if (!(delta >= 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1)");
  }
  return PrivacyParams{epsilon, delta, neighboring};
}

Sensitivity Sensitivity::ForMarginal(Neighboring neighboring) {
  if (neighboring == Neighboring::kBounded) return {2.0, std::numbers::sqrt2};
  return {1.0, 1.0};
}

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kLapBasic:
      return "lap_basic";
    case Strategy::kLapAdv:
      return "lap_adv";
    case Strategy::kLapZcdp:
      return "lap_zcdp";
    case Strategy::kGaussAdv:
      return "gauss_adv";
    case Strategy::kGaussZcdp:
      return "gauss_zcdp";
  }
  return "unknown";
}

std::optional<Strategy> StrategyFromName(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

NoiseDistribution DistributionOf(Strategy s) {
  return (s == Strategy::kGaussAdv || s == Strategy::kGaussZcdp)
             ? NoiseDistribution::kGaussian
             : NoiseDistribution::kLaplace;
}

absl::StatusOr<double> LaplaceStd(double eps_per, double gs) {
  if (!(eps_per > 0) || !(gs > 0)) {
    return absl::InvalidArgumentError(
        "Laplace std needs positive epsilon and sensitivity");
  }
  return std::numbers::sqrt2 * gs / eps_per;
}

absl::StatusOr<double> GaussianSigma(double eps, double delta, double l2) {
  if (!(eps > 0)) return absl::InvalidArgumentError("epsilon must be > 0");
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (!(l2 > 0)) return absl::InvalidArgumentError("L2 sensitivity must be > 0");
  return l2 * std::sqrt(2.0 * std::log(1.25 / delta)) / eps;
}

absl::StatusOr<ZcdpBudget> ZcdpFromDp(double eps, double delta) {
  if (!(eps > 0)) return absl::InvalidArgumentError("epsilon must be > 0");
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  const double log_inv_delta = -std::log(delta);
  // Positive root of x^2 + 2 sqrt(L) x - eps = 0 with x = sqrt(rho), written
  // as eps / (sqrt(L + eps) + sqrt(L)) to avoid cancellation for small eps.
  const double root =
      eps / (std::sqrt(log_inv_delta + eps) + std::sqrt(log_inv_delta));
  return ZcdpBudget{root * root};
}

double DpEpsilonFromZcdp(ZcdpBudget budget, double delta) {
  return budget.rho + 2.0 * std::sqrt(budget.rho * -std::log(delta));
}

double AdvancedCompositionEpsilon(double eps0, double delta_prime, int k) {
  return eps0 * std::sqrt(2.0 * k * -std::log(delta_prime)) +
         k * eps0 * std::expm1(eps0);
}

absl::StatusOr<double> AdvancedEpsPer(double eps, double delta_prime, int k) {
  if (!(eps > 0)) return absl::InvalidArgumentError("epsilon must be > 0");
  if (!(delta_prime > 0 && delta_prime < 1)) {
    return absl::InvalidArgumentError("delta' must lie in (0, 1)");
  }
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  // The composed epsilon is strictly increasing in eps0 and 0 at eps0 = 0.
  double lo = 0.0;
  double hi = eps;
  while (AdvancedCompositionEpsilon(hi, delta_prime, k) <= eps) hi *= 2.0;
  for (int i = 0; i < 400 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (AdvancedCompositionEpsilon(mid, delta_prime, k) <= eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!(lo > 0)) {
    return absl::InternalError("advanced composition has no positive solution");
  }
  return lo;
}

absl::StatusOr<std::optional<double>> StrategyStd(Strategy strategy,
                                                  const PrivacyParams& params,
                                                  int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  const Sensitivity sens = Sensitivity::ForMarginal(params.neighboring);
  const double eps = params.epsilon;
  const double delta = params.delta;
  if (strategy != Strategy::kLapBasic && delta <= 0) {
    return std::optional<double>();
  }
  switch (strategy) {
    case Strategy::kLapBasic:
      return LaplaceStd(eps / k, sens.l1);
    case Strategy::kLapAdv: {
      DPSYN_ASSIGN_OR_RETURN(double eps0, AdvancedEpsPer(eps, delta, k));
      return LaplaceStd(eps0, sens.l1);
    }
    case Strategy::kLapZcdp: {
      DPSYN_ASSIGN_OR_RETURN(ZcdpBudget budget, ZcdpFromDp(eps, delta));
      // Lap(GS * x) is 1/(2x^2)-zCDP; spend rho/k on each marginal.
      const double x = std::sqrt(k / (2.0 * budget.rho));
      return std::numbers::sqrt2 * sens.l1 * x;
    }
    case Strategy::kGaussAdv: {
      const double delta0 = delta / (2.0 * k);
      DPSYN_ASSIGN_OR_RETURN(double eps0, AdvancedEpsPer(eps, delta / 2.0, k));
      return GaussianSigma(eps0, delta0, sens.l2);
    }
    case Strategy::kGaussZcdp: {
      DPSYN_ASSIGN_OR_RETURN(ZcdpBudget budget, ZcdpFromDp(eps, delta));
      return sens.l2 * std::sqrt(k / (2.0 * budget.rho));
    }
  }
  return absl::InternalError("unknown strategy");
}

absl::StatusOr<NoisePlan> PlanNoise(const PrivacyParams& params, int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  NoisePlan plan;
  plan.k = k;
  bool found = false;
  for (size_t i = 0; i < kAllStrategies.size(); ++i) {
    DPSYN_ASSIGN_OR_RETURN(plan.candidate_std[i],
                           StrategyStd(kAllStrategies[i], params, k));
    const auto& std = plan.candidate_std[i];
    if (std && (!found || *std < plan.per_marginal_std)) {
      plan.strategy = kAllStrategies[i];
      plan.per_marginal_std = *std;
      found = true;
    }
  }
  if (!found) return absl::InvalidArgumentError("no noise strategy available");
  plan.distribution = DistributionOf(plan.strategy);
  if (plan.strategy == Strategy::kGaussAdv) {
    auto eps0 = AdvancedEpsPer(params.epsilon, params.delta / 2.0, k);
    plan.gaussian_bound_extrapolated = eps0.ok() && *eps0 >= 1.0;
  }
  return plan;
}

PrivacyGuarantee ComposedGuarantee(const NoisePlan& plan,
                                   const PrivacyParams& params) {
  const Sensitivity sens = Sensitivity::ForMarginal(params.neighboring);
  const double std = plan.per_marginal_std;
  const int k = plan.k;
  switch (plan.strategy) {
    case Strategy::kLapBasic: {
      const double eps0 = std::numbers::sqrt2 * sens.l1 / std;
      return {k * eps0, 0.0};
    }
    case Strategy::kLapAdv: {
      const double eps0 = std::numbers::sqrt2 * sens.l1 / std;
      return {AdvancedCompositionEpsilon(eps0, params.delta, k), params.delta};
    }
    case Strategy::kLapZcdp: {
      const double x = std / (std::numbers::sqrt2 * sens.l1);
      const ZcdpBudget total{k / (2.0 * x * x)};
      return {DpEpsilonFromZcdp(total, params.delta), params.delta};
    }
    case Strategy::kGaussAdv: {
      const double delta0 = params.delta / (2.0 * k);
      const double eps0 =
          sens.l2 * std::sqrt(2.0 * std::log(1.25 / delta0)) / std;
      return {AdvancedCompositionEpsilon(eps0, params.delta / 2.0, k),
              k * delta0 + params.delta / 2.0};
    }
    case Strategy::kGaussZcdp: {
      const ZcdpBudget total{k * sens.l2 * sens.l2 / (2.0 * std * std)};
      return {DpEpsilonFromZcdp(total, params.delta), params.delta};
    }
  }
  return {};
}

absl::StatusOr<MarginalTable> AddNoise(const MarginalTable& table, double std,
                                       NoiseDistribution distribution,
                                       uint64_t seed) {
  if (!(std >= 0) || !std::isfinite(std)) {
    return absl::InvalidArgumentError("noise std must be finite and >= 0");
  }
  MarginalTable out = table;
  out.set_noise_std(std);
  if (std == 0.0) return out;
  Rng rng(seed);
  const double laplace_scale = std / std::numbers::sqrt2;
  for (double& c : out.mutable_counts()) {
    c += distribution == NoiseDistribution::kLaplace ? rng.Laplace(laplace_scale)
                                                     : rng.Gaussian(std);
  }
  return out;
}

}  // namespace dpsyn
