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

#ifndef DPSYN_SYNTHESIS_H_
#define DPSYN_SYNTHESIS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsyn/domain.h"
#include "dpsyn/marginal.h"
#include "dpsyn/random.h"

namespace dpsyn {

struct DecaySchedule {
  enum class Kind { kStep, kExponential, kLinear, kSqrt };
  Kind kind = Kind::kStep;
  double rate = 0.5;  // k
  int step = 20;      // s, step decay only
};

// step: a0 * k^floor(t/s); exponential: a0 * e^(-kt); linear: a0 / (1 + kt);
// sqrt: a0 / sqrt(1 + kt).
double Decay(double alpha0, int t, const DecaySchedule& schedule);

enum class UpdateMethod { kGum, kMcf };

struct SynthesisConfig {
  double alpha0 = 0.2;
  DecaySchedule decay;
  int iterations = 100;
  // Duplicate probability at sweep t is min(0.9, 0.5 + dup_ramp * t).
  double dup_ramp = 0.01;
  uint64_t seed = 0;
  // Stop once a sweep improves the mean normalized L1 error by less than
  // this.
  double convergence_tol = 1e-4;
  UpdateMethod method = UpdateMethod::kGum;
};

double DuplicateProbability(const SynthesisConfig& config, int t);

struct UpdateStats {
  int64_t moved = 0;  // records moved into under-counted cells
  int64_t duplicated = 0;
  int64_t replaced = 0;
};

// Moves records from over-counted to under-counted cells of `target` (whose
// attribute indices refer to dataset columns; it is rescaled to n records).
// Under-counted cell c grows by min(target - current, alpha * current),
// with the cap floored at max(1, ceil(alpha * n / cells)) for empty cells;
// over-counted cells shrink in proportion to their surplus by the same
// total. Each move duplicates a whole row already in c with probability
// dup_prob (when c has one), and otherwise overwrites only the target's
// attributes of a row taken from an over-counted cell.
absl::StatusOr<UpdateStats> GumUpdate(Dataset& dataset,
                                      const MarginalTable& target,
                                      double alpha, double dup_prob, Rng& rng);

struct FlowMove {
  int64_t from_cell = 0;
  int64_t to_cell = 0;
  int64_t count = 0;

  bool operator==(const FlowMove&) const = default;
};

// Forces the dataset's marginal to the largest-remainder rounding of
// `target` by rewriting the target's attributes of surplus records. With
// unit costs any feasible transport is minimal, so surplus cells are matched
// to deficit cells greedily in index order.
absl::StatusOr<std::vector<FlowMove>> McfUpdate(Dataset& dataset,
                                                const MarginalTable& target,
                                                Rng& rng);

// Attributes as nodes, one hyperedge per marginal schema.
struct MarginalGraph {
  int num_attrs = 0;
  std::vector<std::vector<int>> edges;

  static MarginalGraph Build(std::span<const MarginalSchema> schemas,
                             int num_attrs);
  std::vector<int> Degrees() const;
  // Connected components over the given edges, each a sorted attribute list,
  // ordered by smallest attribute. Attributes in no edge are omitted.
  std::vector<std::vector<int>> Components(std::span<const int> edge_ids) const;
};

struct SweepLog {
  int component = 0;
  int iteration = 0;
  double alpha = 0.0;
  double error = 0.0;
};

// "component=0 iteration=3 alpha=0.2 error=0.0123"
std::string FormatSweepLog(const SweepLog& log);

struct SynthesisReport {
  std::vector<std::vector<int>> components;
  std::vector<int> appended;   // degree-1 attributes filled after the sweeps
  std::vector<int> uncovered;  // in no marginal; filled uniformly
  std::vector<double> initial_error;  // per component
  std::vector<double> final_error;    // per component
  std::vector<SweepLog> sweeps;
};

using SweepCallback = std::function<void(const SweepLog&)>;

// Mean over `targets` of the L1 distance between the dataset's normalized
// marginal and the normalized target.
absl::StatusOr<double> MeanNormalizedL1(const Dataset& dataset,
                                        std::span<const MarginalTable> targets);

// Synthesizes n records over `domain` matching consistent, non-negative
// marginals that each total n. Degree-1 attributes of 1- and 2-way
// marginals are appended afterwards; the rest is split into connected
// components, each fitted independently and joined column-wise.
absl::StatusOr<Dataset> Synthesize(std::span<const MarginalTable> marginals,
                                   const Domain& domain, int64_t n,
                                   const SynthesisConfig& config,
                                   SynthesisReport* report = nullptr,
                                   const SweepCallback& on_sweep = nullptr);

}  // namespace dpsyn

#endif  // DPSYN_SYNTHESIS_H_
