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

#include "dpsyn/synthesis.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpsyn/consistency.h"
#include "dpsyn/status_macros.h"

namespace dpsyn {
namespace {

int64_t CellOf(std::span<const uint32_t> row, std::span<const int> attrs,
               std::span<const int> sizes) {
  int64_t flat = 0;
  for (size_t i = 0; i < attrs.size(); ++i) flat = flat * sizes[i] + row[attrs[i]];
  return flat;
}

absl::Status CheckTargetFits(const Dataset& dataset,
                             const MarginalTable& target) {
  for (size_t i = 0; i < target.attrs().size(); ++i) {
    const int a = target.attrs()[i];
    if (a >= dataset.d() || dataset.domain().attr(a).size() != target.sizes()[i]) {
      return absl::InvalidArgumentError(
          "target marginal does not fit the dataset domain");
    }
  }
  return absl::OkStatus();
}

// Target counts rescaled to n records, negatives treated as zero.
absl::StatusOr<std::vector<double>> ScaledTarget(const MarginalTable& target,
                                                 int64_t n) {
  std::vector<double> counts = target.counts();
  double total = 0.0;
  for (double& c : counts) {
    c = std::max(0.0, c);
    total += c;
  }
  if (!(total > 0)) {
    return absl::InvalidArgumentError("target marginal has no positive mass");
  }
  for (double& c : counts) c *= static_cast<double>(n) / total;
  return counts;
}

// Largest-remainder apportionment with per-entry upper bounds. The caps must
// sum to at least `total`.
std::vector<int64_t> ApportionCapped(std::span<const double> weights,
                                     int64_t total,
                                     std::span<const int64_t> caps) {
  std::vector<int64_t> out = LargestRemainder(weights, total);
  int64_t excess = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i] > caps[i]) {
      excess += out[i] - caps[i];
      out[i] = caps[i];
    }
  }
  if (excess == 0) return out;
  std::vector<size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return weights[a] > weights[b]; });
  for (size_t i : order) {
    const int64_t room = std::min(excess, caps[i] - out[i]);
    out[i] += room;
    excess -= room;
    if (excess == 0) break;
  }
  return out;
}

// Picks `count` distinct entries of `pool` uniformly at random.
std::vector<int64_t> SampleWithoutReplacement(std::vector<int64_t> pool,
                                              int64_t count, Rng& rng) {
  for (int64_t i = 0; i < count; ++i) {
    const size_t j = i + rng.UniformInt(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<size_t>(count));
  return pool;
}

std::vector<std::vector<int64_t>> RowsByCell(const Dataset& dataset,
                                             const MarginalTable& target) {
  std::vector<std::vector<int64_t>> rows(static_cast<size_t>(target.num_cells()));
  for (int64_t r = 0; r < dataset.n(); ++r) {
    rows[CellOf(dataset.row(r), target.attrs(), target.sizes())].push_back(r);
  }
  return rows;
}

void WriteCell(Dataset& dataset, int64_t row, const MarginalTable& target,
               int64_t cell) {
  for (size_t i = target.attrs().size(); i-- > 0;) {
    dataset.set(row, target.attrs()[i],
                static_cast<uint32_t>(cell % target.sizes()[i]));
    cell /= target.sizes()[i];
  }
}

}  // namespace

double Decay(double alpha0, int t, const DecaySchedule& schedule) {
  const double k = schedule.rate;
  switch (schedule.kind) {
    case DecaySchedule::Kind::kStep:
      return alpha0 * std::pow(k, std::floor(static_cast<double>(t) /
                                             std::max(1, schedule.step)));
    case DecaySchedule::Kind::kExponential:
      return alpha0 * std::exp(-k * t);
    case DecaySchedule::Kind::kLinear:
      return alpha0 / (1.0 + k * t);
    case DecaySchedule::Kind::kSqrt:
      return alpha0 / std::sqrt(1.0 + k * t);
  }
  return alpha0;
}

double DuplicateProbability(const SynthesisConfig& config, int t) {
  return std::min(0.9, 0.5 + config.dup_ramp * t);
}

absl::StatusOr<UpdateStats> GumUpdate(Dataset& dataset,
                                      const MarginalTable& target,
                                      double alpha, double dup_prob, Rng& rng) {
  if (!(alpha > 0)) return absl::InvalidArgumentError("alpha must be > 0");
  DPSYN_RETURN_IF_ERROR(CheckTargetFits(dataset, target));
  UpdateStats stats;
  const int64_t n = dataset.n();
  if (n == 0) return stats;
  DPSYN_ASSIGN_OR_RETURN(std::vector<double> want, ScaledTarget(target, n));
  const int64_t cells = target.num_cells();
  const std::vector<std::vector<int64_t>> rows = RowsByCell(dataset, target);

  const double empty_cap =
      std::max(1.0, std::ceil(alpha * static_cast<double>(n) / cells));
  std::vector<double> increase(static_cast<size_t>(cells), 0.0);
  std::vector<double> surplus(static_cast<size_t>(cells), 0.0);
  double total_increase = 0.0;
  double total_surplus = 0.0;
  for (int64_t c = 0; c < cells; ++c) {
    const double have = static_cast<double>(rows[c].size());
    if (have < want[c]) {
      const double cap = have > 0 ? alpha * have : empty_cap;
      increase[c] = std::min(want[c] - have, cap);
      total_increase += increase[c];
    } else if (have > want[c]) {
      surplus[c] = have - want[c];
      total_surplus += surplus[c];
    }
  }
  // Surpluses are scaled to the total increase; since the totals agree,
  // total_increase never exceeds total_surplus by more than rounding.
  const int64_t moves =
      std::llround(std::min(total_increase, total_surplus));
  if (moves <= 0) return stats;

  std::vector<int64_t> caps(static_cast<size_t>(cells));
  for (int64_t c = 0; c < cells; ++c) {
    caps[c] = surplus[c] > 0 ? static_cast<int64_t>(rows[c].size()) : 0;
  }
  const std::vector<int64_t> add = LargestRemainder(increase, moves);
  const std::vector<int64_t> remove = ApportionCapped(surplus, moves, caps);

  std::vector<int64_t> freed;
  freed.reserve(static_cast<size_t>(moves));
  for (int64_t c = 0; c < cells; ++c) {
    if (remove[c] == 0) continue;
    const auto picked = SampleWithoutReplacement(rows[c], remove[c], rng);
    freed.insert(freed.end(), picked.begin(), picked.end());
  }
  rng.Shuffle(freed);

  size_t next = 0;
  const int d = dataset.d();
  for (int64_t c = 0; c < cells; ++c) {
    for (int64_t u = 0; u < add[c]; ++u) {
      const int64_t r = freed[next++];
      // Donors are rows already in c before this update; freed rows come
      // from over-counted cells, so a donor is never overwritten here.
      if (!rows[c].empty() && rng.Bernoulli(dup_prob)) {
        const int64_t donor = rows[c][rng.UniformInt(rows[c].size())];
        auto src = dataset.row(donor);
        std::copy(src.begin(), src.begin() + d, dataset.mutable_row(r).begin());
        ++stats.duplicated;
      } else {
        WriteCell(dataset, r, target, c);
        ++stats.replaced;
      }
      ++stats.moved;
    }
  }
  return stats;
}

absl::StatusOr<std::vector<FlowMove>> McfUpdate(Dataset& dataset,
                                                const MarginalTable& target,
                                                Rng& rng) {
  DPSYN_RETURN_IF_ERROR(CheckTargetFits(dataset, target));
  std::vector<FlowMove> flow;
  const int64_t n = dataset.n();
  if (n == 0) return flow;
  DPSYN_ASSIGN_OR_RETURN(std::vector<double> want, ScaledTarget(target, n));
  const std::vector<int64_t> goal = LargestRemainder(want, n);
  const std::vector<std::vector<int64_t>> rows = RowsByCell(dataset, target);
  const int64_t cells = target.num_cells();

  std::vector<std::pair<int64_t, std::vector<int64_t>>> sources;  // cell, rows
  std::vector<std::pair<int64_t, int64_t>> sinks;                 // cell, need
  for (int64_t c = 0; c < cells; ++c) {
    const int64_t have = static_cast<int64_t>(rows[c].size());
    if (have > goal[c]) {
      sources.emplace_back(c, SampleWithoutReplacement(rows[c], have - goal[c], rng));
    } else if (have < goal[c]) {
      sinks.emplace_back(c, goal[c] - have);
    }
  }
  size_t sink = 0;
  for (auto& [from, movers] : sources) {
    size_t pos = 0;
    while (pos < movers.size()) {
      auto& [to, need] = sinks[sink];
      const int64_t take =
          std::min<int64_t>(need, static_cast<int64_t>(movers.size() - pos));
      for (int64_t i = 0; i < take; ++i) WriteCell(dataset, movers[pos++], target, to);
      flow.push_back({from, to, take});
      need -= take;
      if (need == 0) ++sink;
    }
  }
  return flow;
}

MarginalGraph MarginalGraph::Build(std::span<const MarginalSchema> schemas,
                                   int num_attrs) {
  MarginalGraph g;
  g.num_attrs = num_attrs;
  for (const auto& s : schemas) g.edges.push_back(s.attrs());
  return g;
}

std::vector<int> MarginalGraph::Degrees() const {
  std::vector<int> degree(num_attrs, 0);
  for (const auto& e : edges) {
    for (int a : e) ++degree[a];
  }
  return degree;
}

std::vector<std::vector<int>> MarginalGraph::Components(
    std::span<const int> edge_ids) const {
  std::vector<int> parent(num_attrs);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<bool> used(num_attrs, false);
  for (int id : edge_ids) {
    const auto& e = edges[id];
    for (int a : e) {
      used[a] = true;
      const int ra = find(a);
      const int rb = find(e[0]);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  std::vector<std::vector<int>> out;
  std::vector<int> slot(num_attrs, -1);
  for (int a = 0; a < num_attrs; ++a) {
    if (!used[a]) continue;
    const int root = find(a);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[root]].push_back(a);
  }
  return out;
}

std::string FormatSweepLog(const SweepLog& log) {
  return absl::StrFormat("component=%d iteration=%d alpha=%.6g error=%.6g",
                         log.component, log.iteration, log.alpha, log.error);
}

absl::StatusOr<double> MeanNormalizedL1(const Dataset& dataset,
                                        std::span<const MarginalTable> targets) {
  if (targets.empty()) return 0.0;
  if (dataset.n() == 0) return absl::InvalidArgumentError("empty dataset");
  double sum = 0.0;
  for (const MarginalTable& t : targets) {
    DPSYN_ASSIGN_OR_RETURN(MarginalTable have, ComputeMarginal(dataset, t.schema()));
    DPSYN_ASSIGN_OR_RETURN(MarginalTable have_n, have.Normalized());
    DPSYN_ASSIGN_OR_RETURN(MarginalTable want_n, t.Normalized());
    have_n.set_noise_std(want_n.noise_std());
    DPSYN_ASSIGN_OR_RETURN(double dist, L1Distance(have_n, want_n));
    sum += dist;
  }
  return sum / static_cast<double>(targets.size());
}

namespace {

absl::Status ValidateMarginals(std::span<const MarginalTable> marginals,
                               const Domain& domain, int64_t n) {
  const double scale = std::max<double>(1.0, static_cast<double>(n));
  for (size_t i = 0; i < marginals.size(); ++i) {
    const MarginalTable& m = marginals[i];
    for (size_t p = 0; p < m.attrs().size(); ++p) {
      if (m.attrs()[p] >= domain.size() ||
          domain.attr(m.attrs()[p]).size() != m.sizes()[p]) {
        return absl::InvalidArgumentError(
            absl::StrCat("marginal ", i, " does not fit the domain"));
      }
    }
    for (double c : m.counts()) {
      if (c < -1e-9 * scale) {
        return absl::InvalidArgumentError(
            absl::StrCat("marginal ", i, " has negative counts"));
      }
    }
    if (std::abs(m.total() - static_cast<double>(n)) > 1e-6 * scale) {
      return absl::InvalidArgumentError(absl::StrCat(
          "marginal ", i, " totals ", m.total(), ", expected ", n));
    }
  }
  std::vector<MarginalSchema> schemas;
  for (const auto& m : marginals) schemas.push_back(m.schema());
  for (const SharedSet& set : SharedSets(schemas)) {
    if (set.attrs.empty()) continue;
    std::vector<double> first;
    for (int member : set.members) {
      const MarginalTable& m = marginals[member];
      const auto index = ProjectionIndex(m.attrs(), m.sizes(), set.attrs);
      std::vector<double> proj(static_cast<size_t>(
          *std::max_element(index.begin(), index.end()) + 1), 0.0);
      for (int64_t c = 0; c < m.num_cells(); ++c) proj[index[c]] += m.counts()[c];
      if (first.empty()) {
        first = std::move(proj);
        continue;
      }
      for (size_t g = 0; g < proj.size(); ++g) {
        if (std::abs(proj[g] - first[g]) > 1e-6 * scale) {
          return absl::InvalidArgumentError(absl::StrCat(
              "marginals ", set.members[0], " and ", member,
              " are inconsistent"));
        }
      }
    }
  }
  return absl::OkStatus();
}

// Normalized 1-way distribution of `attr` projected from `m`.
std::vector<double> OneWayFrom(const MarginalTable& m, int attr) {
  const auto index = ProjectionIndex(m.attrs(), m.sizes(), std::vector<int>{attr});
  const auto pos = std::find(m.attrs().begin(), m.attrs().end(), attr) -
                   m.attrs().begin();
  std::vector<double> out(static_cast<size_t>(m.sizes()[pos]), 0.0);
  for (int64_t c = 0; c < m.num_cells(); ++c) {
    out[index[c]] += std::max(0.0, m.counts()[c]);
  }
  return out;
}

std::vector<uint32_t> QuotaColumn(std::span<const double> weights, int64_t n,
                                  Rng& rng) {
  std::vector<uint32_t> column;
  column.reserve(static_cast<size_t>(n));
  const std::vector<int64_t> quota = LargestRemainder(weights, n);
  for (size_t v = 0; v < quota.size(); ++v) {
    column.insert(column.end(), static_cast<size_t>(quota[v]),
                  static_cast<uint32_t>(v));
  }
  rng.Shuffle(column);
  return column;
}

absl::StatusOr<Dataset> SynthesizeComponent(
    int component_id, const std::vector<int>& attrs,
    std::span<const MarginalTable> marginals, const Domain& domain, int64_t n,
    const SynthesisConfig& config, SynthesisReport* report,
    const SweepCallback& on_sweep) {
  const Domain sub_domain = domain.Select(attrs);
  auto local = [&](int a) {
    return static_cast<int>(std::lower_bound(attrs.begin(), attrs.end(), a) -
                            attrs.begin());
  };
  std::vector<MarginalTable> targets;
  for (const MarginalTable& m : marginals) {
    std::vector<int> mapped;
    for (int a : m.attrs()) mapped.push_back(local(a));
    DPSYN_ASSIGN_OR_RETURN(MarginalSchema schema,
                           MarginalSchema::Create(mapped, sub_domain.size()));
    DPSYN_ASSIGN_OR_RETURN(
        MarginalTable t,
        MarginalTable::Create(schema, m.sizes(), m.counts(), m.noise_std()));
    targets.push_back(std::move(t));
  }

  std::vector<std::vector<double>> one_way(attrs.size());
  for (size_t j = 0; j < attrs.size(); ++j) {
    for (const MarginalTable& t : targets) {
      if (t.schema().Contains(static_cast<int>(j))) {
        one_way[j] = OneWayFrom(t, static_cast<int>(j));
        break;
      }
    }
  }
  DPSYN_ASSIGN_OR_RETURN(
      Dataset data,
      RandomDataset(sub_domain, n, one_way, DeriveSeed(config.seed, "init", attrs)));

  Rng rng(DeriveSeed(config.seed, "update", attrs));
  DPSYN_ASSIGN_OR_RETURN(double error, MeanNormalizedL1(data, targets));
  if (report) report->initial_error.push_back(error);
  std::vector<int64_t> perm(static_cast<size_t>(n));
  for (int t = 1; t <= config.iterations; ++t) {
    const double alpha = Decay(config.alpha0, t, config.decay);
    const double dup_prob = DuplicateProbability(config, t);
    for (const MarginalTable& target : targets) {
      if (config.method == UpdateMethod::kMcf) {
        DPSYN_RETURN_IF_ERROR(McfUpdate(data, target, rng).status());
      } else {
        DPSYN_RETURN_IF_ERROR(
            GumUpdate(data, target, alpha, dup_prob, rng).status());
      }
    }
    std::iota(perm.begin(), perm.end(), 0);
    rng.Shuffle(perm);
    data = data.Permuted(perm);

    DPSYN_ASSIGN_OR_RETURN(double next_error, MeanNormalizedL1(data, targets));
    const SweepLog log{component_id, t, alpha, next_error};
    if (report) report->sweeps.push_back(log);
    if (on_sweep) on_sweep(log);
    const double improvement = error - next_error;
    error = next_error;
    if (improvement < config.convergence_tol) break;
  }
  if (report) report->final_error.push_back(error);
  return data;
}

}  // namespace

absl::StatusOr<Dataset> Synthesize(std::span<const MarginalTable> marginals,
                                   const Domain& domain, int64_t n,
                                   const SynthesisConfig& config,
                                   SynthesisReport* report,
                                   const SweepCallback& on_sweep) {
  if (n < 0) return absl::InvalidArgumentError("record count must be >= 0");
  if (!(config.alpha0 > 0)) return absl::InvalidArgumentError("alpha0 must be > 0");
  if (config.iterations < 1) {
    return absl::InvalidArgumentError("iterations must be >= 1");
  }
  DPSYN_RETURN_IF_ERROR(ValidateMarginals(marginals, domain, n));
  SynthesisReport local_report;
  if (!report) report = &local_report;

  const int d = domain.size();
  std::vector<MarginalSchema> schemas;
  for (const auto& m : marginals) schemas.push_back(m.schema());
  const MarginalGraph graph = MarginalGraph::Build(schemas, d);
  const std::vector<int> degree = graph.Degrees();

  // Degree-1 attributes of 1-way marginals, and of 2-way marginals whose
  // other attribute stays in the graph, are filled after the sweeps.
  std::vector<int> peel_marginal(d, -1);
  std::vector<bool> edge_kept(marginals.size(), true);
  for (int a = 0; a < d; ++a) {
    if (degree[a] != 1) continue;
    for (size_t e = 0; e < marginals.size(); ++e) {
      const auto& attrs = schemas[e].attrs();
      if (!schemas[e].Contains(a)) continue;
      const bool peel =
          attrs.size() == 1 ||
          (attrs.size() == 2 && degree[attrs[0] == a ? attrs[1] : attrs[0]] >= 2);
      if (peel) {
        peel_marginal[a] = static_cast<int>(e);
        edge_kept[e] = false;
      }
    }
  }
  std::vector<int> kept_edges;
  for (size_t e = 0; e < marginals.size(); ++e) {
    if (edge_kept[e]) kept_edges.push_back(static_cast<int>(e));
  }
  const auto components = graph.Components(kept_edges);
  report->components = components;

  // Column sources for the joined result.
  std::vector<std::vector<uint32_t>> columns(d);
  std::vector<bool> filled(d, false);
  for (size_t ci = 0; ci < components.size(); ++ci) {
    const auto& attrs = components[ci];
    std::vector<MarginalTable> part;
    for (int e : kept_edges) {
      if (std::binary_search(attrs.begin(), attrs.end(), schemas[e].attrs()[0])) {
        part.push_back(marginals[e]);
      }
    }
    DPSYN_ASSIGN_OR_RETURN(
        Dataset data, SynthesizeComponent(static_cast<int>(ci), attrs, part,
                                          domain, n, config, report, on_sweep));
    // Independent row order per component before joining.
    std::vector<int64_t> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(DeriveSeed(config.seed, "join", attrs));
    shuffle_rng.Shuffle(perm);
    for (size_t j = 0; j < attrs.size(); ++j) {
      std::vector<uint32_t>& col = columns[attrs[j]];
      col.resize(static_cast<size_t>(n));
      for (int64_t r = 0; r < n; ++r) col[r] = data.at(perm[r], static_cast<int>(j));
      filled[attrs[j]] = true;
    }
  }

  // Covered attributes that lost all their marginals to peeling (for
  // example the centre of a star of 2-way marginals) come from a 1-way
  // projection.
  for (int a = 0; a < d; ++a) {
    if (filled[a] || degree[a] == 0 || peel_marginal[a] >= 0) continue;
    for (size_t e = 0; e < marginals.size(); ++e) {
      if (schemas[e].Contains(a)) {
        Rng rng(DeriveSeed(config.seed, "orphan", std::vector<int>{a}));
        columns[a] = QuotaColumn(OneWayFrom(marginals[e], a), n, rng);
        filled[a] = true;
        break;
      }
    }
  }

  for (int a = 0; a < d; ++a) {
    if (peel_marginal[a] < 0) continue;
    const MarginalTable& m = marginals[peel_marginal[a]];
    Rng rng(DeriveSeed(config.seed, "append", std::vector<int>{a}));
    report->appended.push_back(a);
    if (m.attrs().size() == 1) {
      columns[a] = QuotaColumn(m.counts(), n, rng);
      filled[a] = true;
      continue;
    }
    // Fill a from the conditional distribution of a given b.
    const int b = m.attrs()[0] == a ? m.attrs()[1] : m.attrs()[0];
    const bool a_first = m.attrs()[0] == a;
    const int size_a = domain.attr(a).size();
    const int size_b = domain.attr(b).size();
    std::vector<std::vector<int64_t>> rows_by_b(size_b);
    for (int64_t r = 0; r < n; ++r) rows_by_b[columns[b][r]].push_back(r);
    const std::vector<double> marginal_a = OneWayFrom(m, a);
    columns[a].assign(static_cast<size_t>(n), 0);
    for (int vb = 0; vb < size_b; ++vb) {
      std::vector<double> cond(size_a);
      double mass = 0.0;
      for (int va = 0; va < size_a; ++va) {
        const int64_t cell = a_first ? static_cast<int64_t>(va) * size_b + vb
                                     : static_cast<int64_t>(vb) * size_a + va;
        cond[va] = std::max(0.0, m.counts()[cell]);
        mass += cond[va];
      }
      if (mass <= 0) cond = marginal_a;
      const auto& group = rows_by_b[vb];
      const std::vector<uint32_t> values =
          QuotaColumn(cond, static_cast<int64_t>(group.size()), rng);
      for (size_t i = 0; i < group.size(); ++i) columns[a][group[i]] = values[i];
    }
    filled[a] = true;
  }

  for (int a = 0; a < d; ++a) {
    if (filled[a]) continue;
    report->uncovered.push_back(a);
    Rng rng(DeriveSeed(config.seed, "uncovered", std::vector<int>{a}));
    columns[a].resize(static_cast<size_t>(n));
    for (auto& v : columns[a]) {
      v = static_cast<uint32_t>(rng.UniformInt(domain.attr(a).size()));
    }
  }

  std::vector<uint32_t> cells(static_cast<size_t>(n) * d);
  for (int64_t r = 0; r < n; ++r) {
    for (int a = 0; a < d; ++a) cells[r * d + a] = columns[a][r];
  }
  return Dataset::Create(domain, std::move(cells));
}

}  // namespace dpsyn
