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
#include <set>

#include "dpsyn/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpsyn {
namespace {

using ::dpsyn::testing::MakeDataset;
using ::dpsyn::testing::MakeDomain;
using ::dpsyn::testing::Schema;
using ::dpsyn::testing::Table;

MarginalTable Count(const Dataset& data, std::vector<int> attrs) {
  return *ComputeMarginal(data, Schema(std::move(attrs), data.d()));
}

// Income x gender x age records; four high/male and one high/female.
Dataset FiveRecords() {
  return MakeDataset(MakeDomain({2, 2, 3}),
                     {{1, 0, 0}, {1, 0, 1}, {1, 0, 2}, {1, 0, 1}, {1, 1, 0}});
}

TEST(DecayTest, Schedules) {
  DecaySchedule step{DecaySchedule::Kind::kStep, 0.5, 10};
  EXPECT_DOUBLE_EQ(Decay(0.2, 25, step), 0.05);
  for (auto kind : {DecaySchedule::Kind::kStep, DecaySchedule::Kind::kExponential,
                    DecaySchedule::Kind::kLinear, DecaySchedule::Kind::kSqrt}) {
    EXPECT_DOUBLE_EQ(Decay(0.3, 0, {kind, 0.7, 4}), 0.3);
  }
  DecaySchedule flat{DecaySchedule::Kind::kExponential, 0.0, 1};
  EXPECT_DOUBLE_EQ(Decay(0.2, 50, flat), 0.2);
  EXPECT_DOUBLE_EQ(Decay(1.0, 3, {DecaySchedule::Kind::kLinear, 1.0, 1}), 0.25);
  EXPECT_DOUBLE_EQ(Decay(1.0, 3, {DecaySchedule::Kind::kSqrt, 1.0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(Decay(1.0, 2, {DecaySchedule::Kind::kExponential, 0.5, 1}),
                   std::exp(-1.0));
  for (int t = 1; t < 100; ++t) {
    EXPECT_LE(Decay(0.2, t, SynthesisConfig().decay),
              Decay(0.2, t - 1, SynthesisConfig().decay));
  }
}

TEST(DuplicateProbabilityTest, Ramp) {
  SynthesisConfig c;
  EXPECT_DOUBLE_EQ(DuplicateProbability(c, 0), 0.5);
  EXPECT_DOUBLE_EQ(DuplicateProbability(c, 10), 0.6);
  EXPECT_DOUBLE_EQ(DuplicateProbability(c, 1000), 0.9);
}

TEST(GumUpdateTest, FiveRecordReplay) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    for (double dup : {0.0, 0.5, 1.0}) {
      Dataset data = FiveRecords();
      Rng rng(seed);
      auto target = Table({0, 1}, {2, 2}, {0, 0, 0.2, 0.8}, 3);
      auto stats = GumUpdate(data, target, 2.0, dup, rng);
      ASSERT_TRUE(stats.ok());
      EXPECT_EQ(stats->moved, 2);
      EXPECT_EQ(Count(data, {0, 1}).counts(), (std::vector<double>{0, 0, 2, 3}));
      EXPECT_EQ(Count(data, {0, 1}).Normalized()->counts(),
                (std::vector<double>{0, 0, 0.4, 0.6}));
    }
  }
}

TEST(GumUpdateTest, MatchingTargetIsNoOp) {
  Dataset data = FiveRecords();
  const Dataset before = data;
  Rng rng(1);
  auto stats = *GumUpdate(data, Count(data, {0, 1}), 0.5, 0.5, rng);
  EXPECT_EQ(stats.moved, 0);
  EXPECT_EQ(data, before);
}

TEST(GumUpdateTest, EmptyCellUsesFloor) {
  auto data = MakeDataset(MakeDomain({2, 2}), std::vector<std::vector<uint32_t>>(10, {0, 1}));
  Rng rng(2);
  auto stats = *GumUpdate(data, Table({0}, {2}, {0, 10}, 2), 0.2, 1.0, rng);
  // Floor max(1, ceil(0.2 * 10 / 2)) = 1; no donor, so a replace.
  EXPECT_EQ(stats.moved, 1);
  EXPECT_EQ(stats.replaced, 1);
  EXPECT_EQ(stats.duplicated, 0);
  EXPECT_EQ(Count(data, {0}).counts(), (std::vector<double>{9, 1}));
}

TEST(GumUpdateTest, RowsChangeOnlyBySchemaOrDuplication) {
  Rng rng(40);
  const Domain domain = MakeDomain({3, 4, 2, 3});
  for (int trial = 0; trial < 30; ++trial) {
    Dataset data = *RandomDataset(domain, 200, std::nullopt, trial);
    const Dataset before = data;
    std::set<std::vector<uint32_t>> pre_rows;
    for (int64_t r = 0; r < before.n(); ++r) {
      pre_rows.emplace(before.row(r).begin(), before.row(r).end());
    }
    std::vector<double> counts(6);
    for (double& c : counts) c = rng.UniformDouble() * 30;
    auto target = Table({0, 2}, {3, 2}, counts, 4);
    auto stats = *GumUpdate(data, target, 0.5, 0.5, rng);
    EXPECT_EQ(data.n(), 200);
    EXPECT_EQ(stats.moved, stats.duplicated + stats.replaced);
    for (int64_t r = 0; r < data.n(); ++r) {
      const std::vector<uint32_t> row(data.row(r).begin(), data.row(r).end());
      const bool schema_only = row[1] == before.at(r, 1) && row[3] == before.at(r, 3);
      EXPECT_TRUE(schema_only || pre_rows.count(row)) << r;
    }
  }
}

TEST(GumUpdateTest, ReducesError) {
  const Domain domain = MakeDomain({4, 4});
  Dataset data = *RandomDataset(domain, 1000, std::nullopt, 3);
  auto target = Table({0, 1}, {4, 4},
                      {100, 0, 0, 50, 0, 100, 50, 0, 0, 50, 100, 0, 50, 0, 0, 500}, 2);
  const std::vector<MarginalTable> targets = {target};
  Rng rng(3);
  double prev = *MeanNormalizedL1(data, targets);
  for (int t = 0; t < 30; ++t) {
    ASSERT_TRUE(GumUpdate(data, target, 0.5, 0.5, rng).ok());
  }
  EXPECT_LT(*MeanNormalizedL1(data, targets), prev / 10);
  EXPECT_FALSE(GumUpdate(data, target, 0.0, 0.5, rng).ok());
}

TEST(McfUpdateTest, PaperExample) {
  // 3 teenagers, 4 adults, 3 elderly; target 5/3/2.
  std::vector<std::vector<uint32_t>> rows;
  for (uint32_t v : {0, 0, 0, 1, 1, 1, 1, 2, 2, 2}) rows.push_back({v});
  Dataset data = MakeDataset(MakeDomain({3}), rows);
  Rng rng(1);
  auto flow = *McfUpdate(data, Table({0}, {3}, {0.5, 0.3, 0.2}, 1), rng);
  EXPECT_EQ(flow, (std::vector<FlowMove>{{1, 0, 1}, {2, 0, 1}}));
  EXPECT_EQ(Count(data, {0}).counts(), (std::vector<double>{5, 3, 2}));
}

TEST(McfUpdateTest, ExactOnRandomTargets) {
  Rng rng(8);
  const Domain domain = MakeDomain({3, 3, 2});
  for (int trial = 0; trial < 30; ++trial) {
    Dataset data = *RandomDataset(domain, 157, std::nullopt, trial);
    std::vector<double> counts(6);
    for (double& c : counts) c = rng.UniformDouble();
    auto target = Table({1, 2}, {3, 2}, counts, 3);
    auto untouched = data.Column(0);
    ASSERT_TRUE(McfUpdate(data, target, rng).ok());
    std::vector<double> scaled = counts;
    const auto want = LargestRemainder(scaled, 157);
    const auto got = Count(data, {1, 2}).counts();
    for (size_t c = 0; c < want.size(); ++c) EXPECT_EQ(got[c], want[c]);
    EXPECT_EQ(data.Column(0), untouched);
  }
}

TEST(McfUpdateTest, MatchingTargetIsNoOp) {
  Dataset data = *RandomDataset(MakeDomain({3, 2}), 40, std::nullopt, 1);
  const Dataset before = data;
  Rng rng(2);
  EXPECT_TRUE(McfUpdate(data, Count(data, {0, 1}), rng)->empty());
  EXPECT_EQ(data, before);
}

TEST(MarginalGraphTest, DegreesAndComponents) {
  const std::vector<MarginalSchema> s = {Schema({0, 1}, 6), Schema({1, 2}, 6),
                                         Schema({3, 4}, 6)};
  const auto g = MarginalGraph::Build(s, 6);
  EXPECT_EQ(g.Degrees(), (std::vector<int>{1, 2, 1, 1, 1, 0}));
  const std::vector<int> all = {0, 1, 2};
  EXPECT_EQ(g.Components(all), (std::vector<std::vector<int>>{{0, 1, 2}, {3, 4}}));
  const std::vector<int> some = {2};
  EXPECT_EQ(g.Components(some), (std::vector<std::vector<int>>{{3, 4}}));
}

TEST(SweepLogTest, Format) {
  EXPECT_EQ(FormatSweepLog({0, 3, 0.2, 0.0123}),
            "component=0 iteration=3 alpha=0.2 error=0.0123");
}

// Exact marginals of `data` for each schema.
std::vector<MarginalTable> Targets(const Dataset& data,
                                   const std::vector<std::vector<int>>& schemas) {
  std::vector<MarginalTable> out;
  for (const auto& s : schemas) out.push_back(Count(data, s));
  return out;
}

// A 5-attribute dataset with a dependency chain a0 -> a1 -> ... -> a4.
Dataset ChainData(int64_t n, uint64_t seed) {
  const Domain domain = MakeDomain({4, 5, 3, 6, 4});
  Dataset data = *RandomDataset(domain, n, std::nullopt, seed);
  Rng rng(seed + 1000);
  for (int64_t r = 0; r < n; ++r) {
    for (int a = 1; a < 5; ++a) {
      if (rng.Bernoulli(0.6)) {
        data.set(r, a, data.at(r, a - 1) % domain.attr(a).size());
      }
    }
  }
  return data;
}

TEST(SynthesizeTest, SingleOneWay) {
  const Domain domain = MakeDomain({4});
  auto target = Table({0}, {4}, {10, 20, 30, 40}, 1);
  SynthesisReport report;
  auto out = *Synthesize({&target, 1}, domain, 100, SynthesisConfig(), &report);
  EXPECT_EQ(Count(out, {0}).counts(), target.counts());
  EXPECT_EQ(report.appended, (std::vector<int>{0}));
}

TEST(SynthesizeTest, DisjointComponentsJoin) {
  const Domain domain = MakeDomain({3, 3, 3, 3});
  Dataset orig = *RandomDataset(domain, 3000, std::nullopt, 5);
  for (int64_t r = 0; r < orig.n(); ++r) {
    orig.set(r, 1, orig.at(r, 0));
    if (r % 3 == 0) orig.set(r, 3, (orig.at(r, 2) + 1) % 3);
  }
  // Two 2-way marginals plus a 1-way on each so no attribute is peeled.
  auto targets = Targets(orig, {{0, 1}, {2, 3}, {0}, {2}});
  SynthesisReport report;
  auto out = *Synthesize(targets, domain, 3000, SynthesisConfig(), &report);
  EXPECT_EQ(report.components.size(), 2u);
  const std::vector<MarginalTable> pairs = {targets[0], targets[1]};
  EXPECT_LT(*MeanNormalizedL1(out, pairs), 0.05);
  // Columns from different components are independent.
  auto cross = *Count(out, {1, 2}).Normalized();
  auto product = *IndependentProduct(Count(out, {1}), Count(out, {2}), 1.0);
  EXPECT_LT(*L1Distance(cross, product), 0.1);
}

TEST(SynthesizeTest, ChainConverges) {
  const Dataset orig = ChainData(2000, 11);
  auto targets = Targets(orig, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  SynthesisReport report;
  std::vector<SweepLog> logs;
  auto out = *Synthesize(targets, orig.domain(), 2000, SynthesisConfig(), &report,
                         [&](const SweepLog& l) { logs.push_back(l); });
  EXPECT_LE(*MeanNormalizedL1(out, targets), 0.1);
  EXPECT_EQ(logs.size(), report.sweeps.size());
  EXPECT_FALSE(logs.empty());
  EXPECT_EQ(out.n(), 2000);
}

TEST(SynthesizeTest, StarPeelsLeavesAndFillsCentre) {
  const Dataset orig = ChainData(1000, 2);
  auto targets = Targets(orig, {{0, 1}, {1, 2}, {1, 3}});
  SynthesisReport report;
  auto out = *Synthesize(targets, orig.domain(), 1000, SynthesisConfig(), &report);
  EXPECT_EQ(report.appended, (std::vector<int>{0, 2, 3}));
  EXPECT_EQ(report.uncovered, (std::vector<int>{4}));
  EXPECT_LT(*MeanNormalizedL1(out, targets), 0.05);
}

TEST(SynthesizeTest, McfMethod) {
  const Dataset orig = ChainData(500, 4);
  auto targets = Targets(orig, {{0, 1, 2}, {2, 3}, {3, 4}, {0, 4}});
  SynthesisConfig config;
  config.method = UpdateMethod::kMcf;
  config.iterations = 20;
  auto out = *Synthesize(targets, orig.domain(), 500, config);
  EXPECT_LT(*MeanNormalizedL1(out, targets), 0.2);
}

TEST(SynthesizeTest, Deterministic) {
  const Dataset orig = ChainData(800, 6);
  auto targets = Targets(orig, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  SynthesisConfig config;
  config.seed = 99;
  EXPECT_EQ(*Synthesize(targets, orig.domain(), 800, config),
            *Synthesize(targets, orig.domain(), 800, config));
  config.seed = 100;
  EXPECT_NE(Synthesize(targets, orig.domain(), 800, config)->cells(),
            Synthesize(targets, orig.domain(), 800, SynthesisConfig())->cells());
}

TEST(SynthesizeTest, RejectsBadInput) {
  const Domain domain = MakeDomain({2, 2});
  std::vector<MarginalTable> wrong_total = {Table({0}, {2}, {5, 5}, 2)};
  EXPECT_FALSE(Synthesize(wrong_total, domain, 20, SynthesisConfig()).ok());
  std::vector<MarginalTable> negative = {Table({0}, {2}, {25, -5}, 2)};
  EXPECT_FALSE(Synthesize(negative, domain, 20, SynthesisConfig()).ok());
  std::vector<MarginalTable> inconsistent = {Table({0, 1}, {2, 2}, {5, 5, 5, 5}, 2),
                                             Table({0}, {2}, {15, 5}, 2)};
  EXPECT_FALSE(Synthesize(inconsistent, domain, 20, SynthesisConfig()).ok());
  std::vector<MarginalTable> wrong_size = {Table({0}, {3}, {5, 5, 10}, 2)};
  EXPECT_FALSE(Synthesize(wrong_size, domain, 20, SynthesisConfig()).ok());
  SynthesisConfig bad;
  bad.iterations = 0;
  EXPECT_FALSE(Synthesize(wrong_total, domain, 10, bad).ok());
}

}  // namespace
}  // namespace dpsyn
