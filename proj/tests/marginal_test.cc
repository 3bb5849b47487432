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

#include "dpsyn/marginal.h"

#include <cmath>

#include "dpsyn/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpsyn {
namespace {

using ::dpsyn::testing::GenderAgeDataset;
using ::dpsyn::testing::MakeDomain;
using ::dpsyn::testing::Schema;
using ::dpsyn::testing::Table;

TEST(MarginalSchemaTest, Validation) {
  EXPECT_FALSE(MarginalSchema::Create({}, 3).ok());
  EXPECT_FALSE(MarginalSchema::Create({1, 0}, 3).ok());
  EXPECT_FALSE(MarginalSchema::Create({0, 0}, 3).ok());
  EXPECT_FALSE(MarginalSchema::Create({0, 3}, 3).ok());
  auto s = MarginalSchema::FromUnsorted({2, 0, 2}, 3);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->attrs(), (std::vector<int>{0, 2}));
}

TEST(ComputeMarginalTest, HundredRecordExample) {
  const Dataset data = GenderAgeDataset();
  EXPECT_EQ(ComputeMarginal(data, Schema({0}, 2))->counts(),
            (std::vector<double>{55, 45}));
  EXPECT_EQ(ComputeMarginal(data, Schema({1}, 2))->counts(),
            (std::vector<double>{35, 35, 30}));
  EXPECT_EQ(ComputeMarginal(data, Schema({0, 1}, 2))->counts(),
            (std::vector<double>{20, 15, 20, 15, 20, 10}));
}

TEST(ProjectTest, Examples) {
  const Dataset data = GenderAgeDataset();
  auto full = *ComputeMarginal(data, Schema({0, 1}, 2));
  EXPECT_EQ(Project(full, Schema({0}, 2))->counts(), (std::vector<double>{55, 45}));
  EXPECT_EQ(*Project(full, Schema({0, 1}, 2)), full);
  auto zeros = MarginalTable::Zeros(Schema({0, 1}, 2), {2, 3});
  EXPECT_EQ(Project(zeros, Schema({1}, 2))->counts(), (std::vector<double>{0, 0, 0}));
  auto one = *ComputeMarginal(data, Schema({0}, 2));
  EXPECT_FALSE(Project(one, Schema({1}, 2)).ok());
}

TEST(ProjectTest, MatchesDirectCountOnRandomData) {
  const Domain domain = MakeDomain({3, 2, 4, 2});
  auto data = *RandomDataset(domain, 300, std::nullopt, 8);
  auto full = *ComputeMarginal(data, Schema({0, 1, 2, 3}, 4));
  for (int mask = 1; mask < 16; ++mask) {
    std::vector<int> sub;
    for (int a = 0; a < 4; ++a) {
      if (mask & (1 << a)) sub.push_back(a);
    }
    auto projected = *Project(full, Schema(sub, 4));
    auto direct = *ComputeMarginal(data, Schema(sub, 4));
    EXPECT_EQ(projected.counts(), direct.counts()) << mask;
    EXPECT_EQ(direct.total(), 300);
  }
}

TEST(IndependentProductTest, Examples) {
  auto a = Table({0}, {2}, {2, 2}, 2);
  auto b = Table({1}, {2}, {2, 2}, 2);
  EXPECT_EQ(IndependentProduct(a, b, 4)->counts(), (std::vector<double>{1, 1, 1, 1}));

  auto g = Table({0}, {2}, {55, 45}, 2);
  auto age = Table({1}, {3}, {35, 35, 30}, 2);
  auto prod = *IndependentProduct(g, age, 100);
  const std::vector<double> want = {19.25, 19.25, 16.5, 15.75, 15.75, 13.5};
  for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(prod.counts()[i], want[i], 1e-12);

  auto c = Table({0}, {2}, {4, 0}, 2);
  auto d = Table({1}, {2}, {1, 3}, 2);
  EXPECT_EQ(IndependentProduct(c, d, 4)->counts(), (std::vector<double>{1, 3, 0, 0}));

  EXPECT_FALSE(IndependentProduct(a, a, 4).ok());
  auto zero = Table({1}, {2}, {0, 0}, 2);
  EXPECT_FALSE(IndependentProduct(a, zero, 4).ok());
}

TEST(IndependentProductTest, SchemaOrderFollowsAttributes) {
  // Second argument holds the lower attribute index.
  auto hi = Table({1}, {2}, {1, 3}, 2);
  auto lo = Table({0}, {3}, {1, 1, 2}, 2);
  auto prod = *IndependentProduct(hi, lo, 16);
  EXPECT_EQ(prod.attrs(), (std::vector<int>{0, 1}));
  EXPECT_EQ(prod.counts(), (std::vector<double>{1, 3, 1, 3, 2, 6}));
}

TEST(L1DistanceTest, Examples) {
  auto a = Table({0}, {4}, {2, 0, 0, 2}, 1);
  auto b = Table({0}, {4}, {1, 1, 1, 1}, 1);
  EXPECT_EQ(*L1Distance(a, a), 0.0);
  EXPECT_EQ(*L1Distance(a, b), 4.0);
  auto p = Table({0}, {2}, {1, 0}, 1);
  auto q = Table({0}, {2}, {0, 1}, 1);
  EXPECT_EQ(*L1Distance(p, q), 2.0);
  EXPECT_FALSE(L1Distance(a, p).ok());
}

TEST(L1DistanceTest, MetricProperties) {
  Rng rng(12);
  auto random_table = [&] {
    std::vector<double> c(6);
    for (double& x : c) x = rng.Gaussian(5.0);
    return Table({0, 1}, {2, 3}, c, 2);
  };
  for (int i = 0; i < 200; ++i) {
    auto x = random_table(), y = random_table(), z = random_table();
    const double xy = *L1Distance(x, y);
    EXPECT_GE(xy, 0.0);
    EXPECT_DOUBLE_EQ(xy, *L1Distance(y, x));
    EXPECT_LE(*L1Distance(x, z), xy + *L1Distance(y, z) + 1e-12);
  }
}

TEST(CellTest, EncodeDecode) {
  const std::vector<int> sizes = {2, 3};
  EXPECT_EQ(*CellDecode(sizes, 4), (std::vector<int>{1, 1}));
  EXPECT_FALSE(CellDecode(sizes, 6).ok());
  EXPECT_FALSE(CellDecode(sizes, -1).ok());
  EXPECT_FALSE(CellEncode(sizes, std::vector<int>{2, 0}).ok());
  for (int64_t i = 0; i < 6; ++i) EXPECT_EQ(*CellEncode(sizes, *CellDecode(sizes, i)), i);
}

TEST(MarginalTableTest, NormalizedSumsToOne) {
  auto t = Table({0}, {3}, {1, 2, 3}, 1);
  auto n = *t.Normalized();
  EXPECT_NEAR(n.total(), 1.0, 1e-12);
  EXPECT_FALSE(Table({0}, {2}, {0, 0}, 1).Normalized().ok());
  EXPECT_FALSE(MarginalTable::Create(Schema({0}, 1), {3}, {1, 2}).ok());
}

TEST(ArchiveTest, RoundTrip) {
  const Dataset data = GenderAgeDataset();
  std::vector<MarginalTable> tables = {
      Table({0}, {2}, {55.5, -0.25}, 2, 1.5),
      Table({0, 1}, {2, 3}, {20, 15, 20, 15, 20, 10}, 2)};
  const std::string json = MarginalArchiveToJson(tables, data.domain());
  auto back = LoadMarginalArchive(json, data.domain());
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, tables);
}

}  // namespace
}  // namespace dpsyn
