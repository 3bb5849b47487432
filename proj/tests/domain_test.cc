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

#include "dpsyn/domain.h"

#include <cmath>

#include "dpsyn/marginal.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpsyn {
namespace {

using ::dpsyn::testing::GenderAgeDataset;
using ::dpsyn::testing::MakeDomain;

TEST(LoadDomainTest, SingleCategorical) {
  auto d = LoadDomain(
      R"({"attrs":[{"name":"Gender","kind":"categorical","values":["male","female"]}]})");
  ASSERT_TRUE(d.ok()) << d.status();
  EXPECT_EQ(d->size(), 1);
  EXPECT_EQ(d->attr(0).size(), 2);
}

TEST(LoadDomainTest, NumericBins) {
  auto d = LoadDomain(
      R"({"attrs":[{"name":"Age","kind":"numeric","bin_edges":[0,18,65,120]}]})");
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->attr(0).size(), 3);
}

TEST(LoadDomainTest, RejectsBadSpecs) {
  auto flat = LoadDomain(
      R"({"attrs":[{"name":"Age","kind":"numeric","bin_edges":[0,18,18]}]})");
  ASSERT_FALSE(flat.ok());
  EXPECT_NE(flat.status().message().find("non-increasing edges"),
            std::string_view::npos);
  EXPECT_NE(flat.status().message().find("Age"), std::string_view::npos);
  EXPECT_FALSE(LoadDomain(R"({"attrs":[
      {"name":"A","kind":"categorical","values":["x"]},
      {"name":"A","kind":"categorical","values":["y"]}]})").ok());
  EXPECT_FALSE(LoadDomain(R"({"attrs":[]})").ok());
  EXPECT_FALSE(LoadDomain("not json").ok());
  EXPECT_FALSE(LoadDomain(R"({"attrs":[{"name":"A","kind":"other"}]})").ok());
}

TEST(LoadDomainTest, JsonRoundTrip) {
  auto d = LoadDomain(R"({"attrs":[
      {"name":"A","kind":"categorical","values":["x","y"]},
      {"name":"B","kind":"numeric","bin_edges":[0,1.5,3]}]})");
  ASSERT_TRUE(d.ok());
  auto again = LoadDomain(DomainToJson(*d));
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(*d, *again);
}

TEST(AttributeSpecTest, NumericBinsAreHalfOpen) {
  auto spec = AttributeSpec::Numeric("x", {0, 18, 65, 120});
  ASSERT_TRUE(spec.ok());
  EXPECT_EQ(*spec->Encode("0"), 0u);
  EXPECT_EQ(*spec->Encode("17.9"), 0u);
  EXPECT_EQ(*spec->Encode("18"), 1u);
  EXPECT_EQ(*spec->Encode("120"), 2u);
  EXPECT_FALSE(spec->Encode("120.5").ok());
  EXPECT_FALSE(spec->Encode("-1").ok());
  EXPECT_FALSE(spec->Encode("abc").ok());
  EXPECT_DOUBLE_EQ(spec->Representative(1), 41.5);
}

TEST(LoadCsvTest, HundredRecordExample) {
  const Dataset fig = GenderAgeDataset();
  const std::string text = WriteCsv(fig);
  auto loaded = LoadCsv(text, fig.domain());
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(loaded->n(), 100);
  EXPECT_EQ(*loaded, fig);
}

TEST(LoadCsvTest, HeaderOrderInsensitive) {
  const Domain domain = MakeDomain({2, 3});
  auto data = LoadCsv("a1,a0\nv2,v1\n", domain);
  ASSERT_TRUE(data.ok()) << data.status();
  EXPECT_EQ(data->at(0, 0), 1u);
  EXPECT_EQ(data->at(0, 1), 2u);
}

TEST(LoadCsvTest, EmptyBody) {
  auto data = LoadCsv("a0,a1\n", MakeDomain({2, 3}));
  ASSERT_TRUE(data.ok());
  EXPECT_EQ(data->n(), 0);
}

TEST(LoadCsvTest, Errors) {
  const Dataset fig = GenderAgeDataset();
  auto bad_label = LoadCsv("Gender,Age\nMale,adult\n", fig.domain());
  ASSERT_FALSE(bad_label.ok());
  EXPECT_NE(bad_label.status().message().find("unknown label"),
            std::string_view::npos);
  EXPECT_FALSE(LoadCsv("Gender\nmale\n", fig.domain()).ok());
  EXPECT_FALSE(LoadCsv("Gender,Age,Extra\nmale,adult,1\n", fig.domain()).ok());
  EXPECT_FALSE(LoadCsv("Gender,Age\nmale\n", fig.domain()).ok());
  auto out_of_range = LoadCsv(
      "x\n500\n", *Domain::Create({*AttributeSpec::Numeric("x", {0, 10})}));
  ASSERT_FALSE(out_of_range.ok());
  EXPECT_NE(out_of_range.status().message().find("out-of-range"),
            std::string_view::npos);
}

TEST(DatasetTest, CreateValidatesIndices) {
  const Domain domain = MakeDomain({2});
  EXPECT_FALSE(Dataset::Create(domain, {0, 1, 2}).ok());
  EXPECT_TRUE(Dataset::Create(domain, {0, 1, 1}).ok());
}

TEST(DatasetTest, DecodeEncodeRoundTrip) {
  auto domain = LoadDomain(R"({"attrs":[
      {"name":"A","kind":"categorical","values":["x","y","z"]},
      {"name":"B","kind":"numeric","bin_edges":[0,10,20,40]}]})");
  ASSERT_TRUE(domain.ok());
  auto data = RandomDataset(*domain, 500, std::nullopt, 4);
  ASSERT_TRUE(data.ok());
  auto again = LoadCsv(WriteCsv(*data), *domain);
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(*again, *data);
}

TEST(RandomDatasetTest, QuotaSplits) {
  const Domain domain = MakeDomain({2});
  auto even = RandomDataset(domain, 4, std::vector<std::vector<double>>{{0.5, 0.5}}, 1);
  ASSERT_TRUE(even.ok());
  auto col = even->Column(0);
  EXPECT_EQ(std::count(col.begin(), col.end(), 0u), 2);
  auto all_zero =
      RandomDataset(domain, 10, std::vector<std::vector<double>>{{1.0, 0.0}}, 1);
  ASSERT_TRUE(all_zero.ok());
  for (uint32_t v : all_zero->Column(0)) EXPECT_EQ(v, 0u);
  EXPECT_FALSE(RandomDataset(domain, -1, std::nullopt, 1).ok());
}

TEST(RandomDatasetTest, UniformConcentration) {
  auto data = RandomDataset(MakeDomain({2}), 10000, std::nullopt, 99);
  ASSERT_TRUE(data.ok());
  auto col = data->Column(0);
  const double zeros = std::count(col.begin(), col.end(), 0u);
  EXPECT_LE(std::abs(zeros - 5000), 3 * std::sqrt(10000 * 0.25));
}

TEST(RandomDatasetTest, QuotaBoundAndDeterminism) {
  const Domain domain = MakeDomain({5, 3});
  const std::vector<std::vector<double>> m = {{0.1, 0.2, 0.3, 0.15, 0.25},
                                              {0.5, 0.25, 0.25}};
  for (int64_t n : {7, 33, 101}) {
    auto a = RandomDataset(domain, n, m, 5);
    auto b = RandomDataset(domain, n, m, 5);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(*a, *b);
    for (int attr = 0; attr < 2; ++attr) {
      auto t = ComputeMarginal(*a, *MarginalSchema::Create({attr}, 2));
      auto norm = t->Normalized();
      double l1 = 0.0;
      for (size_t v = 0; v < m[attr].size(); ++v) {
        l1 += std::abs(norm->counts()[v] - m[attr][v]);
      }
      EXPECT_LE(l1, static_cast<double>(m[attr].size()) / n + 1e-12);
    }
  }
}

TEST(ConcatColumnsTest, JoinsDomains) {
  auto a = RandomDataset(MakeDomain({2}), 5, std::nullopt, 1);
  auto b = RandomDataset(*Domain::Create({*AttributeSpec::Categorical("z", {"p", "q"})}),
                         5, std::nullopt, 2);
  std::vector<Dataset> parts = {*a, *b};
  auto joined = ConcatColumns(parts);
  ASSERT_TRUE(joined.ok()) << joined.status();
  EXPECT_EQ(joined->d(), 2);
  for (int r = 0; r < 5; ++r) EXPECT_EQ(joined->at(r, 1), b->at(r, 0));
}

}  // namespace
}  // namespace dpsyn
