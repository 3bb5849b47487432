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

#include "dpsyn/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <string>

#include "absl/strings/match.h"
#include "absl/strings/str_split.h"
#include "dpsyn/domain.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

namespace dpsyn {
namespace {

using ::dpsyn::testing::MakeDomain;
using Json = nlohmann::json;

struct Inputs {
  std::string domain_json;
  std::string data_csv;
};

Inputs SmallInputs(const std::vector<int>& sizes, int64_t n, uint64_t seed) {
  const Domain domain = MakeDomain(sizes);
  auto data = *RandomDataset(domain, n, std::nullopt, seed);
  return {DomainToJson(domain), WriteCsv(data)};
}

RunConfig BaseConfig(double eps, double delta) {
  RunConfig c;
  c.privacy = *PrivacyParams::Create(eps, delta, Neighboring::kUnbounded);
  c.seed = 11;
  c.synthesis.iterations = 20;
  return c;
}

TEST(ParseRunConfigTest, ReadsKeys) {
  auto c = ParseRunConfig(R"({"data": "d.csv", "domain": "d.json", "marginals": "m.json",
      "out": "o", "epsilon": 2.5, "delta": 1e-6, "neighboring": "bounded", "seed": 9,
      "alpha0": 0.5, "decay": {"kind": "step", "rate": 0.1, "step": 4},
      "iterations": 7, "method": "mcf", "records": 50, "trials": 10,
      "gini": {"city": "c", "sex": "s", "income": "i", "male": "m", "female": "f"}})");
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->data_path, "d.csv");
  EXPECT_EQ(c->privacy.epsilon, 2.5);
  EXPECT_EQ(c->privacy.delta, 1e-6);
  EXPECT_EQ(c->privacy.neighboring, Neighboring::kBounded);
  EXPECT_EQ(c->seed, 9u);
  EXPECT_EQ(c->synthesis.alpha0, 0.5);
  EXPECT_EQ(c->synthesis.decay.kind, DecaySchedule::Kind::kStep);
  EXPECT_EQ(c->synthesis.decay.step, 4);
  EXPECT_EQ(c->synthesis.iterations, 7);
  EXPECT_EQ(c->synthesis.method, UpdateMethod::kMcf);
  EXPECT_EQ(c->records, 50);
  EXPECT_EQ(c->trials, 10);
  ASSERT_TRUE(c->gini.has_value());
  EXPECT_EQ(c->gini->female_label, "f");
}

TEST(ParseRunConfigTest, Rejects) {
  EXPECT_FALSE(ParseRunConfig("[1]").ok());
  EXPECT_FALSE(ParseRunConfig("{").ok());
  EXPECT_FALSE(ParseRunConfig(R"({"epsilon": "x"})").ok());
  EXPECT_FALSE(ParseRunConfig(R"({"bogus": 1})").ok());
  EXPECT_FALSE(ParseRunConfig(R"({"method": "other"})").ok());
  EXPECT_FALSE(ParseRunConfig(R"({"neighboring": "other"})").ok());
  auto c = *ParseRunConfig(R"({"epsilon": -1})");
  EXPECT_FALSE(ValidateRunConfig(c).ok());
  c = *ParseRunConfig(R"({"iterations": 0})");
  EXPECT_FALSE(ValidateRunConfig(c).ok());
  c = *ParseRunConfig(R"({"compress_fraction": 1})");
  EXPECT_FALSE(ValidateRunConfig(c).ok());
  EXPECT_TRUE(ValidateRunConfig(*ParseRunConfig("{}")).ok());
}

TEST(ParseMarginalConfigTest, Forms) {
  auto m = *ParseMarginalConfig(R"({"marginals": [["a", "b"], ["c"]],
      "compress": {"a": {"rule": "fire"}, "b": "filter_combine"},
      "group_recode": [["c", "d"]]})");
  ASSERT_EQ(m.marginals.size(), 2u);
  EXPECT_EQ(m.marginals[1], std::vector<std::string>{"c"});
  ASSERT_EQ(m.compress.size(), 2u);
  EXPECT_EQ(m.compress[0].second, ThresholdRule::kFire);
  EXPECT_EQ(m.compress[1].second, ThresholdRule::kFilterCombine);
  ASSERT_EQ(m.group_recode.size(), 1u);
  EXPECT_EQ(ParseMarginalConfig(R"({"marginals": "all_3way"})")->all_arity, 3);
  EXPECT_FALSE(ParseMarginalConfig(R"({"marginals": "all_9way"})").ok());
  EXPECT_FALSE(ParseMarginalConfig(R"({})").ok());
  EXPECT_FALSE(ParseMarginalConfig(R"({"marginals": [[1]]})").ok());
  EXPECT_FALSE(ParseMarginalConfig(R"({"marginals": [["a"]], "x": 1})").ok());
  EXPECT_FALSE(ParseMarginalConfig(R"({"marginals": [["a"]], "group_recode": [["a"]]})").ok());
}

TEST(RunSynthesisTest, SmallWorkloadUsesBasicLaplace) {
  const Inputs in = SmallInputs({3, 4, 2, 3}, 600, 1);
  auto out = RunSynthesis(BaseConfig(10.0, 1e-8), in.data_csv, in.domain_json,
                          R"({"marginals": [["a0", "a1"], ["a1", "a2"], ["a2", "a3"]]})");
  ASSERT_TRUE(out.ok()) << out.status();
  const Json m = Json::parse(out->manifest);
  EXPECT_EQ(m["noise"]["strategy"], "lap_basic");
  EXPECT_EQ(m["noise"]["k"], 3);
  EXPECT_LE(m["guarantee"]["epsilon"].get<double>(), 10.0 + 1e-9);
  // Noisy total rounds to roughly the input size.
  EXPECT_NEAR(static_cast<double>(out->synthetic.n()), 600, 30);
  EXPECT_EQ(out->synthetic.domain().size(), 4);
  // CSV round trip against the original domain.
  auto domain = *LoadDomain(in.domain_json);
  auto back = LoadCsv(out->csv, domain);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->n(), out->synthetic.n());
}

TEST(RunSynthesisTest, LargeWorkloadUsesZcdp) {
  const Inputs in = SmallInputs(std::vector<int>(11, 2), 300, 2);
  RunConfig config = BaseConfig(1.0, 1e-8);
  config.records = 300;
  auto out = RunSynthesis(config, in.data_csv, in.domain_json, R"({"marginals": "all_2way"})");
  ASSERT_TRUE(out.ok()) << out.status();
  const Json m = Json::parse(out->manifest);
  EXPECT_EQ(m["noise"]["k"], 55);
  EXPECT_EQ(m["noise"]["strategy"], "gauss_zcdp");
  EXPECT_EQ(m["noise"]["distribution"], "gaussian");
  EXPECT_EQ(out->synthetic.n(), 300);
  EXPECT_LE(m["guarantee"]["delta"].get<double>(), 1e-8 * (1 + 1e-9));
}

TEST(RunSynthesisTest, DeterministicForSeed) {
  const Inputs in = SmallInputs({3, 4, 2, 3}, 400, 3);
  const char* mcfg = R"({"marginals": "all_2way", "compress": {"a1": "filter_combine"}})";
  RunConfig config = BaseConfig(20.0, 1e-8);
  auto a = *RunSynthesis(config, in.data_csv, in.domain_json, mcfg);
  auto b = *RunSynthesis(config, in.data_csv, in.domain_json, mcfg);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.archive, b.archive);
  EXPECT_EQ(a.manifest, b.manifest);
  config.seed = 12;
  auto c = *RunSynthesis(config, in.data_csv, in.domain_json, mcfg);
  EXPECT_NE(a.csv, c.csv);
}

TEST(RunSynthesisTest, CompressionSplitsBudget) {
  const Inputs in = SmallInputs({3, 6, 2}, 500, 4);
  RunConfig config = BaseConfig(2.0, 1e-6);
  auto out = RunSynthesis(config, in.data_csv, in.domain_json,
                          R"({"marginals": [["a0", "a1"], ["a1", "a2"]],
                              "compress": {"a1": "filter_combine"}})");
  ASSERT_TRUE(out.ok()) << out.status();
  const Json m = Json::parse(out->manifest);
  EXPECT_LE(m["guarantee"]["epsilon"].get<double>(), 2.0 + 1e-9);
  EXPECT_LE(m["guarantee"]["delta"].get<double>(), 1e-6 * (1 + 1e-9));
  EXPECT_FALSE(m["compress"].empty());
  // Output is in the original domain.
  EXPECT_EQ(out->synthetic.domain().attr(1).size(), 6);
}

TEST(RunSynthesisTest, GroupRecodeRoundTrip) {
  const Inputs in = SmallInputs({2, 3, 2, 2}, 300, 5);
  auto out = RunSynthesis(BaseConfig(5.0, 1e-8), in.data_csv, in.domain_json,
                          R"({"marginals": [["a0", "a2"], ["a2", "a3"]],
                              "group_recode": [["a0", "a1"]]})");
  ASSERT_TRUE(out.ok()) << out.status();
  const Domain& d = out->synthetic.domain();
  ASSERT_EQ(d.size(), 4);
  EXPECT_EQ(d.attr(0).name(), "a0");
  EXPECT_EQ(d.attr(1).name(), "a1");
  EXPECT_EQ(d.attr(1).size(), 3);
}

TEST(RunSynthesisTest, StagePrefixedErrors) {
  const Inputs in = SmallInputs({2, 2}, 50, 6);
  const RunConfig config = BaseConfig(1.0, 1e-8);
  const char* mcfg = R"({"marginals": [["a0", "a1"]]})";
  auto bad_domain = RunSynthesis(config, in.data_csv, "{", mcfg);
  EXPECT_TRUE(absl::StartsWith(bad_domain.status().message(), "domain: "))
      << bad_domain.status();
  auto bad_data = RunSynthesis(config, "a0,a1\nv0,zz\n", in.domain_json, mcfg);
  EXPECT_TRUE(absl::StartsWith(bad_data.status().message(), "data: ")) << bad_data.status();
  auto bad_marg = RunSynthesis(config, in.data_csv, in.domain_json,
                               R"({"marginals": [["a0", "nope"]]})");
  EXPECT_TRUE(absl::StartsWith(bad_marg.status().message(), "marginals: "))
      << bad_marg.status();
  RunConfig bad_cfg = config;
  bad_cfg.synthesis.iterations = 0;
  auto bad = RunSynthesis(bad_cfg, in.data_csv, in.domain_json, mcfg);
  EXPECT_TRUE(absl::StartsWith(bad.status().message(), "config: ")) << bad.status();
}

TEST(NoisePlanCsvTest, Rows) {
  const auto params = *PrivacyParams::Create(1.0, 1e-8, Neighboring::kUnbounded);
  auto one = *NoisePlanCsv(params, 1);
  std::vector<std::string> lines = absl::StrSplit(one, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_TRUE(absl::StartsWith(lines[0], "k,std_"));
  EXPECT_TRUE(absl::StartsWith(lines[1], "1,"));
  EXPECT_TRUE(absl::EndsWith(lines[1], ",lap_basic"));
  auto many = *NoisePlanCsv(params, 40);
  lines = absl::StrSplit(many, '\n', absl::SkipEmpty());
  EXPECT_EQ(lines.size(), 41u);
  EXPECT_TRUE(absl::EndsWith(lines[40], ",gauss_zcdp"));
  EXPECT_FALSE(NoisePlanCsv(params, 0).ok());
}

TEST(IndifCsvTest, OneRowPerPair) {
  auto data = *RandomDataset(MakeDomain({2, 3, 4}), 100, std::nullopt, 1);
  std::vector<std::string> lines = absl::StrSplit(IndifCsv(data), '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "attr_a,attr_b,indif");
  // Sorted by score, so only the set of pairs is fixed.
  std::vector<std::string> pairs;
  for (size_t i = 1; i < lines.size(); ++i) {
    pairs.push_back(lines[i].substr(0, lines[i].rfind(',')));
  }
  std::sort(pairs.begin(), pairs.end());
  EXPECT_EQ(pairs, (std::vector<std::string>{"a0,a1", "a0,a2", "a1,a2"}));
}

TEST(InspectArchiveTest, Summarizes) {
  const Inputs in = SmallInputs({2, 3}, 80, 7);
  auto out = *RunSynthesis(BaseConfig(1.0, 1e-8), in.data_csv, in.domain_json,
                           R"({"marginals": [["a0", "a1"]]})");
  auto text = InspectArchive(out.archive);
  ASSERT_TRUE(text.ok()) << text.status();
  EXPECT_TRUE(absl::StartsWith(*text, "[a0,a1] cells=6 ")) << *text;
  EXPECT_FALSE(InspectArchive("{}").ok());
  EXPECT_FALSE(InspectArchive("nope").ok());
}

TEST(FileTest, ReadWriteAndExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "dpsyn_pipeline_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "x.txt").string();
  ASSERT_TRUE(WriteFile(path, "hello").ok());
  EXPECT_EQ(*ReadFile(path), "hello");
  auto missing = ReadFile((dir / "missing.txt").string());
  EXPECT_EQ(ExitCode(missing.status()), 2);
  EXPECT_EQ(ExitCode(absl::OkStatus()), 0);
  EXPECT_EQ(ExitCode(absl::InvalidArgumentError("x")), 1);
  EXPECT_EQ(ExitCode(absl::PermissionDeniedError("x")), 2);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dpsyn
