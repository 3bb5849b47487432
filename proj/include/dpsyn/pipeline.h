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

#ifndef DPSYN_PIPELINE_H_
#define DPSYN_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsyn/domain.h"
#include "dpsyn/engineering.h"
#include "dpsyn/evaluation.h"
#include "dpsyn/privacy.h"
#include "dpsyn/synthesis.h"

namespace dpsyn {

struct RunConfig {
  std::string data_path;
  std::string domain_path;
  std::string marginals_path;
  std::string out_dir;
  PrivacyParams privacy{1.0, 1e-8, Neighboring::kUnbounded};
  SynthesisConfig synthesis;
  uint64_t seed = 0;
  // Share of epsilon and delta spent on the 1-way marginals that drive
  // attribute compression. Unused when nothing is compressed.
  double compress_fraction = 0.1;
  // Synthetic record count; defaults to the rounded noisy total.
  std::optional<int64_t> records;
  int trials = 300;
  std::optional<GiniOptions> gini;
};

// Reads a JSON object whose keys mirror RunConfig. Missing keys keep their
// defaults; unknown keys are rejected.
absl::StatusOr<RunConfig> ParseRunConfig(std::string_view json_text);
absl::Status ValidateRunConfig(const RunConfig& config);

// {"marginals": [[names...], ...] | "all_1way" | "all_2way",
//  "compress": {"Attr": {"rule": "fire" | "filter_combine"}},
//  "group_recode": [[names...], ...]}
struct MarginalConfig {
  std::vector<std::vector<std::string>> marginals;
  std::optional<int> all_arity;
  std::vector<std::pair<std::string, ThresholdRule>> compress;
  std::vector<std::vector<std::string>> group_recode;
};

absl::StatusOr<MarginalConfig> ParseMarginalConfig(std::string_view json_text);

struct SynthOutputs {
  Dataset synthetic;
  std::string csv;
  std::string archive;
  std::string manifest;
};

// The full pipeline on in-memory inputs: group recoding, compression,
// marginal computation, noise, consistency, synthesis and decoding.
// Errors carry the failing stage name as a prefix.
absl::StatusOr<SynthOutputs> RunSynthesis(const RunConfig& config,
                                          std::string_view data_csv,
                                          std::string_view domain_json,
                                          std::string_view marginal_json);

// Reads the inputs named in `config` and writes synthetic.csv,
// marginals.json and manifest.json into config.out_dir.
absl::Status RunSynth(const RunConfig& config);

// Scores `synth_path` against config.data_path.
absl::StatusOr<std::string> RunEval(const RunConfig& config,
                                    const std::string& synth_path);

// CSV with columns k, std_<strategy> for each strategy and chosen.
absl::StatusOr<std::string> NoisePlanCsv(const PrivacyParams& params, int k_max);

// CSV of attr_a, attr_b, indif in descending score order.
std::string IndifCsv(const Dataset& dataset);

// Human-readable summary of a marginal archive.
absl::StatusOr<std::string> InspectArchive(std::string_view archive_json);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, std::string_view contents);

// 0 on success, 2 for I/O failures, 1 otherwise.
int ExitCode(const absl::Status& status);

}  // namespace dpsyn

#endif  // DPSYN_PIPELINE_H_
