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

// Command-line driver: synth, eval, noise-plan, indif, inspect.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_split.h"
#include "dpsyn/domain.h"
#include "dpsyn/engineering.h"
#include "dpsyn/pipeline.h"
#include "dpsyn/status_macros.h"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> data;
  std::optional<std::string> domain;
  std::optional<std::string> marginals;
  std::optional<std::string> synth;
  std::optional<std::string> out;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::string> neighboring;
  std::optional<uint64_t> seed;
  std::optional<int> iterations;
  std::optional<int64_t> records;
  std::optional<int> trials;
  std::optional<std::string> gini;
  int k_max = 100;
};

absl::StatusOr<dpsyn::RunConfig> BuildConfig(const Flags& f) {
  dpsyn::RunConfig c;
  if (!f.config.empty()) {
    DPSYN_ASSIGN_OR_RETURN(std::string text, dpsyn::ReadFile(f.config));
    DPSYN_ASSIGN_OR_RETURN(c, dpsyn::ParseRunConfig(text));
  }
  if (f.data) c.data_path = *f.data;
  if (f.domain) c.domain_path = *f.domain;
  if (f.marginals) c.marginals_path = *f.marginals;
  if (f.out) c.out_dir = *f.out;
  if (f.epsilon) c.privacy.epsilon = *f.epsilon;
  if (f.delta) c.privacy.delta = *f.delta;
  if (f.neighboring) {
    c.privacy.neighboring = *f.neighboring == "bounded"
                                ? dpsyn::Neighboring::kBounded
                                : dpsyn::Neighboring::kUnbounded;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.iterations) c.synthesis.iterations = *f.iterations;
  if (f.records) c.records = *f.records;
  if (f.trials) c.trials = *f.trials;
  if (f.gini) {
    std::vector<std::string> parts = absl::StrSplit(*f.gini, ',');
    if (parts.size() < 3 || parts.size() > 5) {
      return absl::InvalidArgumentError(
          "--gini takes CITY,SEX,INCOME[,MALE,FEMALE]");
    }
    dpsyn::GiniOptions g{parts[0], parts[1], parts[2], std::nullopt, std::nullopt};
    if (parts.size() > 3) g.male_label = parts[3];
    if (parts.size() > 4) g.female_label = parts[4];
    c.gini = g;
  }
  DPSYN_RETURN_IF_ERROR(dpsyn::ValidateRunConfig(c));
  return c;
}

absl::Status Emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) return dpsyn::WriteFile(*out, text);
  std::cout << text;
  return absl::OkStatus();
}

absl::Status LoadData(const dpsyn::RunConfig& c, std::optional<dpsyn::Dataset>& data) {
  if (c.data_path.empty() || c.domain_path.empty()) {
    return absl::InvalidArgumentError("--data and --domain are required");
  }
  DPSYN_ASSIGN_OR_RETURN(std::string domain_text, dpsyn::ReadFile(c.domain_path));
  DPSYN_ASSIGN_OR_RETURN(std::string data_text, dpsyn::ReadFile(c.data_path));
  DPSYN_ASSIGN_OR_RETURN(dpsyn::Domain domain, dpsyn::LoadDomain(domain_text));
  DPSYN_ASSIGN_OR_RETURN(dpsyn::Dataset d, dpsyn::LoadCsv(data_text, domain));
  data = std::move(d);
  return absl::OkStatus();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic data from noisy marginals"};
  app.require_subcommand(1);
  Flags f;
  const auto neighboring_check = CLI::IsMember({"bounded", "unbounded"});

  auto* synth = app.add_subcommand("synth", "Synthesize a dataset");
  auto* eval = app.add_subcommand("eval", "Score a synthetic dataset");
  auto* plan = app.add_subcommand("noise-plan", "Tabulate noise strategies");
  auto* indif = app.add_subcommand("indif", "Rank attribute pairs by InDif");
  auto* inspect = app.add_subcommand("inspect", "Summarize a marginal archive");

  for (auto* cmd : {synth, eval, indif}) {
    cmd->add_option("--config", f.config, "Run config JSON");
    cmd->add_option("--data", f.data, "Input CSV");
    cmd->add_option("--domain", f.domain, "Domain JSON");
  }
  synth->add_option("--marginals", f.marginals, "Marginal config JSON");
  synth->add_option("--out", f.out, "Output directory");
  synth->add_option("--iterations", f.iterations, "Synthesis sweeps");
  synth->add_option("--records", f.records, "Synthetic record count");
  for (auto* cmd : {synth, plan}) {
    cmd->add_option("--epsilon", f.epsilon, "Privacy epsilon");
    cmd->add_option("--delta", f.delta, "Privacy delta");
    cmd->add_option("--neighboring", f.neighboring, "bounded or unbounded")
        ->check(neighboring_check);
  }
  for (auto* cmd : {synth, eval}) cmd->add_option("--seed", f.seed, "Seed");
  eval->add_option("--synth", f.synth, "Synthetic CSV")->required();
  eval->add_option("--trials", f.trials, "Queries per metric");
  eval->add_option("--gini", f.gini, "CITY,SEX,INCOME[,MALE,FEMALE]");
  eval->add_option("--out", f.out, "Write the report here");
  plan->add_option("--k-max", f.k_max, "Largest marginal count")
      ->check(CLI::PositiveNumber);
  plan->add_option("--out", f.out, "Write the CSV here");
  indif->add_option("--out", f.out, "Write the CSV here");
  inspect->add_option("archive", f.marginals, "Marginal archive JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the validation exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  absl::Status status = [&]() -> absl::Status {
    if (*inspect) {
      DPSYN_ASSIGN_OR_RETURN(std::string text, dpsyn::ReadFile(*f.marginals));
      DPSYN_ASSIGN_OR_RETURN(std::string summary, dpsyn::InspectArchive(text));
      std::cout << summary;
      return absl::OkStatus();
    }
    if (*plan) {
      dpsyn::PrivacyParams p;
      if (f.epsilon) p.epsilon = *f.epsilon;
      if (f.delta) p.delta = *f.delta;
      if (f.neighboring == "bounded") p.neighboring = dpsyn::Neighboring::kBounded;
      DPSYN_ASSIGN_OR_RETURN(std::string csv, dpsyn::NoisePlanCsv(p, f.k_max));
      return Emit(f.out, csv);
    }
    DPSYN_ASSIGN_OR_RETURN(dpsyn::RunConfig config, BuildConfig(f));
    if (*synth) return dpsyn::RunSynth(config);
    if (*eval) {
      DPSYN_ASSIGN_OR_RETURN(std::string report, dpsyn::RunEval(config, *f.synth));
      return Emit(f.out, report);
    }
    std::optional<dpsyn::Dataset> data;
    DPSYN_RETURN_IF_ERROR(LoadData(config, data));
    return Emit(f.out, dpsyn::IndifCsv(*data));
  }();
  if (!status.ok()) {
    std::cerr << "dpsyn: " << status.message() << "\n";
  }
  return dpsyn::ExitCode(status);
}
