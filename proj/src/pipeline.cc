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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpsyn/consistency.h"
#include "dpsyn/csv.h"
#include "dpsyn/marginal.h"
#include "dpsyn/status_macros.h"
#include "json.hpp"

namespace dpsyn {
namespace {

using Json = nlohmann::ordered_json;

absl::Status InStage(std::string_view stage, const absl::Status& status) {
  if (status.ok()) return status;
  return absl::Status(status.code(),
                      absl::StrCat(std::string(stage), ": ",
                                   std::string(status.message())));
}

template <typename T>
absl::StatusOr<T> InStage(std::string_view stage, absl::StatusOr<T> value) {
  if (value.ok()) return value;
  return InStage(stage, value.status());
}

std::string NeighboringName(Neighboring n) {
  return n == Neighboring::kBounded ? "bounded" : "unbounded";
}

std::string DecayName(DecaySchedule::Kind kind) {
  switch (kind) {
    case DecaySchedule::Kind::kStep: return "step";
    case DecaySchedule::Kind::kExponential: return "exponential";
    case DecaySchedule::Kind::kLinear: return "linear";
    case DecaySchedule::Kind::kSqrt: return "sqrt";
  }
  return "step";
}

std::string RuleName(ThresholdRule rule) {
  return rule == ThresholdRule::kFire ? "fire" : "filter_combine";
}

absl::StatusOr<Neighboring> ParseNeighboring(const std::string& name) {
  if (name == "bounded") return Neighboring::kBounded;
  if (name == "unbounded") return Neighboring::kUnbounded;
  return absl::InvalidArgumentError(
      absl::StrCat("neighboring must be bounded or unbounded, got ", name));
}

absl::StatusOr<DecaySchedule::Kind> ParseDecayKind(const std::string& name) {
  if (name == "step") return DecaySchedule::Kind::kStep;
  if (name == "exponential") return DecaySchedule::Kind::kExponential;
  if (name == "linear") return DecaySchedule::Kind::kLinear;
  if (name == "sqrt") return DecaySchedule::Kind::kSqrt;
  return absl::InvalidArgumentError(absl::StrCat("unknown decay ", name));
}

Json RunConfigToJson(const RunConfig& c) {
  Json j;
  j["data"] = c.data_path;
  j["domain"] = c.domain_path;
  j["marginals"] = c.marginals_path;
  j["out"] = c.out_dir;
  j["epsilon"] = c.privacy.epsilon;
  j["delta"] = c.privacy.delta;
  j["neighboring"] = NeighboringName(c.privacy.neighboring);
  j["seed"] = c.seed;
  j["alpha0"] = c.synthesis.alpha0;
  j["decay"] = {{"kind", DecayName(c.synthesis.decay.kind)},
                {"rate", c.synthesis.decay.rate},
                {"step", c.synthesis.decay.step}};
  j["iterations"] = c.synthesis.iterations;
  j["dup_ramp"] = c.synthesis.dup_ramp;
  j["convergence_tol"] = c.synthesis.convergence_tol;
  j["method"] = c.synthesis.method == UpdateMethod::kMcf ? "mcf" : "gum";
  j["compress_fraction"] = c.compress_fraction;
  j["records"] = c.records ? Json(*c.records) : Json(nullptr);
  j["trials"] = c.trials;
  if (c.gini) {
    Json g{{"city", c.gini->city_attr},
           {"sex", c.gini->sex_attr},
           {"income", c.gini->income_attr}};
    if (c.gini->male_label) g["male"] = *c.gini->male_label;
    if (c.gini->female_label) g["female"] = *c.gini->female_label;
    j["gini"] = g;
  } else {
    j["gini"] = nullptr;
  }
  return j;
}

absl::StatusOr<Json> ParseJson(std::string_view text) {
  Json j = Json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) return absl::InvalidArgumentError("malformed JSON");
  return j;
}

absl::StatusOr<std::vector<std::string>> NameList(const Json& j) {
  if (!j.is_array() || j.empty()) {
    return absl::InvalidArgumentError("expected a non-empty list of names");
  }
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) return absl::InvalidArgumentError("names must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Combinations of {0..d-1} of size k in lexicographic order.
std::vector<std::vector<int>> AllSubsets(int d, int k) {
  std::vector<std::vector<int>> out;
  if (k > d) return out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

std::string Hex(uint64_t v) { return absl::StrFormat("%016x", v); }

struct CompressedAttr {
  RecodeMap map;
  AttributeSpec original;
  ThresholdRule rule;
  double theta = 0.0;
};

Json CandidateStds(const NoisePlan& plan) {
  Json j = Json::object();
  for (size_t i = 0; i < kAllStrategies.size(); ++i) {
    const auto& s = plan.candidate_std[i];
    j[std::string(StrategyName(kAllStrategies[i]))] = s ? Json(*s) : Json(nullptr);
  }
  return j;
}

// Budget charged to each marginal under the plan's composition route.
absl::StatusOr<Json> PerMarginalBudget(const NoisePlan& plan,
                                       const PrivacyParams& params) {
  const int k = plan.k;
  switch (plan.strategy) {
    case Strategy::kLapBasic:
      return Json{{"epsilon", params.epsilon / k}, {"delta", 0.0}};
    case Strategy::kLapAdv: {
      DPSYN_ASSIGN_OR_RETURN(double eps0,
                             AdvancedEpsPer(params.epsilon, params.delta, k));
      return Json{{"epsilon", eps0}, {"delta", 0.0}};
    }
    case Strategy::kGaussAdv: {
      DPSYN_ASSIGN_OR_RETURN(
          double eps0, AdvancedEpsPer(params.epsilon, params.delta / 2.0, k));
      return Json{{"epsilon", eps0}, {"delta", params.delta / (2.0 * k)}};
    }
    case Strategy::kLapZcdp:
    case Strategy::kGaussZcdp: {
      DPSYN_ASSIGN_OR_RETURN(ZcdpBudget rho,
                             ZcdpFromDp(params.epsilon, params.delta));
      return Json{{"rho", rho.rho / k}};
    }
  }
  return absl::InternalError("unknown strategy");
}

Json PlanToJson(const NoisePlan& plan, const PrivacyParams& params) {
  const PrivacyGuarantee g = ComposedGuarantee(plan, params);
  Json j;
  j["epsilon"] = params.epsilon;
  j["delta"] = params.delta;
  j["k"] = plan.k;
  j["strategy"] = std::string(StrategyName(plan.strategy));
  j["distribution"] =
      plan.distribution == NoiseDistribution::kLaplace ? "laplace" : "gaussian";
  j["per_marginal_std"] = plan.per_marginal_std;
  auto budget = PerMarginalBudget(plan, params);
  j["per_marginal_budget"] = budget.ok() ? *budget : Json(nullptr);
  j["candidate_std"] = CandidateStds(plan);
  j["gaussian_bound_extrapolated"] = plan.gaussian_bound_extrapolated;
  j["composed"] = {{"epsilon", g.epsilon}, {"delta", g.delta}};
  return j;
}

Json NamesOf(const Domain& domain, std::span<const int> attrs) {
  Json j = Json::array();
  for (int a : attrs) j.push_back(domain.attr(a).name());
  return j;
}

}  // namespace

absl::StatusOr<RunConfig> ParseRunConfig(std::string_view json_text) {
  DPSYN_ASSIGN_OR_RETURN(Json j, ParseJson(json_text));
  if (!j.is_object()) return absl::InvalidArgumentError("config must be an object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "data") c.data_path = v.get<std::string>();
      else if (key == "domain") c.domain_path = v.get<std::string>();
      else if (key == "marginals") c.marginals_path = v.get<std::string>();
      else if (key == "out") c.out_dir = v.get<std::string>();
      else if (key == "epsilon") c.privacy.epsilon = v.get<double>();
      else if (key == "delta") c.privacy.delta = v.get<double>();
      else if (key == "neighboring") {
        DPSYN_ASSIGN_OR_RETURN(c.privacy.neighboring,
                               ParseNeighboring(v.get<std::string>()));
      } else if (key == "seed") c.seed = v.get<uint64_t>();
      else if (key == "alpha0") c.synthesis.alpha0 = v.get<double>();
      else if (key == "decay") {
        if (v.contains("kind")) {
          DPSYN_ASSIGN_OR_RETURN(c.synthesis.decay.kind,
                                 ParseDecayKind(v["kind"].get<std::string>()));
        }
        if (v.contains("rate")) c.synthesis.decay.rate = v["rate"].get<double>();
        if (v.contains("step")) c.synthesis.decay.step = v["step"].get<int>();
      } else if (key == "iterations") c.synthesis.iterations = v.get<int>();
      else if (key == "dup_ramp") c.synthesis.dup_ramp = v.get<double>();
      else if (key == "convergence_tol") c.synthesis.convergence_tol = v.get<double>();
      else if (key == "method") {
        const auto m = v.get<std::string>();
        if (m == "gum") c.synthesis.method = UpdateMethod::kGum;
        else if (m == "mcf") c.synthesis.method = UpdateMethod::kMcf;
        else return absl::InvalidArgumentError(absl::StrCat("unknown method ", m));
      } else if (key == "compress_fraction") c.compress_fraction = v.get<double>();
      else if (key == "records") {
        if (!v.is_null()) c.records = v.get<int64_t>();
      } else if (key == "trials") c.trials = v.get<int>();
      else if (key == "gini") {
        if (v.is_null()) continue;
        GiniOptions g;
        g.city_attr = v.at("city").get<std::string>();
        g.sex_attr = v.at("sex").get<std::string>();
        g.income_attr = v.at("income").get<std::string>();
        if (v.contains("male")) g.male_label = v["male"].get<std::string>();
        if (v.contains("female")) g.female_label = v["female"].get<std::string>();
        c.gini = g;
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown config key ", key));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad config value: ", e.what()));
  }
  return c;
}

absl::Status ValidateRunConfig(const RunConfig& c) {
  DPSYN_RETURN_IF_ERROR(PrivacyParams::Create(c.privacy.epsilon, c.privacy.delta,
                                              c.privacy.neighboring)
                            .status());
  if (!(c.compress_fraction > 0 && c.compress_fraction < 1)) {
    return absl::InvalidArgumentError("compress_fraction must be in (0, 1)");
  }
  if (!(c.synthesis.alpha0 > 0)) return absl::InvalidArgumentError("alpha0 must be > 0");
  if (c.synthesis.iterations < 1) {
    return absl::InvalidArgumentError("iterations must be >= 1");
  }
  if (!(c.synthesis.decay.rate >= 0) || c.synthesis.decay.step < 1) {
    return absl::InvalidArgumentError("decay rate must be >= 0 and step >= 1");
  }
  if (c.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (c.records && *c.records < 0) {
    return absl::InvalidArgumentError("records must be >= 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<MarginalConfig> ParseMarginalConfig(std::string_view json_text) {
  DPSYN_ASSIGN_OR_RETURN(Json j, ParseJson(json_text));
  if (!j.is_object()) {
    return absl::InvalidArgumentError("marginal config must be an object");
  }
  MarginalConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "marginals") {
        if (v.is_string()) {
          const auto s = v.get<std::string>();
          if (s == "all_1way") c.all_arity = 1;
          else if (s == "all_2way") c.all_arity = 2;
          else if (s == "all_3way") c.all_arity = 3;
          else return absl::InvalidArgumentError(absl::StrCat("unknown marginal set ", s));
          continue;
        }
        if (!v.is_array()) return absl::InvalidArgumentError("marginals must be a list");
        for (const auto& m : v) {
          DPSYN_ASSIGN_OR_RETURN(auto names, NameList(m));
          c.marginals.push_back(std::move(names));
        }
      } else if (key == "compress") {
        for (const auto& [name, spec] : v.items()) {
          const std::string rule_name =
              spec.is_string() ? spec.get<std::string>()
                               : spec.at("rule").get<std::string>();
          auto rule = ThresholdRuleFromName(rule_name);
          if (!rule) {
            return absl::InvalidArgumentError(
                absl::StrCat("unknown threshold rule ", rule_name));
          }
          c.compress.emplace_back(name, *rule);
        }
      } else if (key == "group_recode") {
        for (const auto& g : v) {
          DPSYN_ASSIGN_OR_RETURN(auto names, NameList(g));
          if (names.size() < 2) {
            return absl::InvalidArgumentError("a recode group needs two attributes");
          }
          c.group_recode.push_back(std::move(names));
        }
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown key ", key));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad marginal config: ", e.what()));
  }
  if (c.marginals.empty() && !c.all_arity) {
    return absl::InvalidArgumentError("no marginals configured");
  }
  return c;
}

absl::StatusOr<SynthOutputs> RunSynthesis(const RunConfig& config,
                                          std::string_view data_csv,
                                          std::string_view domain_json,
                                          std::string_view marginal_json) {
  DPSYN_RETURN_IF_ERROR(InStage("config", ValidateRunConfig(config)));
  DPSYN_ASSIGN_OR_RETURN(Domain domain, InStage("domain", LoadDomain(domain_json)));
  DPSYN_ASSIGN_OR_RETURN(Dataset data, InStage("data", LoadCsv(data_csv, domain)));
  DPSYN_ASSIGN_OR_RETURN(MarginalConfig mcfg,
                         InStage("marginal config", ParseMarginalConfig(marginal_json)));
  const uint64_t seed = config.seed;
  Json manifest;
  manifest["config"] = RunConfigToJson(config);
  manifest["inputs"] = {{"data_hash", Hex(StableHash(data_csv))},
                        {"domain_hash", Hex(StableHash(domain_json))},
                        {"marginal_config_hash", Hex(StableHash(marginal_json))},
                        {"records", data.n()}};

  // Names in the marginal config keep referring to original attributes;
  // grouped attributes resolve to their combined attribute.
  std::map<std::string, std::string> rename;
  Dataset working = data;
  auto resolve = [&](const std::string& name) -> absl::StatusOr<int> {
    auto it = rename.find(name);
    const std::string& current = it == rename.end() ? name : it->second;
    auto idx = working.domain().IndexOf(current);
    if (!idx) return absl::InvalidArgumentError(absl::StrCat("unknown attribute ", name));
    return *idx;
  };

  std::vector<GroupDecoder> decoders;
  Json groups = Json::array();
  for (const auto& group : mcfg.group_recode) {
    std::vector<int> idx;
    for (const auto& name : group) {
      DPSYN_ASSIGN_OR_RETURN(int a, InStage("group recode", resolve(name)));
      idx.push_back(a);
    }
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      return absl::InvalidArgumentError("group recode: attribute listed twice");
    }
    std::vector<std::string> members;
    for (int a : idx) members.push_back(working.domain().attr(a).name());
    // The full product keeps the combined domain independent of the data.
    DPSYN_ASSIGN_OR_RETURN(GroupRecoding rec,
                           InStage("group recode", GroupRecode(working, idx, true)));
    const std::string combined = rec.combined.name();
    for (auto& [from, to] : rename) {
      if (std::find(members.begin(), members.end(), to) != members.end()) to = combined;
    }
    for (const auto& name : group) rename[name] = combined;
    groups.push_back({{"attributes", group}, {"combined", combined},
                      {"size", rec.combined.size()}});
    working = std::move(rec.dataset);
    decoders.push_back(std::move(rec.decoder));
  }
  manifest["group_recode"] = groups;

  PrivacyParams main_params = config.privacy;
  std::vector<CompressedAttr> compressed;
  std::optional<NoisePlan> compress_plan;
  std::optional<PrivacyParams> compress_params;
  Json compress_json = nullptr;
  if (!mcfg.compress.empty()) {
    const double f = config.compress_fraction;
    DPSYN_ASSIGN_OR_RETURN(
        PrivacyParams cp,
        InStage("compress", PrivacyParams::Create(f * config.privacy.epsilon,
                                                  f * config.privacy.delta,
                                                  config.privacy.neighboring)));
    DPSYN_ASSIGN_OR_RETURN(
        main_params,
        InStage("compress", PrivacyParams::Create((1 - f) * config.privacy.epsilon,
                                                  (1 - f) * config.privacy.delta,
                                                  config.privacy.neighboring)));
    const int kc = static_cast<int>(mcfg.compress.size());
    DPSYN_ASSIGN_OR_RETURN(NoisePlan plan, InStage("compress", PlanNoise(cp, kc)));
    compress_json = {{"fraction", f}, {"plan", PlanToJson(plan, cp)}};
    compress_plan = plan;
    compress_params = cp;
    Json attrs = Json::array();
    std::vector<int> seen;
    for (const auto& [name, rule] : mcfg.compress) {
      DPSYN_ASSIGN_OR_RETURN(int a, InStage("compress", resolve(name)));
      if (std::find(seen.begin(), seen.end(), a) != seen.end()) {
        return absl::InvalidArgumentError("compress: attribute listed twice");
      }
      seen.push_back(a);
      DPSYN_ASSIGN_OR_RETURN(MarginalSchema schema,
                             MarginalSchema::Create({a}, working.d()));
      DPSYN_ASSIGN_OR_RETURN(MarginalTable exact,
                             InStage("compress", ComputeMarginal(working, schema)));
      DPSYN_ASSIGN_OR_RETURN(
          MarginalTable noisy,
          InStage("compress",
                  AddNoise(exact, plan.per_marginal_std, plan.distribution,
                           DeriveSeed(seed, "compress", std::vector<int>{a}))));
      const double theta = Threshold(rule, plan.per_marginal_std);
      DPSYN_ASSIGN_OR_RETURN(RecodeMap map,
                             InStage("compress", CompressAttribute(noisy, theta)));
      CompressedAttr entry{map, working.domain().attr(a), rule, theta};
      DPSYN_ASSIGN_OR_RETURN(working,
                             InStage("compress", CompressDataset(working, map)));
      attrs.push_back({{"attribute", entry.original.name()},
                       {"rule", RuleName(rule)},
                       {"theta", theta},
                       {"original_size", map.original_size},
                       {"compressed_size", map.compressed_size()},
                       {"grouped", map.grouped.size()}});
      compressed.push_back(std::move(entry));
    }
    compress_json["attributes"] = attrs;
  }
  manifest["compress"] = compress_json;

  const Domain& work_domain = working.domain();
  std::vector<MarginalSchema> schemas;
  if (mcfg.all_arity) {
    for (auto& attrs : AllSubsets(work_domain.size(), *mcfg.all_arity)) {
      DPSYN_ASSIGN_OR_RETURN(MarginalSchema s,
                             MarginalSchema::Create(attrs, work_domain.size()));
      schemas.push_back(std::move(s));
    }
  }
  for (const auto& names : mcfg.marginals) {
    std::vector<int> idx;
    for (const auto& name : names) {
      DPSYN_ASSIGN_OR_RETURN(int a, InStage("marginals", resolve(name)));
      idx.push_back(a);
    }
    DPSYN_ASSIGN_OR_RETURN(
        MarginalSchema s,
        InStage("marginals", MarginalSchema::FromUnsorted(idx, work_domain.size())));
    if (std::find(schemas.begin(), schemas.end(), s) != schemas.end()) {
      return absl::InvalidArgumentError("marginals: duplicate marginal");
    }
    schemas.push_back(std::move(s));
  }
  if (schemas.empty()) return absl::InvalidArgumentError("marginals: none selected");

  const int k = static_cast<int>(schemas.size());
  DPSYN_ASSIGN_OR_RETURN(NoisePlan plan, InStage("plan noise", PlanNoise(main_params, k)));
  manifest["noise"] = PlanToJson(plan, main_params);
  // Basic composition across the compression and main stages.
  PrivacyGuarantee spent = ComposedGuarantee(plan, main_params);
  if (compress_plan) {
    const PrivacyGuarantee c = ComposedGuarantee(*compress_plan, *compress_params);
    spent.epsilon += c.epsilon;
    spent.delta += c.delta;
  }
  manifest["guarantee"] = {{"epsilon", spent.epsilon}, {"delta", spent.delta}};

  std::vector<MarginalTable> tables;
  for (const auto& s : schemas) {
    DPSYN_ASSIGN_OR_RETURN(MarginalTable exact,
                           InStage("marginals", ComputeMarginal(working, s)));
    DPSYN_ASSIGN_OR_RETURN(
        MarginalTable noisy,
        InStage("add noise", AddNoise(exact, plan.per_marginal_std,
                                      plan.distribution,
                                      DeriveSeed(seed, "noise", s.attrs()))));
    tables.push_back(std::move(noisy));
  }

  ConsistencyReport crep;
  DPSYN_ASSIGN_OR_RETURN(tables,
                         InStage("consistency", EnforceConsistency(std::move(tables), &crep)));
  DPSYN_ASSIGN_OR_RETURN(tables,
                         InStage("nonneg", NonnegConsistent(std::move(tables), &crep)));
  manifest["consistency"] = {{"equal_weight_fallback", crep.equal_weight_fallback},
                             {"nonneg_rounds", crep.nonneg_rounds},
                             {"uniform_mix", crep.uniform_mix}};

  const double total = tables.front().total();
  const int64_t n = config.records ? *config.records : std::llround(total);
  if (n > 0 && !(total > 0)) {
    return absl::FailedPreconditionError(
        "synthesize: noisy marginals have no mass; set records explicitly");
  }
  if (total > 0) {
    for (auto& t : tables) t = t.Scaled(static_cast<double>(n) / total);
  }

  SynthesisConfig sconfig = config.synthesis;
  sconfig.seed = DeriveSeed(seed, "synthesize");
  SynthesisReport srep;
  DPSYN_ASSIGN_OR_RETURN(
      Dataset synth,
      InStage("synthesize", Synthesize(tables, work_domain, n, sconfig, &srep)));
  Json comps = Json::array();
  for (const auto& c : srep.components) comps.push_back(NamesOf(work_domain, c));
  manifest["synthesis"] = {{"records", n},
                           {"components", comps},
                           {"appended", NamesOf(work_domain, srep.appended)},
                           {"uncovered", NamesOf(work_domain, srep.uncovered)},
                           {"initial_error", srep.initial_error},
                           {"final_error", srep.final_error},
                           {"sweeps", srep.sweeps.size()}};

  for (auto it = compressed.rbegin(); it != compressed.rend(); ++it) {
    DPSYN_ASSIGN_OR_RETURN(
        synth, InStage("expand", ExpandCompressed(
                                     synth, it->map, it->original,
                                     DeriveSeed(seed, "expand",
                                                std::vector<int>{it->map.attr}))));
  }
  for (auto it = decoders.rbegin(); it != decoders.rend(); ++it) {
    DPSYN_ASSIGN_OR_RETURN(synth, InStage("group decode", GroupDecode(synth, *it)));
  }

  Json marginals = Json::array();
  for (const auto& t : tables) {
    marginals.push_back({{"attributes", NamesOf(work_domain, t.attrs())},
                         {"cells", t.num_cells()},
                         {"noise_std", plan.per_marginal_std}});
  }
  manifest["marginals"] = marginals;

  SynthOutputs out{std::move(synth), "", "", ""};
  out.csv = WriteCsv(out.synthetic);
  out.archive = MarginalArchiveToJson(tables, work_domain);
  out.manifest = manifest.dump(2) + "\n";
  return out;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return absl::DataLossError(absl::StrCat("error reading ", path));
  return ss.str();
}

absl::Status WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) return absl::DataLossError(absl::StrCat("error writing ", path));
  return absl::OkStatus();
}

int ExitCode(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 0;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kDataLoss:
      return 2;
    default:
      return 1;
  }
}

absl::Status RunSynth(const RunConfig& config) {
  if (config.data_path.empty() || config.domain_path.empty() ||
      config.marginals_path.empty() || config.out_dir.empty()) {
    return absl::InvalidArgumentError(
        "synth needs data, domain, marginals and out paths");
  }
  DPSYN_ASSIGN_OR_RETURN(std::string data, ReadFile(config.data_path));
  DPSYN_ASSIGN_OR_RETURN(std::string domain, ReadFile(config.domain_path));
  DPSYN_ASSIGN_OR_RETURN(std::string marginals, ReadFile(config.marginals_path));
  DPSYN_ASSIGN_OR_RETURN(SynthOutputs out,
                         RunSynthesis(config, data, domain, marginals));
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot create ", config.out_dir, ": ", ec.message()));
  }
  const std::filesystem::path dir(config.out_dir);
  DPSYN_RETURN_IF_ERROR(WriteFile((dir / "synthetic.csv").string(), out.csv));
  DPSYN_RETURN_IF_ERROR(WriteFile((dir / "marginals.json").string(), out.archive));
  DPSYN_RETURN_IF_ERROR(WriteFile((dir / "manifest.json").string(), out.manifest));
  return absl::OkStatus();
}

absl::StatusOr<std::string> RunEval(const RunConfig& config,
                                    const std::string& synth_path) {
  if (config.data_path.empty() || config.domain_path.empty() || synth_path.empty()) {
    return absl::InvalidArgumentError("eval needs data, domain and synth paths");
  }
  DPSYN_ASSIGN_OR_RETURN(std::string domain_text, ReadFile(config.domain_path));
  DPSYN_ASSIGN_OR_RETURN(std::string orig_text, ReadFile(config.data_path));
  DPSYN_ASSIGN_OR_RETURN(std::string synth_text, ReadFile(synth_path));
  DPSYN_ASSIGN_OR_RETURN(Domain domain, InStage("domain", LoadDomain(domain_text)));
  DPSYN_ASSIGN_OR_RETURN(Dataset orig, InStage("data", LoadCsv(orig_text, domain)));
  DPSYN_ASSIGN_OR_RETURN(Dataset synth, InStage("synth", LoadCsv(synth_text, domain)));

  ScoreReport report;
  report.trials = config.trials;
  report.seed = config.seed;
  const int arity = std::min(3, domain.size());
  DPSYN_ASSIGN_OR_RETURN(report.density,
                         InStage("density", DensityScore(orig, synth, config.trials,
                                                         arity, config.seed)));
  DPSYN_ASSIGN_OR_RETURN(report.range,
                         InStage("range", RangeQueryScore(orig, synth, config.trials,
                                                          config.seed)));
  if (config.gini) {
    DPSYN_ASSIGN_OR_RETURN(GiniResult g,
                           InStage("gini", GiniGenderScore(orig, synth, *config.gini)));
    report.gini_gap = g.score;
    report.skipped_cities = g.skipped_cities;
  }
  return ScoreReportToJson(report);
}

absl::StatusOr<std::string> NoisePlanCsv(const PrivacyParams& params, int k_max) {
  if (k_max < 1) return absl::InvalidArgumentError("k_max must be >= 1");
  DPSYN_RETURN_IF_ERROR(
      PrivacyParams::Create(params.epsilon, params.delta, params.neighboring).status());
  std::string out = "k";
  for (Strategy s : kAllStrategies) absl::StrAppend(&out, ",std_", std::string(StrategyName(s)));
  out += ",chosen\n";
  for (int k = 1; k <= k_max; ++k) {
    DPSYN_ASSIGN_OR_RETURN(NoisePlan plan, PlanNoise(params, k));
    absl::StrAppend(&out, k);
    for (const auto& s : plan.candidate_std) {
      out += ",";
      if (s) out += absl::StrFormat("%.10g", *s);
    }
    absl::StrAppend(&out, ",", std::string(StrategyName(plan.strategy)), "\n");
  }
  return out;
}

std::string IndifCsv(const Dataset& dataset) {
  std::string out = "attr_a,attr_b,indif\n";
  for (const InDifScore& s : InDifMatrix(dataset)) {
    CsvRow row{dataset.domain().attr(s.a).name(), dataset.domain().attr(s.b).name(),
               absl::StrFormat("%.10g", s.value)};
    AppendCsvRow(row, out);
  }
  return out;
}

absl::StatusOr<std::string> InspectArchive(std::string_view archive_json) {
  DPSYN_ASSIGN_OR_RETURN(Json j, ParseJson(archive_json));
  if (!j.contains("marginals") || !j["marginals"].is_array()) {
    return absl::InvalidArgumentError("not a marginal archive");
  }
  std::string out;
  try {
    for (const auto& m : j["marginals"]) {
      std::vector<std::string> names;
      for (const auto& n : m.at("schema")) names.push_back(n.get<std::string>());
      const auto counts = m.at("counts").get<std::vector<double>>();
      double total = 0.0;
      for (double c : counts) total += c;
      const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      std::string name_list;
      for (size_t i = 0; i < names.size(); ++i) {
        absl::StrAppend(&name_list, i ? "," : "", names[i]);
      }
      const auto& sd = m.at("noise_std");
      absl::StrAppend(
          &out,
          absl::StrFormat("[%s] cells=%d total=%.6g min=%.6g max=%.6g noise_std=%s\n",
                          name_list, counts.size(), total,
                          counts.empty() ? 0.0 : *lo, counts.empty() ? 0.0 : *hi,
                          sd.is_null() ? std::string("none")
                                       : absl::StrFormat("%.6g", sd.get<double>())));
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad archive: ", e.what()));
  }
  return out;
}

}  // namespace dpsyn
