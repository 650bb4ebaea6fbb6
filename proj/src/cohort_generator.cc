/*
 * Copyright 2026 The RetainEX Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "retainex/cohort_generator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "retainex/error.h"
#include "retainex/rng.h"

namespace retainex {
namespace {

// Popularity-weighted sampler over the non-risk codes of one kind.
struct KindSampler {
  std::vector<int> ids;
  std::vector<double> cumulative;

  int Draw(SeededRng& rng) const { return ids[rng.Categorical(cumulative)]; }
};

KindSampler MakeSampler(std::vector<int> ids, SeededRng& rng) {
  rng.Shuffle(ids);
  KindSampler sampler;
  double total = 0.0;
  for (std::size_t rank = 0; rank < ids.size(); ++rank) {
    total += 1.0 / static_cast<double>(rank + 1);
    sampler.cumulative.push_back(total);
  }
  sampler.ids = std::move(ids);
  return sampler;
}

int DrawVisitCount(const GeneratorConfig& config, SeededRng& rng) {
  const double p = 1.0 / (config.mean_visits - config.min_visits + 1.0);
  while (true) {
    const int count = config.min_visits + rng.Geometric(p);
    if (count <= config.max_visits) return count;
  }
}

// Intervals between consecutive visits, with the episode layout applied.
std::vector<int> DrawVisitDays(const GeneratorConfig& config, int num_visits,
                               int anchor, bool is_case, SeededRng& rng) {
  const int budget = config.window_days - 1;
  std::vector<int> gaps(num_visits, 0);  // gaps[t]: days between t-1 and t
  std::vector<bool> fixed(num_visits, false);
  const double mean_gap =
      0.7 * budget / static_cast<double>(std::max(1, num_visits - 1));
  for (int t = 1; t < num_visits; ++t) {
    gaps[t] = rng.Geometric(1.0 / (mean_gap + 1.0));
  }
  if (anchor >= 0) {
    for (int t = anchor + 1; t < num_visits; ++t) {
      gaps[t] = rng.UniformInt(0, config.recent_gap_days);
      fixed[t] = true;
    }
    if (!is_case) {
      gaps[anchor + 1] =
          rng.UniformInt(config.decoy_gap_min_days, config.decoy_gap_max_days);
    }
  }

  long fixed_sum = 0, free_sum = 0;
  for (int t = 1; t < num_visits; ++t) (fixed[t] ? fixed_sum : free_sum) += gaps[t];
  if (fixed_sum + free_sum > budget) {
    const double factor =
        static_cast<double>(budget - fixed_sum) / static_cast<double>(free_sum);
    for (int t = 1; t < num_visits; ++t) {
      if (!fixed[t]) gaps[t] = static_cast<int>(std::floor(gaps[t] * factor));
    }
  }
  int total = 0;
  for (int t = 1; t < num_visits; ++t) total += gaps[t];

  std::vector<int> days(num_visits);
  days[0] = rng.UniformInt(0, budget - total);
  for (int t = 1; t < num_visits; ++t) days[t] = days[t - 1] + gaps[t];
  return days;
}

}  // namespace

nlohmann::json GeneratorConfig::ToJson() const {
  nlohmann::json risk = nlohmann::json::array();
  for (const RiskCode& r : risk_codes) {
    risk.push_back({{"id", r.id}, {"weight", r.weight}});
  }
  return {
      {"n_case_groups", n_case_groups},
      {"controls_per_case", controls_per_case},
      {"vocabulary",
       {{"diagnosis", vocabulary.diagnosis},
        {"treatment", vocabulary.treatment},
        {"prescription", vocabulary.prescription}}},
      {"min_visits", min_visits},
      {"max_visits", max_visits},
      {"mean_visits", mean_visits},
      {"window_days", window_days},
      {"min_age", min_age},
      {"max_age", max_age},
      {"age_band_years", age_band_years},
      {"visit_count_band", visit_count_band},
      {"risk_codes", risk},
      {"num_default_risk_codes", num_default_risk_codes},
      {"background_risk_rate", background_risk_rate},
      {"case_background_lift", case_background_lift},
      {"episode_intensity", episode_intensity},
      {"episode_width", episode_width},
      {"case_intensity_lift", case_intensity_lift},
      {"case_episode_probability", case_episode_probability},
      {"control_episode_probability", control_episode_probability},
      {"max_episode_offset", max_episode_offset},
      {"recent_gap_days", recent_gap_days},
      {"decoy_gap_min_days", decoy_gap_min_days},
      {"decoy_gap_max_days", decoy_gap_max_days},
      {"seed", seed},
  };
}

GeneratorConfig GeneratorConfig::FromJson(const nlohmann::json& object) {
  if (!object.is_object()) throw ParseError("generator config must be an object");
  GeneratorConfig config;
  const nlohmann::json defaults = config.ToJson();
  for (const auto& [key, value] : object.items()) {
    if (!defaults.contains(key)) {
      throw ParseError("unknown generator config key '" + key + "'");
    }
  }
  const auto read = [&object](const char* key, auto& field) {
    if (object.contains(key)) {
      field = object.at(key).get<std::remove_reference_t<decltype(field)>>();
    }
  };
  try {
    read("n_case_groups", config.n_case_groups);
    read("controls_per_case", config.controls_per_case);
    if (object.contains("vocabulary")) {
      const nlohmann::json& v = object.at("vocabulary");
      config.vocabulary.diagnosis = v.value("diagnosis", config.vocabulary.diagnosis);
      config.vocabulary.treatment = v.value("treatment", config.vocabulary.treatment);
      config.vocabulary.prescription =
          v.value("prescription", config.vocabulary.prescription);
    }
    read("min_visits", config.min_visits);
    read("max_visits", config.max_visits);
    read("mean_visits", config.mean_visits);
    read("window_days", config.window_days);
    read("min_age", config.min_age);
    read("max_age", config.max_age);
    read("age_band_years", config.age_band_years);
    read("visit_count_band", config.visit_count_band);
    if (object.contains("risk_codes")) {
      for (const nlohmann::json& r : object.at("risk_codes")) {
        config.risk_codes.push_back(
            {r.at("id").get<int>(), r.value("weight", 1.0)});
      }
    }
    read("num_default_risk_codes", config.num_default_risk_codes);
    read("background_risk_rate", config.background_risk_rate);
    read("case_background_lift", config.case_background_lift);
    read("episode_intensity", config.episode_intensity);
    read("episode_width", config.episode_width);
    read("case_intensity_lift", config.case_intensity_lift);
    read("case_episode_probability", config.case_episode_probability);
    read("control_episode_probability", config.control_episode_probability);
    read("max_episode_offset", config.max_episode_offset);
    read("recent_gap_days", config.recent_gap_days);
    read("decoy_gap_min_days", config.decoy_gap_min_days);
    read("decoy_gap_max_days", config.decoy_gap_max_days);
    read("seed", config.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator config: ") + e.what());
  }
  return config;
}

void ValidateGeneratorConfig(const GeneratorConfig& c) {
  const auto require = [](bool ok, const char* message) {
    if (!ok) throw ArgumentError(std::string("generator config: ") + message);
  };
  require(c.n_case_groups >= 1, "n_case_groups must be positive");
  require(c.controls_per_case >= 1, "controls_per_case must be positive");
  require(c.min_visits >= kMinCohortVisits, "min_visits must be at least 5");
  require(c.max_visits >= c.min_visits, "max_visits below min_visits");
  require(c.mean_visits > c.min_visits && c.mean_visits < c.max_visits,
          "mean_visits must lie strictly between min_visits and max_visits");
  require(c.min_age >= 0 && c.max_age >= c.min_age, "invalid age range");
  require(c.age_band_years >= 1, "age_band_years must be positive");
  require(c.visit_count_band >= 0.0, "visit_count_band must be non-negative");
  require(c.episode_width > 0.0, "episode_width must be positive");
  require(c.max_episode_offset >= 1, "max_episode_offset must be positive");
  require(c.background_risk_rate >= 0.0 && c.episode_intensity >= 0.0 &&
              c.case_intensity_lift >= 0.0 && c.case_background_lift >= 0.0,
          "risk rates must be non-negative");
  require(c.case_episode_probability >= 0.0 &&
              c.case_episode_probability <= 1.0 &&
              c.control_episode_probability >= 0.0 &&
              c.control_episode_probability <= 1.0,
          "episode probabilities must lie in [0, 1]");
  require(c.recent_gap_days >= 0, "recent_gap_days must be non-negative");
  require(c.decoy_gap_min_days > c.recent_gap_days &&
              c.decoy_gap_max_days >= c.decoy_gap_min_days,
          "decoy gap range must exceed recent_gap_days");
  require(c.window_days - 1 >= c.decoy_gap_max_days +
                                   c.max_episode_offset * c.recent_gap_days,
          "window_days too short for the episode layout");
  require(c.vocabulary.diagnosis >= 2 && c.vocabulary.treatment >= 2 &&
              c.vocabulary.prescription >= 2,
          "each code kind needs at least two codes");
}

std::vector<RiskCode> ResolveRiskCodes(const GeneratorConfig& config,
                                       const CodeVocabulary& vocabulary) {
  if (!config.risk_codes.empty()) {
    std::set<int> seen;
    for (const RiskCode& r : config.risk_codes) {
      if (!vocabulary.Contains(r.id) || !seen.insert(r.id).second ||
          !(r.weight >= 0.0)) {
        throw ArgumentError("invalid risk code entry " + std::to_string(r.id));
      }
    }
    return config.risk_codes;
  }
  // Default set: round-robin across kinds, leaving each kind at least one
  // background code.
  SeededRng rng(config.seed ^ 0x5249534bULL);
  std::vector<std::vector<int>> pools;
  for (const CodeKind kind : kAllCodeKinds) {
    std::vector<int> ids = vocabulary.IdsOfKind(kind);
    rng.Shuffle(ids);
    pools.push_back(std::move(ids));
  }
  std::vector<RiskCode> chosen;
  std::vector<std::size_t> taken(pools.size(), 0);
  for (int i = 0; static_cast<int>(chosen.size()) < config.num_default_risk_codes;
       ++i) {
    const std::size_t k = i % pools.size();
    bool any_left = false;
    for (std::size_t j = 0; j < pools.size(); ++j) {
      any_left |= taken[j] + 1 < pools[j].size();
    }
    if (!any_left) break;
    if (taken[k] + 1 >= pools[k].size()) continue;
    chosen.push_back({pools[k][taken[k]++], 0.5 + rng.Uniform()});
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const RiskCode& a, const RiskCode& b) { return a.id < b.id; });
  return chosen;
}

Dataset GenerateCohort(const GeneratorConfig& config) {
  ValidateGeneratorConfig(config);
  Dataset dataset;
  dataset.vocabulary = BuildVocabulary(config.vocabulary);
  const std::vector<RiskCode> risk = ResolveRiskCodes(config, dataset.vocabulary);
  std::set<int> risk_ids;
  for (const RiskCode& r : risk) risk_ids.insert(r.id);

  SeededRng rng(config.seed);
  std::vector<KindSampler> samplers;
  for (const CodeKind kind : kAllCodeKinds) {
    std::vector<int> ids;
    for (const int id : dataset.vocabulary.IdsOfKind(kind)) {
      if (!risk_ids.contains(id)) ids.push_back(id);
    }
    samplers.push_back(MakeSampler(std::move(ids), rng));
  }
  const KindSampler& diagnoses = samplers[0];
  const KindSampler& treatments = samplers[1];
  const KindSampler& prescriptions = samplers[2];

  const auto make_patient = [&](const std::string& id, const std::string& group,
                                int label, Gender gender, int age,
                                int num_visits) {
    PatientRecord p;
    p.id = id;
    p.group = group;
    p.label = label;
    p.gender = gender;
    p.age = age;
    const bool is_case = label == 1;
    const bool episode = rng.Bernoulli(is_case ? config.case_episode_probability
                                               : config.control_episode_probability);
    const int anchor =
        episode ? std::max(0, num_visits - 1 -
                                  rng.UniformInt(1, config.max_episode_offset))
                : -1;
    const std::vector<int> days =
        DrawVisitDays(config, num_visits, anchor, is_case, rng);
    const double lift = is_case ? config.case_intensity_lift : 1.0;
    const double background =
        config.background_risk_rate * (is_case ? config.case_background_lift : 1.0);

    for (int t = 0; t < num_visits; ++t) {
      std::vector<int> codes;
      if (rng.Bernoulli(0.85)) codes.push_back(diagnoses.Draw(rng));
      if (rng.Bernoulli(0.25)) codes.push_back(diagnoses.Draw(rng));
      if (rng.Bernoulli(0.7)) codes.push_back(treatments.Draw(rng));
      if (rng.Bernoulli(0.4)) codes.push_back(treatments.Draw(rng));
      if (rng.Bernoulli(0.7)) codes.push_back(prescriptions.Draw(rng));
      if (rng.Bernoulli(0.5)) codes.push_back(prescriptions.Draw(rng));
      if (rng.Bernoulli(0.2)) codes.push_back(prescriptions.Draw(rng));

      const double episode_term =
          episode ? config.episode_intensity * lift *
                        std::exp(-std::abs(t - anchor) / config.episode_width)
                  : 0.0;
      for (const RiskCode& r : risk) {
        const double p_code =
            std::min(0.95, r.weight * (background + episode_term));
        if (rng.Bernoulli(p_code)) codes.push_back(r.id);
      }
      if (codes.empty()) codes.push_back(diagnoses.Draw(rng));
      std::sort(codes.begin(), codes.end());
      codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
      p.visits.push_back({days[t], std::move(codes)});
    }
    return p;
  };

  int next_patient = 0;
  const auto next_id = [&next_patient]() {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "P%06d", next_patient++);
    return std::string(buffer);
  };

  for (int g = 0; g < config.n_case_groups; ++g) {
    char group[32];
    std::snprintf(group, sizeof(group), "G%05d", g);
    const Gender gender = rng.Bernoulli(0.5) ? Gender::kMale : Gender::kFemale;
    const int case_age = rng.UniformInt(config.min_age, config.max_age);
    const int band = (case_age - config.min_age) / config.age_band_years;
    const int band_lo = config.min_age + band * config.age_band_years;
    const int band_hi =
        std::min(config.max_age, band_lo + config.age_band_years - 1);
    const int case_visits = DrawVisitCount(config, rng);
    const int width = std::max(
        1, static_cast<int>(std::lround(config.visit_count_band * case_visits)));

    dataset.patients.push_back(
        make_patient(next_id(), group, 1, gender, case_age, case_visits));
    for (int k = 0; k < config.controls_per_case; ++k) {
      const int age = rng.UniformInt(band_lo, band_hi);
      const int visits =
          std::clamp(case_visits + rng.UniformInt(-width, width),
                     config.min_visits, config.max_visits);
      dataset.patients.push_back(
          make_patient(next_id(), group, 0, gender, age, visits));
    }
  }

  nlohmann::json provenance = config.ToJson();
  provenance["resolved_risk_codes"] = nlohmann::json::array();
  for (const RiskCode& r : risk) {
    provenance["resolved_risk_codes"].push_back(
        {{"id", r.id}, {"weight", r.weight}});
  }
  dataset.provenance = std::move(provenance);
  return dataset;
}

}  // namespace retainex
