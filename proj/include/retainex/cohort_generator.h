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

#ifndef RETAINEX_COHORT_GENERATOR_H_
#define RETAINEX_COHORT_GENERATOR_H_

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "retainex/patient.h"
#include "retainex/vocabulary.h"

namespace retainex {

struct RiskCode {
  int id = 0;
  double weight = 1.0;
};

// Synthetic case/control cohort. Every group holds one case (label 1) and
// `controls_per_case` controls matched on gender, age band and visit-count
// band.
//
// Planted signal. Each patient draws a "risk episode" with probability
// case_episode_probability (cases) or control_episode_probability
// (controls). The episode is anchored at visit index a = max(0, T - 1 - K)
// with K uniform in {1, ..., max_episode_offset}, identically for both
// labels. A risk code r appears in visit t with probability
//
//   min(0.95, w_r * (background_risk_rate * b +
//                    episode_intensity * lift * exp(-|t - a| / width)))
//
// where width is episode_width, b is case_background_lift for cases and 1
// for controls, and lift is case_intensity_lift for cases and 1 for controls
// (the episode term is absent without an episode). With the default lifts of
// 1 the labels differ in episode frequency and in recency measured in days: a case episode is followed by visits at most
// `recent_gap_days` apart, so it ends within a few days of the final visit,
// while a control episode is followed by a quiet gap of
// [decoy_gap_min_days, decoy_gap_max_days] before the next visit. Code
// content and visit order carry the intensity signal only; the interval
// pattern is visible solely through time features.
struct GeneratorConfig {
  int n_case_groups = 100;
  int controls_per_case = 10;
  VocabularySizing vocabulary;

  int min_visits = kMinCohortVisits;
  int max_visits = 188;
  double mean_visits = 20.79;
  int window_days = 181;

  int min_age = 20;
  int max_age = 89;
  int age_band_years = 10;
  // Controls' visit counts lie within +-round(band * T_case) (at least 1).
  double visit_count_band = 0.2;

  // Empty selects `num_default_risk_codes` codes spread across the kinds.
  std::vector<RiskCode> risk_codes;
  int num_default_risk_codes = 18;
  double background_risk_rate = 0.01;
  double case_background_lift = 1.0;
  double episode_intensity = 0.35;
  double episode_width = 1.0;
  double case_intensity_lift = 1.0;
  double case_episode_probability = 0.9;
  double control_episode_probability = 0.3;
  int max_episode_offset = 30;
  int recent_gap_days = 2;
  int decoy_gap_min_days = 45;
  int decoy_gap_max_days = 90;

  std::uint64_t seed = 7;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys raise ParseError.
  static GeneratorConfig FromJson(const nlohmann::json& object);
};

// Throws ArgumentError for infeasible settings (e.g. mean outside
// [min, max] visits, window too short for the visit layout).
void ValidateGeneratorConfig(const GeneratorConfig& config);

// Risk codes actually used for a configuration (explicit or default).
std::vector<RiskCode> ResolveRiskCodes(const GeneratorConfig& config,
                                       const CodeVocabulary& vocabulary);

// Deterministic in the configuration (including its seed).
Dataset GenerateCohort(const GeneratorConfig& config);

}  // namespace retainex

#endif  // RETAINEX_COHORT_GENERATOR_H_
