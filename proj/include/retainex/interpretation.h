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

#ifndef RETAINEX_INTERPRETATION_H_
#define RETAINEX_INTERPRETATION_H_

#include <optional>
#include <vector>

#include "json.hpp"
#include "retainex/model.h"
#include "retainex/patient.h"
#include "retainex/vocabulary.h"

namespace retainex {

struct Contribution {
  int visit = 0;
  int code = 0;
  double score = 0.0;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

// Per-code contribution scores of one patient. Entries are ordered by visit,
// then by ascending code id, and exist only where the code is active.
struct ContributionMatrix {
  std::vector<Contribution> entries;
  std::vector<double> visit_sums;  // s_t, summed in entry order

  int num_visits() const { return static_cast<int>(visit_sums.size()); }
  // Sum of the visit sums.
  double Total() const;
  // Throws NotFoundError when (visit, code) is not an active pair.
  double at(int visit, int code) const;
  // Omits labels when `vocabulary` is null.
  nlohmann::json ToJson(const CodeVocabulary* vocabulary = nullptr) const;

  friend bool operator==(const ContributionMatrix&,
                         const ContributionMatrix&) = default;
};

// s_{t,c} = alpha_t * (w_out . (W_emb_b[:, c] * beta_t)). Throws
// UnsupportedError for the GRU baseline.
ContributionMatrix CodeContributions(const Model& model, const ForwardTrace& trace);

// s_t per visit.
std::vector<double> VisitContributions(const ContributionMatrix& matrix);

struct PatientEmbedding {
  std::vector<double> scores;  // S, length C
  std::vector<int> counts;     // visits containing each code
};

// Throws ArgumentError if an entry names a code outside [0, num_codes).
PatientEmbedding EmbedPatient(const ContributionMatrix& matrix, int num_codes);

struct CohortAggregate {
  int num_patients = 0;
  std::vector<double> total;                // S_total
  std::vector<long long> counts;            // C_total
  std::vector<double> per_patient;          // S1 = S_total / N
  std::vector<std::optional<double>> per_occurrence;  // S2, empty at count 0

  // {"num_patients", "labels", "s_total", "counts", "s1", "s2"}; undefined S2
  // entries serialize as null.
  nlohmann::json ToJson(const CodeVocabulary& vocabulary) const;
};

// Throws ArgumentError on an empty list or inconsistent lengths.
CohortAggregate AggregateCohort(const std::vector<PatientEmbedding>& embeddings);

inline constexpr int kMaxTemporalCodes = 9;

struct TemporalSeries {
  int code = 0;
  // Indexed by offset k from the final visit (k = 0 is the last visit).
  std::vector<std::optional<double>> mean;
  std::vector<std::optional<double>> stddev;  // population form
  std::vector<int> support;
};

struct TemporalSummary {
  int num_offsets = 0;  // max T over the patients
  std::vector<TemporalSeries> series;

  nlohmann::json ToJson() const;
};

// Aligns every patient to its final visit. Support at (code, offset) counts
// patients whose visit at that offset contains the code. Throws ArgumentError
// for more than kMaxTemporalCodes codes.
TemporalSummary SummarizeTemporal(const std::vector<ContributionMatrix>& matrices,
                                  const std::vector<int>& codes);

// Entry t is the prediction from visits 0..t alone, each computed by an
// independent forward pass on the truncated sequence.
std::vector<double> PrefixRiskCurve(const Model& model,
                                    const EncodedSequence& encoded);

struct RankedCode {
  int code = 0;
  double score = 0.0;

  friend bool operator==(const RankedCode&, const RankedCode&) = default;
};

// Descending by score with ties broken by lower id. With `group_by_kind` the
// top k of each code kind are returned, kinds in vocabulary order. Undefined
// scores are skipped. Throws ArgumentError for k < 1 or a size mismatch.
std::vector<RankedCode> TopContributors(
    const std::vector<std::optional<double>>& scores, int k, bool group_by_kind,
    const CodeVocabulary& vocabulary);
std::vector<RankedCode> TopContributors(const std::vector<double>& scores, int k,
                                        bool group_by_kind,
                                        const CodeVocabulary& vocabulary);

}  // namespace retainex

#endif  // RETAINEX_INTERPRETATION_H_
