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

#ifndef RETAINEX_PATIENT_H_
#define RETAINEX_PATIENT_H_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "retainex/vocabulary.h"

namespace retainex {

enum class Gender { kFemale, kMale };

std::string_view GenderName(Gender gender);  // "F" / "M"
Gender ParseGender(std::string_view name);

// One encounter: an integer day index and the set of codes recorded.
struct VisitRecord {
  int day = 0;
  std::vector<int> codes;

  friend bool operator==(const VisitRecord&, const VisitRecord&) = default;
};

struct PatientRecord {
  std::string id;
  int age = 0;
  Gender gender = Gender::kFemale;
  std::vector<VisitRecord> visits;
  int label = 0;
  // Links one case with its matched controls.
  std::string group;

  int num_visits() const { return static_cast<int>(visits.size()); }

  friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

// Minimum visit count of a cohort member.
inline constexpr int kMinCohortVisits = 5;

struct Dataset {
  CodeVocabulary vocabulary;
  std::vector<PatientRecord> patients;
  // Echo of the generator configuration (or null for external data).
  nlohmann::json provenance;

  int size() const { return static_cast<int>(patients.size()); }
};

// Binary visit vectors x_1..x_T over {0,1}^C, held sparsely as the sorted set
// of active code ids per visit, plus the visit days.
struct EncodedSequence {
  int num_codes = 0;
  std::vector<std::vector<int>> active;
  std::vector<int> days;

  int length() const { return static_cast<int>(active.size()); }
  // Dense x_t.
  std::vector<double> Dense(int t) const;

  friend bool operator==(const EncodedSequence&, const EncodedSequence&) =
      default;
};

// Throws DataError naming the first code outside the vocabulary. Repeated
// codes within a visit collapse to a single active entry.
EncodedSequence EncodePatient(const PatientRecord& record,
                              const CodeVocabulary& vocabulary);

// Visit code sets recovered from the binary vectors.
std::vector<std::vector<int>> DecodeVisits(const EncodedSequence& encoded);

// Structural checks of a cohort record: at least `min_visits` visits,
// non-decreasing days, non-empty visits with known, non-repeated codes, and a
// 0/1 label. Throws DataError describing the first violation.
void ValidatePatient(const PatientRecord& record,
                     const CodeVocabulary& vocabulary,
                     int min_visits = kMinCohortVisits);

nlohmann::json PatientToJson(const PatientRecord& record);
// Throws ParseError on schema violations.
PatientRecord PatientFromJson(const nlohmann::json& object);

}  // namespace retainex

#endif  // RETAINEX_PATIENT_H_
