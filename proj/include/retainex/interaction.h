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

#ifndef RETAINEX_INTERACTION_H_
#define RETAINEX_INTERACTION_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "retainex/interpretation.h"
#include "retainex/model.h"
#include "retainex/patient.h"
#include "retainex/vocabulary.h"

namespace retainex {

enum class EditKind { kAddCode, kRemoveCode, kMoveVisit, kAddVisit, kRemoveVisit };

std::string_view EditKindName(EditKind kind);  // "add_code", ...

// One edit. Fields unused by a kind are ignored.
struct EditOp {
  EditKind kind = EditKind::kAddCode;
  int visit = 0;           // add_code, remove_code, move_visit, remove_visit
  int code = 0;            // add_code, remove_code
  int day = 0;             // move_visit, add_visit
  std::vector<int> codes;  // add_visit

  static EditOp AddCode(int visit, int code);
  static EditOp RemoveCode(int visit, int code);
  static EditOp MoveVisit(int visit, int day);
  static EditOp AddVisit(int day, std::vector<int> codes);
  static EditOp RemoveVisit(int visit);

  nlohmann::json ToJson() const;
  static EditOp FromJson(const nlohmann::json& object);
};

struct EditScript {
  std::vector<EditOp> ops;

  nlohmann::json ToJson() const;
  // Accepts an array of ops or {"ops": [...]}. Throws ParseError.
  static EditScript FromJson(const nlohmann::json& value);
};

// Applies the ops in order. Visit indices refer to the record as left by the
// preceding ops; visits are stably re-sorted by day after every op. Throws
// EditError naming the op index and kind on any violation (unknown visit or
// code, duplicate add, absent remove, empty visit, negative day, or a record
// left without visits).
PatientRecord ApplyEdits(const PatientRecord& record, const EditScript& script,
                         const CodeVocabulary& vocabulary);

// Model outputs for one record.
struct PatientView {
  double score = 0.0;
  double prediction = 0.5;
  std::vector<double> risk_curve;
  // Absent for the GRU baseline.
  std::optional<ContributionMatrix> contributions;

  nlohmann::json ToJson(const CodeVocabulary* vocabulary = nullptr) const;
  friend bool operator==(const PatientView&, const PatientView&) = default;
};

PatientView InspectPatient(const Model& model, const EncodedSequence& encoded);

struct WhatIfResult {
  PatientView before;
  PatientView after;
  PatientRecord edited;

  nlohmann::json ToJson(const CodeVocabulary* vocabulary = nullptr) const;
};

// Recomputes everything on the edited record; the model is not touched.
WhatIfResult WhatIf(const Model& model, const PatientRecord& record,
                    const EditScript& script, const CodeVocabulary& vocabulary);

enum class SteerDirection { kIncrease, kDecrease };

struct SteerSelection {
  int visit = 0;
  int code = 0;
  SteerDirection direction = SteerDirection::kIncrease;
};

inline constexpr int kDefaultRetrainIterations = 20;
inline constexpr double kDefaultRetrainLearningRate = 0.01;
inline constexpr int kMaxRetrainIterations = 100;

struct RetrainRequest {
  std::vector<SteerSelection> selections;
  int iterations = kDefaultRetrainIterations;
  double learning_rate = kDefaultRetrainLearningRate;

  nlohmann::json ToJson() const;
  // Throws ParseError on schema violations.
  static RetrainRequest FromJson(const nlohmann::json& object);
};

struct RetrainReport {
  // Loss at the start of each iteration.
  std::vector<double> losses;
  ContributionMatrix before;
  ContributionMatrix after;
  double prediction_before = 0.5;
  double prediction_after = 0.5;
  double seconds = 0.0;

  nlohmann::json ToJson(const CodeVocabulary* vocabulary = nullptr) const;
};

struct RetrainResult {
  Model model;
  RetrainReport report;
};

// Gradient descent on exp(-s_pos + s_neg) over the value embedding only,
// returning an updated copy of the model. Only the columns of selected codes
// move, so attention weights of every record are unchanged. Throws
// ArgumentError for an invalid request, UnsupportedError for variants that
// share one embedding (or have none to attend with), and NumericError naming
// the iteration on a non-finite loss.
RetrainResult Retrain(const Model& model, const EncodedSequence& encoded,
                      const RetrainRequest& request);

}  // namespace retainex

#endif  // RETAINEX_INTERACTION_H_
