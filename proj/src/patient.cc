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

#include "retainex/patient.h"

#include <algorithm>

#include "retainex/error.h"

namespace retainex {

std::string_view GenderName(Gender gender) {
  return gender == Gender::kFemale ? "F" : "M";
}

Gender ParseGender(std::string_view name) {
  if (name == "F") return Gender::kFemale;
  if (name == "M") return Gender::kMale;
  throw ParseError("gender must be \"F\" or \"M\", got \"" + std::string(name) +
                   "\"");
}

std::vector<double> EncodedSequence::Dense(int t) const {
  std::vector<double> x(num_codes, 0.0);
  for (const int c : active.at(t)) x[c] = 1.0;
  return x;
}

EncodedSequence EncodePatient(const PatientRecord& record,
                              const CodeVocabulary& vocabulary) {
  EncodedSequence encoded;
  encoded.num_codes = vocabulary.size();
  encoded.active.reserve(record.visits.size());
  encoded.days.reserve(record.visits.size());
  for (std::size_t t = 0; t < record.visits.size(); ++t) {
    std::vector<int> codes = record.visits[t].codes;
    for (const int c : codes) {
      if (!vocabulary.Contains(c)) {
        throw DataError("patient " + record.id + " visit " + std::to_string(t) +
                        ": unknown code id " + std::to_string(c));
      }
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    encoded.active.push_back(std::move(codes));
    encoded.days.push_back(record.visits[t].day);
  }
  return encoded;
}

std::vector<std::vector<int>> DecodeVisits(const EncodedSequence& encoded) {
  std::vector<std::vector<int>> visits;
  for (int t = 0; t < encoded.length(); ++t) {
    const std::vector<double> x = encoded.Dense(t);
    std::vector<int> codes;
    for (int c = 0; c < encoded.num_codes; ++c) {
      if (x[c] == 1.0) codes.push_back(c);
    }
    visits.push_back(std::move(codes));
  }
  return visits;
}

void ValidatePatient(const PatientRecord& record,
                     const CodeVocabulary& vocabulary, int min_visits) {
  const std::string where = "patient " + record.id + ": ";
  if (record.num_visits() < min_visits) {
    throw DataError(where + "has " + std::to_string(record.num_visits()) +
                    " visits, fewer than " + std::to_string(min_visits));
  }
  if (record.label != 0 && record.label != 1) {
    throw DataError(where + "label must be 0 or 1");
  }
  for (std::size_t t = 0; t < record.visits.size(); ++t) {
    const VisitRecord& visit = record.visits[t];
    if (visit.day < 0) throw DataError(where + "negative visit day");
    if (t > 0 && visit.day < record.visits[t - 1].day) {
      throw DataError(where + "visit days decrease at visit " +
                      std::to_string(t));
    }
    if (visit.codes.empty()) {
      throw DataError(where + "visit " + std::to_string(t) + " has no codes");
    }
    std::vector<int> sorted = visit.codes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError(where + "visit " + std::to_string(t) +
                      " repeats a code");
    }
    for (const int c : sorted) {
      if (!vocabulary.Contains(c)) {
        throw DataError(where + "unknown code id " + std::to_string(c));
      }
    }
  }
}

nlohmann::json PatientToJson(const PatientRecord& record) {
  nlohmann::json visits = nlohmann::json::array();
  for (const VisitRecord& v : record.visits) {
    visits.push_back({{"day", v.day}, {"codes", v.codes}});
  }
  return {{"id", record.id},         {"age", record.age},
          {"gender", GenderName(record.gender)},
          {"label", record.label},   {"group", record.group},
          {"visits", std::move(visits)}};
}

PatientRecord PatientFromJson(const nlohmann::json& object) {
  try {
    PatientRecord record;
    record.id = object.at("id").get<std::string>();
    record.age = object.at("age").get<int>();
    record.gender = ParseGender(object.at("gender").get<std::string>());
    record.label = object.at("label").get<int>();
    record.group = object.at("group").get<std::string>();
    for (const nlohmann::json& v : object.at("visits")) {
      record.visits.push_back(
          {v.at("day").get<int>(), v.at("codes").get<std::vector<int>>()});
    }
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

}  // namespace retainex
