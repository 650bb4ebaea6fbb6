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

#include "retainex/vocabulary.h"

#include <cstdio>

#include "retainex/error.h"

namespace retainex {

std::string_view CodeKindName(CodeKind kind) {
  switch (kind) {
    case CodeKind::kDiagnosis:
      return "diagnosis";
    case CodeKind::kTreatment:
      return "treatment";
    case CodeKind::kPrescription:
      return "prescription";
  }
  return "diagnosis";
}

CodeKind ParseCodeKind(std::string_view name) {
  for (const CodeKind kind : kAllCodeKinds) {
    if (CodeKindName(kind) == name) return kind;
  }
  throw ParseError("unknown code kind '" + std::string(name) + "'");
}

CodeVocabulary::CodeVocabulary(std::vector<CodeInfo> codes)
    : codes_(std::move(codes)) {
  for (int i = 0; i < size(); ++i) {
    if (codes_[i].id != i) {
      throw ArgumentError("vocabulary ids must be dense and ordered; entry " +
                          std::to_string(i) + " has id " +
                          std::to_string(codes_[i].id));
    }
    if (!by_label_.emplace(codes_[i].label, i).second) {
      throw ArgumentError("duplicate code label '" + codes_[i].label + "'");
    }
  }
}

const CodeInfo& CodeVocabulary::code(int id) const {
  if (!Contains(id)) {
    throw DataError("unknown code id " + std::to_string(id));
  }
  return codes_[id];
}

int CodeVocabulary::CountOfKind(CodeKind kind) const {
  int count = 0;
  for (const CodeInfo& c : codes_) count += c.kind == kind ? 1 : 0;
  return count;
}

std::vector<int> CodeVocabulary::IdsOfKind(CodeKind kind) const {
  std::vector<int> ids;
  for (const CodeInfo& c : codes_) {
    if (c.kind == kind) ids.push_back(c.id);
  }
  return ids;
}

std::optional<int> CodeVocabulary::FindLabel(std::string_view label) const {
  const auto it = by_label_.find(std::string(label));
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t CodeVocabulary::Fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  const auto mix = [&hash](std::string_view bytes) {
    for (const unsigned char b : bytes) {
      hash ^= b;
      hash *= 0x100000001b3ULL;
    }
    hash ^= 0xff;
    hash *= 0x100000001b3ULL;
  };
  for (const CodeInfo& c : codes_) {
    mix(std::to_string(c.id));
    mix(c.label);
    mix(CodeKindName(c.kind));
  }
  return hash;
}

nlohmann::json CodeVocabulary::ToJson() const {
  nlohmann::json array = nlohmann::json::array();
  for (const CodeInfo& c : codes_) {
    array.push_back(
        {{"id", c.id}, {"label", c.label}, {"kind", CodeKindName(c.kind)}});
  }
  return array;
}

CodeVocabulary CodeVocabulary::FromJson(const nlohmann::json& array) {
  if (!array.is_array()) throw ParseError("vocabulary must be a JSON array");
  std::vector<CodeInfo> codes;
  codes.reserve(array.size());
  for (const nlohmann::json& item : array) {
    try {
      codes.push_back({item.at("id").get<int>(),
                       item.at("label").get<std::string>(),
                       ParseCodeKind(item.at("kind").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("vocabulary entry: ") + e.what());
    }
  }
  return CodeVocabulary(std::move(codes));
}

CodeVocabulary BuildVocabulary(const VocabularySizing& sizing) {
  if (sizing.diagnosis < 1 || sizing.treatment < 1 || sizing.prescription < 1) {
    throw ArgumentError("every code kind needs at least one code");
  }
  std::vector<CodeInfo> codes;
  const auto add_block = [&codes](const char* prefix, int count, CodeKind kind) {
    for (int i = 0; i < count; ++i) {
      char label[32];
      std::snprintf(label, sizeof(label), "%s%04d", prefix, i);
      codes.push_back({static_cast<int>(codes.size()), label, kind});
    }
  };
  add_block("DX", sizing.diagnosis, CodeKind::kDiagnosis);
  add_block("TX", sizing.treatment, CodeKind::kTreatment);
  add_block("RX", sizing.prescription, CodeKind::kPrescription);
  return CodeVocabulary(std::move(codes));
}

}  // namespace retainex
