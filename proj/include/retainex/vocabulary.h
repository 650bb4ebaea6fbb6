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

#ifndef RETAINEX_VOCABULARY_H_
#define RETAINEX_VOCABULARY_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace retainex {

enum class CodeKind { kDiagnosis = 0, kTreatment = 1, kPrescription = 2 };

inline constexpr std::array<CodeKind, 3> kAllCodeKinds = {
    CodeKind::kDiagnosis, CodeKind::kTreatment, CodeKind::kPrescription};

std::string_view CodeKindName(CodeKind kind);
CodeKind ParseCodeKind(std::string_view name);

struct CodeInfo {
  int id = 0;
  std::string label;
  CodeKind kind = CodeKind::kDiagnosis;

  friend bool operator==(const CodeInfo&, const CodeInfo&) = default;
};

struct VocabularySizing {
  int diagnosis = 268;
  int treatment = 500;
  int prescription = 632;
};

// Dense code ids 0..C-1. Built vocabularies lay out diagnosis codes first,
// then treatment, then prescription.
class CodeVocabulary {
 public:
  CodeVocabulary() = default;
  // Validates dense ids in order and unique labels (ArgumentError otherwise).
  explicit CodeVocabulary(std::vector<CodeInfo> codes);

  int size() const { return static_cast<int>(codes_.size()); }
  const CodeInfo& code(int id) const;
  const std::vector<CodeInfo>& codes() const { return codes_; }
  bool Contains(int id) const { return id >= 0 && id < size(); }
  CodeKind kind(int id) const { return code(id).kind; }
  int CountOfKind(CodeKind kind) const;
  std::vector<int> IdsOfKind(CodeKind kind) const;
  std::optional<int> FindLabel(std::string_view label) const;

  // FNV-1a over ids, labels and kinds; identifies a vocabulary in checkpoints.
  std::uint64_t Fingerprint() const;

  nlohmann::json ToJson() const;
  static CodeVocabulary FromJson(const nlohmann::json& array);

  friend bool operator==(const CodeVocabulary& a, const CodeVocabulary& b) {
    return a.codes_ == b.codes_;
  }

 private:
  std::vector<CodeInfo> codes_;
  std::unordered_map<std::string, int> by_label_;
};

// Synthesizes labels DX0000.., TX0000.., RX0000.. for each block. Every count
// must be at least 1.
CodeVocabulary BuildVocabulary(const VocabularySizing& sizing = {});

}  // namespace retainex

#endif  // RETAINEX_VOCABULARY_H_
