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

#include "retainex/dataset_io.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "retainex/error.h"

namespace retainex {
namespace {

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw IoError("failed writing " + path);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string VocabularyPath(const std::string& dataset_path) {
  return dataset_path + ".vocab.json";
}

std::string ProvenancePath(const std::string& dataset_path) {
  return dataset_path + ".meta.json";
}

std::string SerializePatients(const Dataset& dataset) {
  std::string out;
  for (const PatientRecord& p : dataset.patients) {
    out += PatientToJson(p).dump();
    out += '\n';
  }
  return out;
}

void WriteVocabulary(const CodeVocabulary& vocabulary,
                     const std::string& path) {
  WriteFile(path, vocabulary.ToJson().dump(1) + "\n");
}

CodeVocabulary ReadVocabulary(const std::string& path) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return CodeVocabulary::FromJson(parsed);
}

void WriteDataset(const Dataset& dataset, const std::string& path) {
  WriteFile(path, SerializePatients(dataset));
  WriteVocabulary(dataset.vocabulary, VocabularyPath(path));
  if (!dataset.provenance.is_null()) {
    WriteFile(ProvenancePath(path), dataset.provenance.dump(1) + "\n");
  } else {
    std::filesystem::remove(ProvenancePath(path));
  }
}

Dataset ReadDataset(const std::string& path) {
  Dataset dataset;
  dataset.vocabulary = std::filesystem::exists(VocabularyPath(path))
                           ? ReadVocabulary(VocabularyPath(path))
                           : BuildVocabulary();
  if (std::filesystem::exists(ProvenancePath(path))) {
    try {
      dataset.provenance = nlohmann::json::parse(ReadFile(ProvenancePath(path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ProvenancePath(path) + ": " + e.what());
    }
  }

  std::istringstream lines(ReadFile(path));
  std::string line;
  int line_number = 0;
  while (std::getline(lines, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + " line " + std::to_string(line_number);
    PatientRecord record;
    try {
      record = PatientFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      ValidatePatient(record, dataset.vocabulary);
    } catch (const DataError& e) {
      throw ParseError(where + ": " + e.what());
    }
    dataset.patients.push_back(std::move(record));
  }
  return dataset;
}

}  // namespace retainex
