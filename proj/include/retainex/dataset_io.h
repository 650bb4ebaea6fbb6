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

#ifndef RETAINEX_DATASET_IO_H_
#define RETAINEX_DATASET_IO_H_

#include <string>

#include "retainex/patient.h"

namespace retainex {

// On-disk layout of a dataset rooted at `path`:
//
//   <path>             UTF-8 line-delimited JSON, one patient per line:
//                      {"id","age","gender":"F"|"M","label","group",
//                       "visits":[{"day":int,"codes":[int,...]},...]}
//   <path>.vocab.json  JSON array of {"id","label","kind"}
//   <path>.meta.json   generator configuration echo (optional)
//
// A missing vocabulary sidecar falls back to the default 268/500/632 layout.
std::string VocabularyPath(const std::string& dataset_path);
std::string ProvenancePath(const std::string& dataset_path);

void WriteDataset(const Dataset& dataset, const std::string& path);

// Throws ParseError naming the offending line for malformed or truncated
// lines, and IoError when the file cannot be opened. Blank files produce an
// empty dataset.
Dataset ReadDataset(const std::string& path);

void WriteVocabulary(const CodeVocabulary& vocabulary, const std::string& path);
CodeVocabulary ReadVocabulary(const std::string& path);

// Serialized patient lines, exactly as WriteDataset emits them.
std::string SerializePatients(const Dataset& dataset);

}  // namespace retainex

#endif  // RETAINEX_DATASET_IO_H_
