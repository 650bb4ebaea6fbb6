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

#ifndef RETAINEX_CHECKPOINT_H_
#define RETAINEX_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "retainex/model.h"
#include "retainex/trainer.h"
#include "retainex/vocabulary.h"

namespace retainex {

// Container layout: one line of JSON (the header) terminated by '\n', then the
// parameter tensors as consecutive little-endian IEEE-754 doubles in header
// order. The header records format and version, hyperparameters, the code
// count, the vocabulary fingerprint, each tensor's name/shape/offset, the
// payload size, and the training history without wall-clock timings, so the
// same training run always produces the same bytes.
inline constexpr const char* kCheckpointFormat = "retainex-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  Hyperparams hyperparams;
  std::uint64_t vocabulary_fingerprint = 0;
  TrainingHistory history;
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Throws ParseError on a malformed, truncated or wrong-version container.
Checkpoint DeserializeCheckpoint(const std::string& bytes);

// Throws IoError when the file cannot be written or read.
void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
// With `vocabulary`, also throws DataError on a fingerprint mismatch.
Checkpoint LoadCheckpoint(const std::string& path,
                          const CodeVocabulary* vocabulary = nullptr);

}  // namespace retainex

#endif  // RETAINEX_CHECKPOINT_H_
