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

#ifndef RETAINEX_TRAINER_H_
#define RETAINEX_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "retainex/model.h"
#include "retainex/patient.h"

namespace retainex {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_auc = 0.0;
  double seconds = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0: no epoch improved on the initialization
  double best_validation_auc = 0.0;

  // `include_timing` false drops wall-clock seconds, leaving only fields
  // that are reproducible from the seed.
  nlohmann::json ToJson(bool include_timing = true) const;
  static TrainingHistory FromJson(const nlohmann::json& object);
};

struct TrainResult {
  Model model;
  TrainingHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

std::vector<EncodedSequence> EncodeAll(const Dataset& dataset);
std::vector<int> Labels(const Dataset& dataset);
std::vector<double> Predict(const Model& model,
                            const std::vector<EncodedSequence>& inputs);

// Seed used to shuffle the batches of one epoch.
std::uint64_t EpochShuffleSeed(std::uint64_t seed, int epoch);

// Adam over case-group batches: each patient runs forward and backward
// unpadded, gradients of the batch-mean loss are accumulated, then one
// optimizer step. After every epoch the validation AUC is measured and the
// parameters of the best epoch are returned. Throws TrainingError naming the
// epoch and batch if the loss becomes non-finite.
TrainResult Train(const Dataset& train, const Dataset& validation,
                  const Hyperparams& hyperparams,
                  const EpochCallback& on_epoch = nullptr);

}  // namespace retainex

#endif  // RETAINEX_TRAINER_H_
