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

#include "retainex/trainer.h"

#include <chrono>
#include <cmath>

#include "retainex/batching.h"
#include "retainex/error.h"
#include "retainex/metrics.h"

namespace retainex {

nlohmann::json TrainingHistory::ToJson(bool include_timing) const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const EpochRecord& e : epochs) {
    nlohmann::json row = {{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"validation_auc", e.validation_auc}};
    if (include_timing) row["seconds"] = e.seconds;
    epochs_json.push_back(std::move(row));
  }
  return {{"epochs", std::move(epochs_json)},
          {"best_epoch", best_epoch},
          {"best_validation_auc", best_validation_auc}};
}

TrainingHistory TrainingHistory::FromJson(const nlohmann::json& object) {
  TrainingHistory history;
  try {
    for (const nlohmann::json& row : object.at("epochs")) {
      history.epochs.push_back({row.at("epoch").get<int>(),
                                row.at("train_loss").get<double>(),
                                row.at("validation_auc").get<double>(),
                                row.value("seconds", 0.0)});
    }
    history.best_epoch = object.at("best_epoch").get<int>();
    history.best_validation_auc = object.at("best_validation_auc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("training history: ") + e.what());
  }
  return history;
}

std::vector<EncodedSequence> EncodeAll(const Dataset& dataset) {
  std::vector<EncodedSequence> encoded;
  encoded.reserve(dataset.patients.size());
  for (const PatientRecord& p : dataset.patients) {
    encoded.push_back(EncodePatient(p, dataset.vocabulary));
  }
  return encoded;
}

std::vector<int> Labels(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.patients.size());
  for (const PatientRecord& p : dataset.patients) labels.push_back(p.label);
  return labels;
}

std::vector<double> Predict(const Model& model,
                            const std::vector<EncodedSequence>& inputs) {
  std::vector<double> out;
  out.reserve(inputs.size());
  for (const EncodedSequence& x : inputs) out.push_back(Forward(model, x).prediction);
  return out;
}

std::uint64_t EpochShuffleSeed(std::uint64_t seed, int epoch) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch);
}

TrainResult Train(const Dataset& train, const Dataset& validation,
                  const Hyperparams& hyperparams,
                  const EpochCallback& on_epoch) {
  if (train.patients.empty() || validation.patients.empty()) {
    throw ArgumentError("training and validation sets must be non-empty");
  }
  if (!(hyperparams.learning_rate > 0.0)) {
    throw ArgumentError("learning rate must be positive");
  }
  const std::vector<EncodedSequence> train_inputs = EncodeAll(train);
  const std::vector<EncodedSequence> validation_inputs = EncodeAll(validation);
  const std::vector<int> validation_labels = Labels(validation);

  Model model = Model::Initialize(hyperparams, train.vocabulary.size());
  TrainResult result{model, {}};
  const AdamOptions adam{hyperparams.learning_rate};

  for (int epoch = 1; epoch <= hyperparams.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Batch> batches =
        MakeBatches(train, EpochShuffleSeed(hyperparams.seed, epoch));
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::vector<const EncodedSequence*> inputs;
      std::vector<int> labels;
      for (const int i : batches[b].patient_indices) {
        inputs.push_back(&train_inputs[i]);
        labels.push_back(train.patients[i].label);
      }
      const double loss = BatchLoss(model, inputs, labels, true);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(b));
      }
      AdamStep(model.params(), adam);
      loss_sum += loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = batches.empty() ? 0.0 : loss_sum / batches.size();
    record.validation_auc =
        Auc(Predict(model, validation_inputs), validation_labels);
    record.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    result.history.epochs.push_back(record);
    if (epoch == 1 || record.validation_auc > result.history.best_validation_auc) {
      result.history.best_epoch = epoch;
      result.history.best_validation_auc = record.validation_auc;
      result.model = model;
    }
    if (on_epoch) on_epoch(record);
  }
  if (hyperparams.epochs == 0) result.model = model;
  return result;
}

}  // namespace retainex
