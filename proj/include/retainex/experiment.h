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

#ifndef RETAINEX_EXPERIMENT_H_
#define RETAINEX_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "retainex/batching.h"
#include "retainex/model.h"
#include "retainex/trainer.h"

namespace retainex {

struct VariantReport {
  Variant variant = Variant::kRetainEx;
  double auc = 0.0;
  double average_precision = 0.0;
  double seconds_per_epoch = 0.0;
  int best_epoch = 0;
  double validation_auc = 0.0;
  double f1_threshold = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<VariantReport> rows;
  std::string dataset_fingerprint;
  std::uint64_t seed = 0;

  const VariantReport& row(Variant variant) const;
  nlohmann::json ToJson(bool include_timing = true) const;
  // Aligned columns: model, AUC, AP, time (s/epoch), best epoch.
  std::string ToText() const;
  std::string ToCsv() const;
};

struct ExperimentConfig {
  std::vector<Variant> variants = AllVariants();
  // Variant field ignored; every listed variant shares these settings.
  Hyperparams hyperparams;
  SplitRatios ratios;
  std::uint64_t split_seed = 1;
};

// Hex FNV-1a of the vocabulary and the serialized patients.
std::string DatasetFingerprint(const Dataset& dataset);

// Test-set AUC/AP (plus best-F1 threshold) of a trained model.
VariantReport EvaluateModel(const Model& model, const Dataset& test);

// Trains each variant on identical data and seed, evaluates on the test
// split. Rows follow config.variants order.
EvalReport RunExperiment(const Dataset& dataset, const ExperimentConfig& config,
                         const EpochCallback& on_epoch = nullptr);

struct GridPoint {
  int hidden = 0;
  double learning_rate = 0.0;
  double validation_auc = 0.0;
};

// Grid loop over hidden sizes and learning rates, selecting by validation
// AUC. Returns the winning hyperparameters; `points` receives every trial.
Hyperparams GridSearch(const Dataset& train, const Dataset& validation,
                       Hyperparams base, const std::vector<int>& hidden_sizes,
                       const std::vector<double>& learning_rates,
                       std::vector<GridPoint>* points = nullptr);

}  // namespace retainex

#endif  // RETAINEX_EXPERIMENT_H_
