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

#include "retainex/experiment.h"

#include <cstdio>
#include <sstream>

#include "retainex/dataset_io.h"
#include "retainex/error.h"
#include "retainex/metrics.h"

namespace retainex {

const VariantReport& EvalReport::row(Variant variant) const {
  for (const VariantReport& r : rows) {
    if (r.variant == variant) return r;
  }
  throw NotFoundError("no report row for variant " +
                      std::string(VariantName(variant)));
}

nlohmann::json EvalReport::ToJson(bool include_timing) const {
  nlohmann::json out_rows = nlohmann::json::array();
  for (const VariantReport& r : rows) {
    nlohmann::json row = {{"variant", VariantName(r.variant)},
                          {"auc", r.auc},
                          {"ap", r.average_precision},
                          {"best_epoch", r.best_epoch},
                          {"validation_auc", r.validation_auc},
                          {"f1_threshold", r.f1_threshold},
                          {"f1", r.f1}};
    if (include_timing) row["seconds_per_epoch"] = r.seconds_per_epoch;
    out_rows.push_back(std::move(row));
  }
  return {{"rows", std::move(out_rows)},
          {"dataset_fingerprint", dataset_fingerprint},
          {"seed", seed}};
}

std::string EvalReport::ToText() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %8s %8s %10s %6s\n", "Model", "AUC",
                "AP", "time(s)", "best");
  out << line;
  for (const VariantReport& r : rows) {
    std::snprintf(line, sizeof(line), "%-18s %8.4f %8.4f %10.2f %6d\n",
                  std::string(VariantName(r.variant)).c_str(), r.auc,
                  r.average_precision, r.seconds_per_epoch, r.best_epoch);
    out << line;
  }
  return out.str();
}

std::string EvalReport::ToCsv() const {
  std::ostringstream out;
  out << "variant,auc,ap,seconds_per_epoch,best_epoch,validation_auc,"
         "f1_threshold,f1\n";
  for (const VariantReport& r : rows) {
    out << VariantName(r.variant) << ',' << r.auc << ',' << r.average_precision
        << ',' << r.seconds_per_epoch << ',' << r.best_epoch << ','
        << r.validation_auc << ',' << r.f1_threshold << ',' << r.f1 << '\n';
  }
  return out.str();
}

std::string DatasetFingerprint(const Dataset& dataset) {
  std::uint64_t hash = 0xcbf29ce484222325ULL ^ dataset.vocabulary.Fingerprint();
  for (const unsigned char b : SerializePatients(dataset)) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

VariantReport EvaluateModel(const Model& model, const Dataset& test) {
  const std::vector<double> scores = Predict(model, EncodeAll(test));
  const std::vector<int> labels = Labels(test);
  VariantReport report;
  report.variant = model.variant();
  report.auc = Auc(scores, labels);
  report.average_precision = AveragePrecision(scores, labels);
  const F1Threshold f1 = BestF1Threshold(scores, labels);
  report.f1_threshold = f1.threshold;
  report.f1 = f1.f1;
  return report;
}

EvalReport RunExperiment(const Dataset& dataset, const ExperimentConfig& config,
                         const EpochCallback& on_epoch) {
  if (config.variants.empty()) throw ArgumentError("no variants to evaluate");
  const DatasetSplit split =
      SplitDataset(dataset, config.ratios, config.split_seed);
  EvalReport report;
  report.dataset_fingerprint = DatasetFingerprint(dataset);
  report.seed = config.hyperparams.seed;
  for (const Variant variant : config.variants) {
    Hyperparams h = config.hyperparams;
    h.variant = variant;
    const TrainResult trained = Train(split.train, split.validation, h, on_epoch);
    VariantReport row = EvaluateModel(trained.model, split.test);
    row.best_epoch = trained.history.best_epoch;
    row.validation_auc = trained.history.best_validation_auc;
    double seconds = 0.0;
    for (const EpochRecord& e : trained.history.epochs) seconds += e.seconds;
    row.seconds_per_epoch =
        trained.history.epochs.empty() ? 0.0 : seconds / trained.history.epochs.size();
    report.rows.push_back(row);
  }
  return report;
}

Hyperparams GridSearch(const Dataset& train, const Dataset& validation,
                       Hyperparams base, const std::vector<int>& hidden_sizes,
                       const std::vector<double>& learning_rates,
                       std::vector<GridPoint>* points) {
  if (hidden_sizes.empty() || learning_rates.empty()) {
    throw ArgumentError("grid search needs at least one value per axis");
  }
  Hyperparams best = base;
  double best_auc = -1.0;
  for (const int hidden : hidden_sizes) {
    for (const double lr : learning_rates) {
      Hyperparams h = base;
      h.hidden = hidden;
      h.learning_rate = lr;
      const TrainResult trained = Train(train, validation, h);
      const double auc = trained.history.best_validation_auc;
      if (points != nullptr) points->push_back({hidden, lr, auc});
      if (auc > best_auc) {
        best_auc = auc;
        best = h;
      }
    }
  }
  return best;
}

}  // namespace retainex
