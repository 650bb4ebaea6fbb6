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

#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "retainex/batching.h"
#include "retainex/checkpoint.h"
#include "retainex/cohort_generator.h"
#include "retainex/dataset_io.h"
#include "retainex/error.h"
#include "retainex/experiment.h"
#include "retainex/interpretation.h"
#include "retainex/metrics.h"
#include "retainex/projection.h"
#include "retainex/service.h"
#include "retainex/trainer.h"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"

namespace retainex {
namespace {

using Json = nlohmann::json;

std::string HistoryPath(const std::string& checkpoint_path) {
  return checkpoint_path + ".history.json";
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

// Text goes to `path`, or to stdout for "-" or empty.
void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    WriteTextFile(path, text);
  }
}

bool IsValidationError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kArgument:
    case ErrorCode::kParse:
    case ErrorCode::kData:
    case ErrorCode::kEdit:
    case ErrorCode::kUnsupported:
    case ErrorCode::kNotFound:
    case ErrorCode::kConflict:
      return true;
    default:
      return false;
  }
}

// Options shared by the commands that train.
struct TrainingFlags {
  std::string hyperparams_file;
  std::string variant;
  int hidden = 0;
  double learning_rate = 0.0;
  int epochs = 0;
  bool linear_beta = false;

  void Register(CLI::App* command) {
    command->add_option("--hyperparams", hyperparams_file,
                        "Hyperparams JSON file (flags below override it)");
    command->add_option("--hidden", hidden, "Hidden size m");
    command->add_option("--learning-rate", learning_rate, "Adam step size");
    command->add_option("--epochs", epochs, "Training epochs");
    command->add_flag("--linear-beta", linear_beta, "Disable tanh on beta");
  }

  Hyperparams Resolve(std::uint64_t seed) const {
    Hyperparams h;
    if (!hyperparams_file.empty()) h = Hyperparams::FromJson(ReadJsonFile(hyperparams_file));
    if (!variant.empty()) h.variant = ParseVariant(variant);
    if (hidden != 0) h.hidden = hidden;
    if (learning_rate != 0.0) h.learning_rate = learning_rate;
    if (epochs != 0) h.epochs = epochs;
    if (linear_beta) h.beta_tanh = false;
    h.seed = seed;
    if (h.hidden < 1) throw ArgumentError("hidden size must be positive");
    if (!(h.learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (h.epochs < 1) throw ArgumentError("epochs must be positive");
    return h;
  }
};

EpochCallback LogEpochs(const std::string& what) {
  return [what](const EpochRecord& r) {
    spdlog::info("{} epoch {}: loss {:.5f} val auc {:.4f} ({:.1f}s)", what, r.epoch,
                 r.train_loss, r.validation_auc, r.seconds);
  };
}

int Generate(const std::string& config_path, const std::string& out,
             int groups, const std::uint64_t* seed) {
  GeneratorConfig config;
  if (!config_path.empty()) config = GeneratorConfig::FromJson(ReadJsonFile(config_path));
  if (groups > 0) config.n_case_groups = groups;
  if (seed != nullptr) config.seed = *seed;
  const Dataset dataset = GenerateCohort(config);
  WriteDataset(dataset, out);
  spdlog::info("wrote {} patients ({} case groups) to {}", dataset.size(),
               config.n_case_groups, out);
  return kExitOk;
}

int TrainCommand(const std::string& dataset_path, const std::string& out,
                 const TrainingFlags& flags, std::uint64_t seed) {
  const Dataset dataset = ReadDataset(dataset_path);
  const Hyperparams h = flags.Resolve(seed);
  const DatasetSplit split = SplitDataset(dataset, SplitRatios{}, seed);
  spdlog::info("training {} (m={}, lr={}, epochs={}) on {} patients",
               VariantName(h.variant), h.hidden, h.learning_rate, h.epochs,
               split.train.size());
  TrainResult result =
      Train(split.train, split.validation, h, LogEpochs(std::string(VariantName(h.variant))));
  const Checkpoint checkpoint{std::move(result.model), h,
                              dataset.vocabulary.Fingerprint(), result.history};
  SaveCheckpoint(checkpoint, out);
  WriteTextFile(HistoryPath(out), result.history.ToJson(true).dump(1) + "\n");
  spdlog::info("best epoch {} (val auc {:.4f}); checkpoint {}", result.history.best_epoch,
               result.history.best_validation_auc, out);
  return kExitOk;
}

std::string FormatReport(const EvalReport& report, const std::string& format) {
  if (format == "json") return report.ToJson().dump(1) + "\n";
  if (format == "csv") return report.ToCsv();
  if (format == "text") return report.ToText();
  throw ArgumentError("unknown format '" + format + "' (text, json, csv)");
}

int Evaluate(const std::string& dataset_path, const std::vector<std::string>& checkpoints,
             const std::string& variants, const TrainingFlags& flags,
             const std::string& format, const std::string& out, std::uint64_t seed) {
  if (checkpoints.empty() == variants.empty()) {
    throw ArgumentError("pass either --checkpoint or --variants");
  }
  const Dataset dataset = ReadDataset(dataset_path);
  EvalReport report;
  if (!variants.empty()) {
    ExperimentConfig config;
    config.variants.clear();
    std::stringstream in(variants);
    std::string name;
    while (std::getline(in, name, ',')) {
      if (!name.empty()) config.variants.push_back(ParseVariant(name));
    }
    config.hyperparams = flags.Resolve(seed);
    config.split_seed = seed;
    report = RunExperiment(dataset, config, LogEpochs("train"));
  } else {
    const DatasetSplit split = SplitDataset(dataset, SplitRatios{}, seed);
    report.dataset_fingerprint = DatasetFingerprint(dataset);
    report.seed = seed;
    for (const std::string& path : checkpoints) {
      const Checkpoint checkpoint = LoadCheckpoint(path, &dataset.vocabulary);
      VariantReport row = EvaluateModel(checkpoint.model, split.test);
      row.validation_auc = Auc(Predict(checkpoint.model, EncodeAll(split.validation)),
                               Labels(split.validation));
      row.best_epoch = checkpoint.history.best_epoch;
      // Timings live in the sidecar, never in the checkpoint itself.
      if (std::filesystem::exists(HistoryPath(path))) {
        const TrainingHistory timed =
            TrainingHistory::FromJson(ReadJsonFile(HistoryPath(path)));
        double total = 0.0;
        for (const EpochRecord& r : timed.epochs) total += r.seconds;
        if (!timed.epochs.empty()) row.seconds_per_epoch = total / timed.epochs.size();
      }
      report.rows.push_back(row);
    }
  }
  Emit(out, FormatReport(report, format));
  return kExitOk;
}

int ProjectCommand(const std::string& dataset_path, const std::string& checkpoint_path,
                   ProjectionConfig config, int max_points, const std::string& out) {
  const Dataset dataset = ReadDataset(dataset_path);
  const Checkpoint checkpoint = LoadCheckpoint(checkpoint_path, &dataset.vocabulary);
  if (config.method == ProjectionMethod::kTsne && dataset.size() > max_points) {
    throw ArgumentError("t-SNE limited to " + std::to_string(max_points) +
                        " patients; dataset has " + std::to_string(dataset.size()));
  }
  const int c = checkpoint.model.num_codes();
  Eigen::MatrixXd vectors(dataset.size(), c);
  Json ids = Json::array();
  for (int i = 0; i < dataset.size(); ++i) {
    const PatientRecord& p = dataset.patients[i];
    const ForwardTrace trace =
        Forward(checkpoint.model, EncodePatient(p, dataset.vocabulary));
    const PatientEmbedding e = EmbedPatient(CodeContributions(checkpoint.model, trace), c);
    for (int k = 0; k < c; ++k) vectors(i, k) = e.scores[k];
    ids.push_back(p.id);
  }
  Json result = Project(vectors, config).ToJson();
  result["ids"] = std::move(ids);
  Emit(out, result.dump() + "\n");
  return kExitOk;
}

int Serve(const std::string& config_path, const std::string& host, int port,
          const std::uint64_t* seed) {
  ServiceConfig config = ServiceConfig::FromJson(ReadJsonFile(config_path));
  if (!host.empty()) config.host = host;
  if (port >= 0) config.port = port;
  if (seed != nullptr) config.projection.seed = *seed;
  if (config.dataset.empty() || config.checkpoint.empty()) {
    throw ArgumentError("service config needs dataset and checkpoint paths");
  }
  Dataset dataset = ReadDataset(config.dataset);
  Checkpoint checkpoint = LoadCheckpoint(config.checkpoint, &dataset.vocabulary);
  WorkbenchService service(std::move(dataset), std::move(checkpoint.model), config);
  spdlog::info("serving {} patients on http://{}:{}", service.dataset().size(),
               config.host, config.port);
  RunHttpServer(service, config.host, config.port);
  return kExitOk;
}

}  // namespace

int RunCli(int argc, char** argv) {
  if (spdlog::get("retainex") == nullptr) {
    spdlog::set_default_logger(spdlog::stderr_color_st("retainex"));
  }
  CLI::App app{"Interpretable visit-attention risk models on synthetic EHR cohorts"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  const auto add_seed = [&seed](CLI::App* command) {
    return command->add_option("--seed", seed, "Random seed");
  };

  std::string config_path, out, dataset_path, checkpoint_path, format = "text",
                                                                   variants, host;
  int groups = 0, port = -1, max_points = 5000;
  std::vector<std::string> checkpoints;
  TrainingFlags flags;
  ProjectionConfig projection;
  std::string method = "tsne";
  double perplexity = 0.0;

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic cohort");
  generate->add_option("--config", config_path, "GeneratorConfig JSON file");
  generate->add_option("--out", out, "Dataset path")->required();
  generate->add_option("--groups", groups, "Override the number of case groups");
  CLI::Option* generate_seed = add_seed(generate);

  CLI::App* train = app.add_subcommand("train", "Train one model and save a checkpoint");
  train->add_option("--dataset", dataset_path, "Dataset path")->required();
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--variant", flags.variant,
                    "retainex, retainex-no-time, retain or gru");
  flags.Register(train);
  add_seed(train);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Test-set AUC/AP table");
  evaluate->add_option("--dataset", dataset_path, "Dataset path")->required();
  evaluate->add_option("--checkpoint", checkpoints, "Checkpoint(s) to score");
  evaluate->add_option("--variants", variants,
                       "Comma-separated variants to train and score");
  evaluate->add_option("--format", format, "text, json or csv");
  evaluate->add_option("--out", out, "Output path (stdout by default)");
  flags.Register(evaluate);
  add_seed(evaluate);

  CLI::App* project = app.add_subcommand("project", "2-D projection of patients");
  project->add_option("--dataset", dataset_path, "Dataset path")->required();
  project->add_option("--checkpoint", checkpoint_path, "Checkpoint path")->required();
  project->add_option("--method", method, "tsne or pca");
  project->add_option("--perplexity", perplexity, "t-SNE perplexity");
  project->add_option("--iterations", projection.iterations, "t-SNE iterations");
  project->add_option("--max-points", max_points, "t-SNE size cap");
  project->add_option("--out", out, "Output path (stdout by default)");
  add_seed(project);

  CLI::App* serve = app.add_subcommand("serve", "Run the workbench HTTP API");
  serve->add_option("--config", config_path, "ServiceConfig JSON file")->required();
  serve->add_option("--host", host, "Override the listen address");
  serve->add_option("--port", port, "Override the listen port");
  CLI::Option* serve_seed = add_seed(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (generate->parsed()) {
      return Generate(config_path, out, groups,
                      generate_seed->count() > 0 ? &seed : nullptr);
    }
    if (train->parsed()) return TrainCommand(dataset_path, out, flags, seed);
    if (evaluate->parsed()) {
      return Evaluate(dataset_path, checkpoints, variants, flags, format, out, seed);
    }
    if (project->parsed()) {
      projection.method = ParseProjectionMethod(method);
      if (perplexity != 0.0) projection.perplexity = perplexity;
      projection.seed = seed;
      return ProjectCommand(dataset_path, checkpoint_path, projection, max_points, out);
    }
    return Serve(config_path, host, port, serve_seed->count() > 0 ? &seed : nullptr);
  } catch (const Error& e) {
    spdlog::error("{}: {}", ErrorCodeName(e.code()), e.what());
    return IsValidationError(e.code()) ? kExitUsageError : kExitRuntimeError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntimeError;
  }
}

}  // namespace retainex
