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

#ifndef RETAINEX_SERVICE_H_
#define RETAINEX_SERVICE_H_

#include <array>
#include <cstdint>
#include <deque>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "retainex/interaction.h"
#include "retainex/interpretation.h"
#include "retainex/model.h"
#include "retainex/patient.h"
#include "retainex/projection.h"

namespace retainex {

// Service configuration file (JSON object). Keys:
//   host                   listen address ("127.0.0.1")
//   port                   listen port (8080)
//   dataset                dataset path (JSONL with sidecars)
//   checkpoint             checkpoint path
//   max_projection_points  t-SNE size cap (5000)
//   max_snapshots          retained retrain previews (16)
//   projection             ProjectionConfig object for /overview
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string dataset;
  std::string checkpoint;
  int max_projection_points = 5000;
  int max_snapshots = 16;
  ProjectionConfig projection;

  nlohmann::json ToJson() const;
  // Unknown keys raise ParseError.
  static ServiceConfig FromJson(const nlohmann::json& object);
};

struct ApiError {
  int status = 500;
  std::string code;  // machine-readable
  std::string message;

  nlohmann::json ToJson() const;
};

// 400 for validation failures (argument, parse, data, edit, unsupported), 404
// for unknown ids, 409 for commit conflicts, 500 for numeric/training
// failures and anything unexpected.
ApiError ToApiError(const std::exception& error);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Crossing-number test. Points exactly on an edge may fall either side.
bool PointInPolygon(double x, double y,
                    const std::vector<std::array<double, 2>>& polygon);

// Request-level logic of the workbench API, callable without HTTP. Reads share
// the published model; only a commit replaces it, under an exclusive lock.
class WorkbenchService {
 public:
  WorkbenchService(Dataset dataset, Model model, ServiceConfig config);

  // Routes one request. `query` holds decoded query parameters. Never throws;
  // failures become ApiError bodies.
  ApiResponse Handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query,
                     const std::string& body);

  nlohmann::json Health() const;
  nlohmann::json Overview();
  nlohmann::json Select(const nlohmann::json& filter);
  nlohmann::json Summary(const std::vector<std::string>& ids);
  nlohmann::json Patient(const std::string& id);
  nlohmann::json WhatIf(const std::string& id, const nlohmann::json& script);
  nlohmann::json RetrainPreview(const std::string& id, const nlohmann::json& request);
  nlohmann::json RetrainCommit(const std::string& id, const nlohmann::json& request);
  nlohmann::json Aggregates();

  std::uint64_t model_version() const;
  Model published_model() const;
  const Dataset& dataset() const { return dataset_; }

 private:
  // Derived per-patient outputs of one published model version.
  struct Derived {
    std::uint64_t version = 0;
    std::shared_ptr<const Model> model;
    std::vector<double> predictions;
    std::vector<PatientEmbedding> embeddings;  // empty for the GRU baseline
    std::map<std::string, Embedding2D> projections;
  };
  struct Snapshot {
    std::string patient_id;
    std::uint64_t base_version = 0;
    std::shared_ptr<const Model> model;
    RetrainReport report;
  };

  int IndexOf(const std::string& id) const;
  std::shared_ptr<Derived> Current();
  const Embedding2D& Projection(Derived& derived);
  std::uint64_t Publish(std::shared_ptr<const Model> model,
                        std::uint64_t expected_version);
  std::pair<std::shared_ptr<const Model>, std::uint64_t> Published() const;

  Dataset dataset_;
  std::vector<EncodedSequence> encoded_;
  std::map<std::string, int> index_;
  ServiceConfig config_;

  mutable std::shared_mutex model_mutex_;
  std::shared_ptr<const Model> model_;
  std::uint64_t version_ = 1;

  std::mutex derived_mutex_;
  std::shared_ptr<Derived> derived_;

  std::mutex snapshot_mutex_;
  std::map<std::string, Snapshot> snapshots_;
  std::deque<std::string> snapshot_order_;
  std::uint64_t next_snapshot_ = 1;
};

// Blocks serving HTTP until the process is stopped. Throws IoError when the
// socket cannot be bound.
void RunHttpServer(WorkbenchService& service, const std::string& host, int port);

}  // namespace retainex

#endif  // RETAINEX_SERVICE_H_
