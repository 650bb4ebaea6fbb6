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

#include "retainex/service.h"

#include <algorithm>
#include <regex>
#include <sstream>

#include "retainex/error.h"

namespace retainex {
namespace {

using Json = nlohmann::json;

std::pair<double, double> ReadRange(const Json& value, const char* name) {
  if (!value.is_array() || value.size() != 2) {
    throw ArgumentError(std::string(name) + " must be a [min, max] pair");
  }
  const double lo = value[0].get<double>();
  const double hi = value[1].get<double>();
  if (lo > hi) throw ArgumentError(std::string(name) + " range is inverted");
  return {lo, hi};
}

void RequireKnownKeys(const Json& object, std::initializer_list<const char*> keys,
                      const char* what) {
  if (!object.is_object()) throw ParseError(std::string(what) + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return key == k;
        }) == keys.end()) {
      throw ParseError(std::string("unknown ") + what + " key '" + key + "'");
    }
  }
}

Json ParseBody(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("request body: ") + e.what());
  }
}

std::vector<std::string> SplitIds(const std::string& text) {
  std::vector<std::string> ids;
  std::stringstream in(text);
  std::string id;
  while (std::getline(in, id, ',')) {
    if (!id.empty()) ids.push_back(id);
  }
  return ids;
}

}  // namespace

Json ServiceConfig::ToJson() const {
  return {{"host", host},
          {"port", port},
          {"dataset", dataset},
          {"checkpoint", checkpoint},
          {"max_projection_points", max_projection_points},
          {"max_snapshots", max_snapshots},
          {"projection", projection.ToJson()}};
}

ServiceConfig ServiceConfig::FromJson(const Json& object) {
  RequireKnownKeys(object,
                   {"host", "port", "dataset", "checkpoint", "max_projection_points",
                    "max_snapshots", "projection"},
                   "service config");
  ServiceConfig config;
  try {
    config.host = object.value("host", config.host);
    config.port = object.value("port", config.port);
    config.dataset = object.value("dataset", config.dataset);
    config.checkpoint = object.value("checkpoint", config.checkpoint);
    config.max_projection_points =
        object.value("max_projection_points", config.max_projection_points);
    config.max_snapshots = object.value("max_snapshots", config.max_snapshots);
    if (object.contains("projection")) {
      config.projection = ProjectionConfig::FromJson(object.at("projection"));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("service config: ") + e.what());
  }
  if (config.port < 0 || config.port > 65535) throw ArgumentError("port out of range");
  if (config.max_projection_points < 4) {
    throw ArgumentError("max_projection_points must be at least 4");
  }
  if (config.max_snapshots < 1) throw ArgumentError("max_snapshots must be positive");
  return config;
}

Json ApiError::ToJson() const {
  return {{"error", {{"status", status}, {"code", code}, {"message", message}}}};
}

ApiError ToApiError(const std::exception& error) {
  const auto* typed = dynamic_cast<const Error*>(&error);
  if (typed == nullptr) {
    if (dynamic_cast<const Json::exception*>(&error) != nullptr) {
      return {400, "parse_error", error.what()};
    }
    return {500, "internal", error.what()};
  }
  int status = 500;
  switch (typed->code()) {
    case ErrorCode::kArgument:
    case ErrorCode::kParse:
    case ErrorCode::kData:
    case ErrorCode::kEdit:
    case ErrorCode::kUnsupported:
      status = 400;
      break;
    case ErrorCode::kNotFound:
      status = 404;
      break;
    case ErrorCode::kConflict:
      status = 409;
      break;
    case ErrorCode::kNumeric:
    case ErrorCode::kTraining:
    case ErrorCode::kState:
    case ErrorCode::kIo:
      status = 500;
      break;
  }
  return {status, std::string(ErrorCodeName(typed->code())), typed->what()};
}

bool PointInPolygon(double x, double y,
                    const std::vector<std::array<double, 2>>& polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = polygon[i][0], yi = polygon[i][1];
    const double xj = polygon[j][0], yj = polygon[j][1];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

WorkbenchService::WorkbenchService(Dataset dataset, Model model,
                                   ServiceConfig config)
    : dataset_(std::move(dataset)),
      config_(std::move(config)),
      model_(std::make_shared<const Model>(std::move(model))) {
  if (model_->num_codes() != dataset_.vocabulary.size()) {
    throw DataError("model and dataset disagree on the code count");
  }
  for (int i = 0; i < dataset_.size(); ++i) {
    const PatientRecord& p = dataset_.patients[i];
    if (!index_.emplace(p.id, i).second) {
      throw DataError("duplicate patient id " + p.id);
    }
    encoded_.push_back(EncodePatient(p, dataset_.vocabulary));
  }
}

int WorkbenchService::IndexOf(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("unknown patient '" + id + "'");
  return it->second;
}

std::pair<std::shared_ptr<const Model>, std::uint64_t> WorkbenchService::Published()
    const {
  std::shared_lock lock(model_mutex_);
  return {model_, version_};
}

std::uint64_t WorkbenchService::model_version() const { return Published().second; }

Model WorkbenchService::published_model() const { return *Published().first; }

std::uint64_t WorkbenchService::Publish(std::shared_ptr<const Model> model,
                                        std::uint64_t expected_version) {
  std::unique_lock lock(model_mutex_);
  if (version_ != expected_version) {
    throw ConflictError("model changed since version " +
                        std::to_string(expected_version) + " (now " +
                        std::to_string(version_) + ")");
  }
  model_ = std::move(model);
  return ++version_;
}

std::shared_ptr<WorkbenchService::Derived> WorkbenchService::Current() {
  const auto [model, version] = Published();
  std::lock_guard lock(derived_mutex_);
  if (derived_ != nullptr && derived_->version == version) return derived_;
  auto derived = std::make_shared<Derived>();
  derived->version = version;
  derived->model = model;
  derived->predictions.reserve(encoded_.size());
  for (const EncodedSequence& x : encoded_) {
    const ForwardTrace trace = Forward(*model, x);
    derived->predictions.push_back(trace.prediction);
    if (model->is_attention_model()) {
      derived->embeddings.push_back(
          EmbedPatient(CodeContributions(*model, trace), model->num_codes()));
    }
  }
  derived_ = derived;
  return derived_;
}

const Embedding2D& WorkbenchService::Projection(Derived& derived) {
  if (derived.embeddings.empty()) {
    throw UnsupportedError("projection needs contribution vectors, which the " +
                           std::string(VariantName(derived.model->variant())) +
                           " variant does not produce");
  }
  const ProjectionConfig& config = config_.projection;
  const int n = static_cast<int>(derived.embeddings.size());
  if (config.method == ProjectionMethod::kTsne && n > config_.max_projection_points) {
    throw ArgumentError("t-SNE limited to " +
                        std::to_string(config_.max_projection_points) +
                        " patients; cohort has " + std::to_string(n));
  }
  std::lock_guard lock(derived_mutex_);
  const std::string key = config.ToJson().dump();
  const auto it = derived.projections.find(key);
  if (it != derived.projections.end()) return it->second;
  Eigen::MatrixXd vectors(n, derived.model->num_codes());
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < vectors.cols(); ++c) {
      vectors(i, c) = derived.embeddings[i].scores[c];
    }
  }
  return derived.projections.emplace(key, Project(vectors, config)).first->second;
}

Json WorkbenchService::Health() const {
  return {{"status", "ok"}, {"model_version", model_version()}};
}

Json WorkbenchService::Overview() {
  const std::shared_ptr<Derived> derived = Current();
  const Embedding2D& projection = Projection(*derived);
  Json patients = Json::array();
  for (int i = 0; i < dataset_.size(); ++i) {
    const PatientRecord& p = dataset_.patients[i];
    patients.push_back({{"id", p.id},
                        {"x", projection.points[i][0]},
                        {"y", projection.points[i][1]},
                        {"prediction", derived->predictions[i]},
                        {"age", p.age},
                        {"gender", GenderName(p.gender)},
                        {"label", p.label},
                        {"num_visits", p.num_visits()}});
  }
  return {{"model_version", derived->version},
          {"projection", projection.config.ToJson()},
          {"patients", std::move(patients)}};
}

Json WorkbenchService::Select(const Json& filter) {
  RequireKnownKeys(filter, {"polygon", "axes", "age", "gender", "risk", "codes"},
                   "selection filter");
  const std::shared_ptr<Derived> derived = Current();
  const int n = dataset_.size();
  std::vector<bool> keep(n, true);

  const auto code_score = [&](int i, int code) {
    if (derived->embeddings.empty()) {
      throw UnsupportedError("code contribution filters need an attention variant");
    }
    if (!dataset_.vocabulary.Contains(code)) {
      throw ArgumentError("unknown code " + std::to_string(code));
    }
    return derived->embeddings[i].scores[code];
  };

  if (filter.contains("polygon")) {
    std::vector<std::array<double, 2>> polygon;
    for (const Json& p : filter.at("polygon")) {
      if (!p.is_array() || p.size() != 2) {
        throw ArgumentError("polygon vertices must be [x, y] pairs");
      }
      polygon.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (polygon.size() < 3) throw ArgumentError("polygon needs at least 3 vertices");
    // Axis values default to the projection coordinates.
    Json axes = filter.value("axes", Json{{"x", "projection_x"}, {"y", "projection_y"}});
    const Embedding2D* projection = nullptr;
    const auto axis_value = [&](const Json& axis, int i) -> double {
      if (axis.is_object()) return code_score(i, axis.at("code").get<int>());
      const std::string name = axis.get<std::string>();
      if (name == "projection_x" || name == "projection_y") {
        if (projection == nullptr) projection = &Projection(*derived);
        return projection->points[i][name == "projection_x" ? 0 : 1];
      }
      if (name == "age") return dataset_.patients[i].age;
      if (name == "risk") return derived->predictions[i];
      throw ArgumentError("unknown axis '" + name + "'");
    };
    for (int i = 0; i < n; ++i) {
      keep[i] = keep[i] && PointInPolygon(axis_value(axes.at("x"), i),
                                          axis_value(axes.at("y"), i), polygon);
    }
  }
  if (filter.contains("age")) {
    const auto [lo, hi] = ReadRange(filter.at("age"), "age");
    for (int i = 0; i < n; ++i) {
      const int age = dataset_.patients[i].age;
      keep[i] = keep[i] && age >= lo && age <= hi;
    }
  }
  if (filter.contains("gender")) {
    const Gender gender = ParseGender(filter.at("gender").get<std::string>());
    for (int i = 0; i < n; ++i) keep[i] = keep[i] && dataset_.patients[i].gender == gender;
  }
  if (filter.contains("risk")) {
    const auto [lo, hi] = ReadRange(filter.at("risk"), "risk");
    for (int i = 0; i < n; ++i) {
      keep[i] = keep[i] && derived->predictions[i] >= lo && derived->predictions[i] <= hi;
    }
  }
  if (filter.contains("codes")) {
    for (const Json& range : filter.at("codes")) {
      const int code = range.at("code").get<int>();
      const auto [lo, hi] = ReadRange(range.at("range"), "code range");
      for (int i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        const double s = code_score(i, code);
        keep[i] = s >= lo && s <= hi;
      }
    }
  }

  Json ids = Json::array();
  int female = 0, male = 0, cases = 0;
  double prediction_sum = 0.0, age_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    const PatientRecord& p = dataset_.patients[i];
    ids.push_back(p.id);
    (p.gender == Gender::kFemale ? female : male) += 1;
    cases += p.label;
    prediction_sum += derived->predictions[i];
    age_sum += p.age;
  }
  const int count = static_cast<int>(ids.size());
  Json stats = {{"gender", {{"F", female}, {"M", male}}}, {"cases", cases}};
  stats["mean_prediction"] = count > 0 ? Json(prediction_sum / count) : Json();
  stats["mean_age"] = count > 0 ? Json(age_sum / count) : Json();
  return {{"ids", std::move(ids)}, {"count", count}, {"stats", std::move(stats)}};
}

Json WorkbenchService::Summary(const std::vector<std::string>& ids) {
  if (ids.empty()) throw ArgumentError("summary needs at least one patient id");
  const std::shared_ptr<Derived> derived = Current();
  const Model& model = *derived->model;
  std::vector<int> rows;
  for (const std::string& id : ids) rows.push_back(IndexOf(id));

  Json table = Json::array();
  std::vector<ContributionMatrix> matrices;
  std::vector<PatientEmbedding> embeddings;
  for (const int i : rows) {
    const PatientRecord& p = dataset_.patients[i];
    Json row = {{"id", p.id},
                {"age", p.age},
                {"gender", GenderName(p.gender)},
                {"label", p.label},
                {"num_visits", p.num_visits()},
                {"prediction", derived->predictions[i]}};
    if (model.is_attention_model()) {
      matrices.push_back(CodeContributions(model, Forward(model, encoded_[i])));
      row["visit_scores"] = matrices.back().visit_sums;
      embeddings.push_back(derived->embeddings[i]);
    } else {
      row["visit_scores"] = nullptr;
    }
    table.push_back(std::move(row));
  }
  Json out = {{"model_version", derived->version}, {"patients", std::move(table)}};
  if (!model.is_attention_model()) {
    out["top_contributors"] = nullptr;
    out["temporal"] = nullptr;
    return out;
  }
  const CohortAggregate aggregate = AggregateCohort(embeddings);
  const std::vector<RankedCode> top = TopContributors(
      aggregate.per_patient, 3, /*group_by_kind=*/true, dataset_.vocabulary);
  Json top_json = Json::array();
  std::vector<int> top_codes;
  for (const RankedCode& r : top) {
    const CodeInfo& info = dataset_.vocabulary.code(r.code);
    top_json.push_back({{"code", r.code},
                        {"label", info.label},
                        {"kind", CodeKindName(info.kind)},
                        {"score", r.score}});
    top_codes.push_back(r.code);
  }
  out["top_contributors"] = std::move(top_json);
  out["temporal"] = SummarizeTemporal(matrices, top_codes).ToJson();
  return out;
}

Json WorkbenchService::Patient(const std::string& id) {
  const int i = IndexOf(id);
  const auto [model, version] = Published();
  Json out = InspectPatient(*model, encoded_[i]).ToJson(&dataset_.vocabulary);
  out["record"] = PatientToJson(dataset_.patients[i]);
  out["model_version"] = version;
  return out;
}

Json WorkbenchService::WhatIf(const std::string& id, const Json& script) {
  const int i = IndexOf(id);
  const EditScript edits = EditScript::FromJson(script);
  const auto [model, version] = Published();
  Json out = retainex::WhatIf(*model, dataset_.patients[i], edits, dataset_.vocabulary)
                 .ToJson(&dataset_.vocabulary);
  out["model_version"] = version;
  return out;
}

Json WorkbenchService::RetrainPreview(const std::string& id, const Json& request) {
  const int i = IndexOf(id);
  const RetrainRequest parsed = RetrainRequest::FromJson(request);
  const auto [model, version] = Published();
  RetrainResult result = Retrain(*model, encoded_[i], parsed);

  std::lock_guard lock(snapshot_mutex_);
  const std::string snapshot_id = "snap-" + std::to_string(next_snapshot_++);
  Json out = {{"snapshot_id", snapshot_id},
              {"base_version", version},
              {"report", result.report.ToJson(&dataset_.vocabulary)}};
  snapshots_[snapshot_id] = {id, version,
                             std::make_shared<const Model>(std::move(result.model)),
                             std::move(result.report)};
  snapshot_order_.push_back(snapshot_id);
  while (static_cast<int>(snapshot_order_.size()) > config_.max_snapshots) {
    snapshots_.erase(snapshot_order_.front());
    snapshot_order_.pop_front();
  }
  return out;
}

Json WorkbenchService::RetrainCommit(const std::string& id, const Json& request) {
  const int i = IndexOf(id);
  if (request.contains("snapshot_id")) {
    const std::string snapshot_id = request.at("snapshot_id").get<std::string>();
    Snapshot snapshot;
    {
      std::lock_guard lock(snapshot_mutex_);
      const auto it = snapshots_.find(snapshot_id);
      if (it == snapshots_.end()) {
        throw NotFoundError("unknown or expired snapshot '" + snapshot_id + "'");
      }
      if (it->second.patient_id != id) {
        throw ArgumentError("snapshot " + snapshot_id + " belongs to patient " +
                            it->second.patient_id);
      }
      snapshot = it->second;
    }
    const std::uint64_t version = Publish(snapshot.model, snapshot.base_version);
    {
      std::lock_guard lock(snapshot_mutex_);
      snapshots_.erase(snapshot_id);
      snapshot_order_.erase(
          std::remove(snapshot_order_.begin(), snapshot_order_.end(), snapshot_id),
          snapshot_order_.end());
    }
    return {{"model_version", version},
            {"report", snapshot.report.ToJson(&dataset_.vocabulary)}};
  }
  const RetrainRequest parsed = RetrainRequest::FromJson(request);
  const auto [model, current] = Published();
  const std::uint64_t expected =
      request.contains("base_version") ? request.at("base_version").get<std::uint64_t>()
                                       : current;
  if (expected != current) {
    throw ConflictError("model changed since version " + std::to_string(expected) +
                        " (now " + std::to_string(current) + ")");
  }
  RetrainResult result = Retrain(*model, encoded_[i], parsed);
  const std::uint64_t version =
      Publish(std::make_shared<const Model>(std::move(result.model)), expected);
  return {{"model_version", version},
          {"report", result.report.ToJson(&dataset_.vocabulary)}};
}

Json WorkbenchService::Aggregates() {
  const std::shared_ptr<Derived> derived = Current();
  if (derived->embeddings.empty()) {
    throw UnsupportedError("aggregates need an attention variant");
  }
  const CohortAggregate aggregate = AggregateCohort(derived->embeddings);
  Json out = aggregate.ToJson(dataset_.vocabulary);
  const int c = dataset_.vocabulary.size();
  const auto ranking = [](const std::vector<RankedCode>& ranked) {
    Json ids = Json::array();
    for (const RankedCode& r : ranked) ids.push_back(r.code);
    return ids;
  };
  out["ranking_s1"] =
      ranking(TopContributors(aggregate.per_patient, c, false, dataset_.vocabulary));
  out["ranking_s2"] =
      ranking(TopContributors(aggregate.per_occurrence, c, false, dataset_.vocabulary));
  out["model_version"] = derived->version;
  return out;
}

ApiResponse WorkbenchService::Handle(const std::string& method,
                                     const std::string& path,
                                     const std::map<std::string, std::string>& query,
                                     const std::string& body) {
  static const std::regex kPatientRoute(R"(^/patients/([^/]+)(/whatif|/retrain/preview|/retrain/commit)?$)");
  try {
    const auto expect = [&](const char* wanted) {
      if (method != wanted) {
        throw ApiError{405, "method_not_allowed",
                       method + " not allowed on " + path};
      }
    };
    if (path == "/health") {
      expect("GET");
      return {200, Health()};
    }
    if (path == "/overview") {
      expect("GET");
      return {200, Overview()};
    }
    if (path == "/select") {
      expect("POST");
      return {200, Select(ParseBody(body))};
    }
    if (path == "/summary") {
      expect("GET");
      const auto it = query.find("ids");
      return {200, Summary(it == query.end() ? std::vector<std::string>{}
                                             : SplitIds(it->second))};
    }
    if (path == "/aggregates") {
      expect("GET");
      return {200, Aggregates()};
    }
    std::smatch match;
    if (std::regex_match(path, match, kPatientRoute)) {
      const std::string id = match[1];
      const std::string action = match[2];
      if (action.empty()) {
        expect("GET");
        return {200, Patient(id)};
      }
      expect("POST");
      const Json payload = ParseBody(body);
      if (action == "/whatif") return {200, WhatIf(id, payload)};
      if (action == "/retrain/preview") return {200, RetrainPreview(id, payload)};
      return {200, RetrainCommit(id, payload)};
    }
    const ApiError missing{404, "not_found", "no route for " + path};
    return {missing.status, missing.ToJson()};
  } catch (const ApiError& e) {
    return {e.status, e.ToJson()};
  } catch (const std::exception& e) {
    const ApiError error = ToApiError(e);
    return {error.status, error.ToJson()};
  }
}

}  // namespace retainex
