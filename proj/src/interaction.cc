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

#include "retainex/interaction.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <utility>

#include "retainex/error.h"

namespace retainex {
namespace {

constexpr std::pair<EditKind, const char*> kEditKindNames[] = {
    {EditKind::kAddCode, "add_code"},
    {EditKind::kRemoveCode, "remove_code"},
    {EditKind::kMoveVisit, "move_visit"},
    {EditKind::kAddVisit, "add_visit"},
    {EditKind::kRemoveVisit, "remove_visit"},
};

EditKind ParseEditKind(const std::string& name) {
  for (const auto& [kind, text] : kEditKindNames) {
    if (name == text) return kind;
  }
  throw ParseError("unknown edit op '" + name + "'");
}

std::string_view DirectionName(SteerDirection d) {
  return d == SteerDirection::kIncrease ? "increase" : "decrease";
}

}  // namespace

std::string_view EditKindName(EditKind kind) {
  for (const auto& [k, text] : kEditKindNames) {
    if (k == kind) return text;
  }
  return "unknown";
}

EditOp EditOp::AddCode(int visit, int code) {
  EditOp op;
  op.kind = EditKind::kAddCode;
  op.visit = visit;
  op.code = code;
  return op;
}

EditOp EditOp::RemoveCode(int visit, int code) {
  EditOp op = AddCode(visit, code);
  op.kind = EditKind::kRemoveCode;
  return op;
}

EditOp EditOp::MoveVisit(int visit, int day) {
  EditOp op;
  op.kind = EditKind::kMoveVisit;
  op.visit = visit;
  op.day = day;
  return op;
}

EditOp EditOp::AddVisit(int day, std::vector<int> codes) {
  EditOp op;
  op.kind = EditKind::kAddVisit;
  op.day = day;
  op.codes = std::move(codes);
  return op;
}

EditOp EditOp::RemoveVisit(int visit) {
  EditOp op;
  op.kind = EditKind::kRemoveVisit;
  op.visit = visit;
  return op;
}

nlohmann::json EditOp::ToJson() const {
  nlohmann::json out = {{"op", EditKindName(kind)}};
  switch (kind) {
    case EditKind::kAddCode:
    case EditKind::kRemoveCode:
      out["visit"] = visit;
      out["code"] = code;
      break;
    case EditKind::kMoveVisit:
      out["visit"] = visit;
      out["day"] = day;
      break;
    case EditKind::kAddVisit:
      out["day"] = day;
      out["codes"] = codes;
      break;
    case EditKind::kRemoveVisit:
      out["visit"] = visit;
      break;
  }
  return out;
}

EditOp EditOp::FromJson(const nlohmann::json& object) {
  try {
    EditOp op;
    op.kind = ParseEditKind(object.at("op").get<std::string>());
    switch (op.kind) {
      case EditKind::kAddCode:
      case EditKind::kRemoveCode:
        op.visit = object.at("visit").get<int>();
        op.code = object.at("code").get<int>();
        break;
      case EditKind::kMoveVisit:
        op.visit = object.at("visit").get<int>();
        op.day = object.at("day").get<int>();
        break;
      case EditKind::kAddVisit:
        op.day = object.at("day").get<int>();
        op.codes = object.at("codes").get<std::vector<int>>();
        break;
      case EditKind::kRemoveVisit:
        op.visit = object.at("visit").get<int>();
        break;
    }
    return op;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("edit op: ") + e.what());
  }
}

nlohmann::json EditScript::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const EditOp& op : ops) out.push_back(op.ToJson());
  return {{"ops", std::move(out)}};
}

EditScript EditScript::FromJson(const nlohmann::json& value) {
  const nlohmann::json* list = &value;
  if (value.is_object()) {
    if (!value.contains("ops")) throw ParseError("edit script lacks 'ops'");
    list = &value.at("ops");
  }
  if (!list->is_array()) throw ParseError("edit script ops must be an array");
  EditScript script;
  for (const nlohmann::json& op : *list) script.ops.push_back(EditOp::FromJson(op));
  return script;
}

PatientRecord ApplyEdits(const PatientRecord& record, const EditScript& script,
                         const CodeVocabulary& vocabulary) {
  PatientRecord out = record;
  std::vector<VisitRecord>& visits = out.visits;
  for (std::size_t i = 0; i < script.ops.size(); ++i) {
    const EditOp& op = script.ops[i];
    const auto fail = [&](const std::string& why) {
      throw EditError("edit " + std::to_string(i) + " (" +
                      std::string(EditKindName(op.kind)) + "): " + why);
    };
    const auto require_visit = [&]() -> VisitRecord& {
      if (op.visit < 0 || op.visit >= static_cast<int>(visits.size())) {
        fail("unknown visit index " + std::to_string(op.visit));
      }
      return visits[op.visit];
    };
    const auto require_code = [&](int code) {
      if (!vocabulary.Contains(code)) fail("unknown code " + std::to_string(code));
    };
    const auto require_day = [&]() {
      if (op.day < 0) fail("negative day " + std::to_string(op.day));
    };

    switch (op.kind) {
      case EditKind::kAddCode: {
        VisitRecord& v = require_visit();
        require_code(op.code);
        if (std::find(v.codes.begin(), v.codes.end(), op.code) != v.codes.end()) {
          fail("code " + std::to_string(op.code) + " already in visit " +
               std::to_string(op.visit));
        }
        v.codes.push_back(op.code);
        std::sort(v.codes.begin(), v.codes.end());
        break;
      }
      case EditKind::kRemoveCode: {
        VisitRecord& v = require_visit();
        const auto it = std::find(v.codes.begin(), v.codes.end(), op.code);
        if (it == v.codes.end()) {
          fail("code " + std::to_string(op.code) + " not in visit " +
               std::to_string(op.visit));
        }
        if (v.codes.size() == 1) fail("visit would be left without codes");
        v.codes.erase(it);
        break;
      }
      case EditKind::kMoveVisit: {
        VisitRecord& v = require_visit();
        require_day();
        v.day = op.day;
        break;
      }
      case EditKind::kAddVisit: {
        require_day();
        if (op.codes.empty()) fail("visit needs at least one code");
        std::vector<int> codes = op.codes;
        for (const int c : codes) require_code(c);
        std::sort(codes.begin(), codes.end());
        if (std::adjacent_find(codes.begin(), codes.end()) != codes.end()) {
          fail("repeated code in new visit");
        }
        visits.push_back({op.day, std::move(codes)});
        break;
      }
      case EditKind::kRemoveVisit: {
        require_visit();
        if (visits.size() == 1) fail("record would be left without visits");
        visits.erase(visits.begin() + op.visit);
        break;
      }
    }
    std::stable_sort(visits.begin(), visits.end(),
                     [](const VisitRecord& a, const VisitRecord& b) {
                       return a.day < b.day;
                     });
  }
  return out;
}

nlohmann::json PatientView::ToJson(const CodeVocabulary* vocabulary) const {
  nlohmann::json out = {{"score", score},
                        {"prediction", prediction},
                        {"risk_curve", risk_curve}};
  out["contributions"] =
      contributions ? contributions->ToJson(vocabulary) : nlohmann::json(nullptr);
  return out;
}

PatientView InspectPatient(const Model& model, const EncodedSequence& encoded) {
  const ForwardTrace trace = Forward(model, encoded);
  PatientView view;
  view.score = trace.score;
  view.prediction = trace.prediction;
  view.risk_curve = PrefixRiskCurve(model, encoded);
  if (model.is_attention_model()) {
    view.contributions = CodeContributions(model, trace);
  }
  return view;
}

nlohmann::json WhatIfResult::ToJson(const CodeVocabulary* vocabulary) const {
  return {{"before", before.ToJson(vocabulary)},
          {"after", after.ToJson(vocabulary)},
          {"edited", PatientToJson(edited)}};
}

WhatIfResult WhatIf(const Model& model, const PatientRecord& record,
                    const EditScript& script, const CodeVocabulary& vocabulary) {
  WhatIfResult result;
  result.edited = ApplyEdits(record, script, vocabulary);
  result.before = InspectPatient(model, EncodePatient(record, vocabulary));
  result.after = InspectPatient(model, EncodePatient(result.edited, vocabulary));
  return result;
}

nlohmann::json RetrainRequest::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const SteerSelection& s : selections) {
    out.push_back({{"visit", s.visit},
                   {"code", s.code},
                   {"direction", DirectionName(s.direction)}});
  }
  return {{"selections", std::move(out)},
          {"iterations", iterations},
          {"learning_rate", learning_rate}};
}

RetrainRequest RetrainRequest::FromJson(const nlohmann::json& object) {
  RetrainRequest request;
  try {
    for (const nlohmann::json& s : object.at("selections")) {
      const std::string direction = s.at("direction").get<std::string>();
      if (direction != "increase" && direction != "decrease") {
        throw ParseError("direction must be 'increase' or 'decrease'");
      }
      request.selections.push_back(
          {s.at("visit").get<int>(), s.at("code").get<int>(),
           direction == "increase" ? SteerDirection::kIncrease
                                   : SteerDirection::kDecrease});
    }
    request.iterations = object.value("iterations", request.iterations);
    request.learning_rate = object.value("learning_rate", request.learning_rate);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("retrain request: ") + e.what());
  }
  return request;
}

nlohmann::json RetrainReport::ToJson(const CodeVocabulary* vocabulary) const {
  return {{"losses", losses},
          {"before", before.ToJson(vocabulary)},
          {"after", after.ToJson(vocabulary)},
          {"prediction_before", prediction_before},
          {"prediction_after", prediction_after},
          {"seconds", seconds}};
}

RetrainResult Retrain(const Model& model, const EncodedSequence& encoded,
                      const RetrainRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  if (!model.is_attention_model() ||
      std::string(model.attention_embedding()) == model.value_embedding()) {
    throw UnsupportedError(
        "steering needs separate attention and value embeddings");
  }
  if (request.selections.empty()) throw ArgumentError("no codes selected");
  if (request.iterations < 1 || request.iterations > kMaxRetrainIterations) {
    throw ArgumentError("iterations must lie in [1, " +
                        std::to_string(kMaxRetrainIterations) + "]");
  }
  if (!(request.learning_rate > 0.0) || !std::isfinite(request.learning_rate)) {
    throw ArgumentError("learning rate must be positive and finite");
  }
  std::map<std::pair<int, int>, SteerDirection> seen;
  for (const SteerSelection& s : request.selections) {
    if (s.visit < 0 || s.visit >= encoded.length()) {
      throw ArgumentError("unknown visit index " + std::to_string(s.visit));
    }
    const std::vector<int>& codes = encoded.active[s.visit];
    if (!std::binary_search(codes.begin(), codes.end(), s.code)) {
      throw ArgumentError("code " + std::to_string(s.code) +
                          " is not active in visit " + std::to_string(s.visit));
    }
    const auto [it, inserted] = seen.emplace(std::pair(s.visit, s.code), s.direction);
    if (!inserted && it->second != s.direction) {
      throw ArgumentError("conflicting directions for code " +
                          std::to_string(s.code) + " in visit " +
                          std::to_string(s.visit));
    }
  }

  RetrainResult result{model, {}};
  Model& steered = result.model;
  const char* value_name = steered.value_embedding();
  const auto selected_sums = [&](const ContributionMatrix& m, double* pos,
                                 double* neg) {
    *pos = 0.0;
    *neg = 0.0;
    for (const auto& [key, direction] : seen) {
      const double s = m.at(key.first, key.second);
      (direction == SteerDirection::kIncrease ? *pos : *neg) += s;
    }
  };

  for (int iteration = 0; iteration < request.iterations; ++iteration) {
    const ForwardTrace trace = Forward(steered, encoded);
    const ContributionMatrix contributions = CodeContributions(steered, trace);
    if (iteration == 0) {
      result.report.before = contributions;
      result.report.prediction_before = trace.prediction;
    }
    double pos = 0.0, neg = 0.0;
    selected_sums(contributions, &pos, &neg);
    const double loss = std::exp(-pos + neg);
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite steering loss at iteration " +
                         std::to_string(iteration));
    }
    result.report.losses.push_back(loss);

    // d s_{t,c} / d W_b[:, c] = alpha_t * (w_out * beta_t).
    const ConstVectorMap w_out = steered.params().value(param::kOutput).AsVector();
    MatrixMap embedding = steered.params().MutableValue(value_name).AsMatrix();
    Eigen::MatrixXd updates = Eigen::MatrixXd::Zero(embedding.rows(), seen.size());
    int column = 0;
    for (const auto& [key, direction] : seen) {
      const double sign = direction == SteerDirection::kIncrease ? -1.0 : 1.0;
      updates.col(column++) = sign * loss * trace.alpha[key.first] *
                              w_out.cwiseProduct(trace.beta[key.first]);
    }
    column = 0;
    for (const auto& [key, direction] : seen) {
      embedding.col(key.second) -= request.learning_rate * updates.col(column++);
    }
  }

  const ForwardTrace final_trace = Forward(steered, encoded);
  result.report.after = CodeContributions(steered, final_trace);
  result.report.prediction_after = final_trace.prediction;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace retainex
