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

#include "retainex/interpretation.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "retainex/error.h"

namespace retainex {

double ContributionMatrix::Total() const {
  double total = 0.0;
  for (const double s : visit_sums) total += s;
  return total;
}

double ContributionMatrix::at(int visit, int code) const {
  for (const Contribution& c : entries) {
    if (c.visit == visit && c.code == code) return c.score;
  }
  throw NotFoundError("code " + std::to_string(code) + " is not active in visit " +
                      std::to_string(visit));
}

nlohmann::json ContributionMatrix::ToJson(const CodeVocabulary* vocabulary) const {
  nlohmann::json visits = nlohmann::json::array();
  for (int t = 0; t < num_visits(); ++t) {
    visits.push_back({{"visit", t}, {"score", visit_sums[t]},
                      {"codes", nlohmann::json::array()}});
  }
  for (const Contribution& c : entries) {
    nlohmann::json entry = {{"code", c.code}, {"score", c.score}};
    if (vocabulary != nullptr) entry["label"] = vocabulary->code(c.code).label;
    visits[c.visit]["codes"].push_back(std::move(entry));
  }
  return visits;
}

ContributionMatrix CodeContributions(const Model& model, const ForwardTrace& trace) {
  if (!model.is_attention_model() || trace.variant == Variant::kGruBaseline) {
    throw UnsupportedError("contribution scores need an attention variant");
  }
  if (trace.variant != model.variant()) {
    throw ArgumentError("trace was produced by a different variant");
  }
  const ParamStore& p = model.params();
  const ConstMatrixMap value_embedding = p.value(model.value_embedding()).AsMatrix();
  const ConstVectorMap w_out = p.value(param::kOutput).AsVector();

  ContributionMatrix matrix;
  matrix.visit_sums.assign(trace.length(), 0.0);
  for (int t = 0; t < trace.length(); ++t) {
    const Eigen::VectorXd weighted = w_out.cwiseProduct(trace.beta[t]);
    for (const int c : trace.codes[t]) {
      const double s = trace.alpha[t] * weighted.dot(value_embedding.col(c));
      matrix.entries.push_back({t, c, s});
      matrix.visit_sums[t] += s;
    }
  }
  return matrix;
}

std::vector<double> VisitContributions(const ContributionMatrix& matrix) {
  std::vector<double> sums(matrix.num_visits(), 0.0);
  for (const Contribution& c : matrix.entries) sums[c.visit] += c.score;
  return sums;
}

PatientEmbedding EmbedPatient(const ContributionMatrix& matrix, int num_codes) {
  if (num_codes < 1) throw ArgumentError("code count must be positive");
  PatientEmbedding embedding;
  embedding.scores.assign(num_codes, 0.0);
  embedding.counts.assign(num_codes, 0);
  for (const Contribution& c : matrix.entries) {
    if (c.code < 0 || c.code >= num_codes) {
      throw ArgumentError("code " + std::to_string(c.code) +
                          " outside the vocabulary of " +
                          std::to_string(num_codes));
    }
    embedding.scores[c.code] += c.score;
    ++embedding.counts[c.code];
  }
  return embedding;
}

nlohmann::json CohortAggregate::ToJson(const CodeVocabulary& vocabulary) const {
  if (vocabulary.size() != static_cast<int>(total.size())) {
    throw ArgumentError("vocabulary does not match the aggregate");
  }
  nlohmann::json labels = nlohmann::json::array();
  nlohmann::json s2 = nlohmann::json::array();
  for (int c = 0; c < vocabulary.size(); ++c) {
    labels.push_back(vocabulary.code(c).label);
    s2.push_back(per_occurrence[c] ? nlohmann::json(*per_occurrence[c])
                                   : nlohmann::json(nullptr));
  }
  return {{"num_patients", num_patients}, {"labels", std::move(labels)},
          {"s_total", total},             {"counts", counts},
          {"s1", per_patient},            {"s2", std::move(s2)}};
}

CohortAggregate AggregateCohort(const std::vector<PatientEmbedding>& embeddings) {
  if (embeddings.empty()) throw ArgumentError("cannot aggregate an empty cohort");
  const std::size_t num_codes = embeddings.front().scores.size();
  CohortAggregate aggregate;
  aggregate.num_patients = static_cast<int>(embeddings.size());
  aggregate.total.assign(num_codes, 0.0);
  aggregate.counts.assign(num_codes, 0);
  for (const PatientEmbedding& e : embeddings) {
    if (e.scores.size() != num_codes || e.counts.size() != num_codes) {
      throw ArgumentError("patient embeddings differ in length");
    }
    for (std::size_t c = 0; c < num_codes; ++c) {
      aggregate.total[c] += e.scores[c];
      aggregate.counts[c] += e.counts[c];
    }
  }
  aggregate.per_patient.resize(num_codes);
  aggregate.per_occurrence.resize(num_codes);
  for (std::size_t c = 0; c < num_codes; ++c) {
    aggregate.per_patient[c] = aggregate.total[c] / aggregate.num_patients;
    if (aggregate.counts[c] > 0) {
      aggregate.per_occurrence[c] =
          aggregate.total[c] / static_cast<double>(aggregate.counts[c]);
    }
  }
  return aggregate;
}

nlohmann::json TemporalSummary::ToJson() const {
  const auto optional_array = [](const std::vector<std::optional<double>>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& x : v) out.push_back(x ? nlohmann::json(*x) : nlohmann::json());
    return out;
  };
  nlohmann::json out_series = nlohmann::json::array();
  for (const TemporalSeries& s : series) {
    out_series.push_back({{"code", s.code},
                          {"mean", optional_array(s.mean)},
                          {"std", optional_array(s.stddev)},
                          {"support", s.support}});
  }
  return {{"num_offsets", num_offsets}, {"series", std::move(out_series)}};
}

TemporalSummary SummarizeTemporal(const std::vector<ContributionMatrix>& matrices,
                                  const std::vector<int>& codes) {
  if (static_cast<int>(codes.size()) > kMaxTemporalCodes) {
    throw ArgumentError("at most " + std::to_string(kMaxTemporalCodes) +
                        " codes per temporal summary");
  }
  TemporalSummary summary;
  for (const ContributionMatrix& m : matrices) {
    summary.num_offsets = std::max(summary.num_offsets, m.num_visits());
  }
  for (const int code : codes) {
    std::vector<double> sum(summary.num_offsets, 0.0);
    std::vector<std::vector<double>> values(summary.num_offsets);
    for (const ContributionMatrix& m : matrices) {
      for (const Contribution& c : m.entries) {
        if (c.code != code) continue;
        values[m.num_visits() - 1 - c.visit].push_back(c.score);
      }
    }
    TemporalSeries series;
    series.code = code;
    series.mean.resize(summary.num_offsets);
    series.stddev.resize(summary.num_offsets);
    series.support.assign(summary.num_offsets, 0);
    for (int k = 0; k < summary.num_offsets; ++k) {
      const std::vector<double>& v = values[k];
      series.support[k] = static_cast<int>(v.size());
      if (v.empty()) continue;
      double total = 0.0;
      for (const double x : v) total += x;
      const double mean = total / v.size();
      double squares = 0.0;
      for (const double x : v) squares += (x - mean) * (x - mean);
      series.mean[k] = mean;
      series.stddev[k] = v.size() == 1 ? 0.0 : std::sqrt(squares / v.size());
    }
    summary.series.push_back(std::move(series));
  }
  return summary;
}

std::vector<double> PrefixRiskCurve(const Model& model,
                                    const EncodedSequence& encoded) {
  if (encoded.length() == 0) throw ArgumentError("empty sequence");
  std::vector<double> curve;
  curve.reserve(encoded.length());
  for (int t = 1; t <= encoded.length(); ++t) {
    EncodedSequence prefix;
    prefix.num_codes = encoded.num_codes;
    prefix.active.assign(encoded.active.begin(), encoded.active.begin() + t);
    prefix.days.assign(encoded.days.begin(), encoded.days.begin() + t);
    curve.push_back(Forward(model, prefix).prediction);
  }
  return curve;
}

std::vector<RankedCode> TopContributors(
    const std::vector<std::optional<double>>& scores, int k, bool group_by_kind,
    const CodeVocabulary& vocabulary) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  if (static_cast<int>(scores.size()) != vocabulary.size()) {
    throw ArgumentError("score vector does not match the vocabulary");
  }
  const auto rank = [&](const std::vector<int>& ids) {
    std::vector<RankedCode> ranked;
    for (const int id : ids) {
      if (scores[id]) ranked.push_back({id, *scores[id]});
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const RankedCode& a, const RankedCode& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.code < b.code;
              });
    if (static_cast<int>(ranked.size()) > k) ranked.resize(k);
    return ranked;
  };
  if (!group_by_kind) {
    std::vector<int> all(vocabulary.size());
    for (int c = 0; c < vocabulary.size(); ++c) all[c] = c;
    return rank(all);
  }
  std::vector<RankedCode> out;
  for (const CodeKind kind : kAllCodeKinds) {
    const std::vector<RankedCode> part = rank(vocabulary.IdsOfKind(kind));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<RankedCode> TopContributors(const std::vector<double>& scores, int k,
                                        bool group_by_kind,
                                        const CodeVocabulary& vocabulary) {
  return TopContributors(
      std::vector<std::optional<double>>(scores.begin(), scores.end()), k,
      group_by_kind, vocabulary);
}

}  // namespace retainex
