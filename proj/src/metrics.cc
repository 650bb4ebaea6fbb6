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

#include "retainex/metrics.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "retainex/error.h"

namespace retainex {
namespace {

struct ClassCounts {
  long positives = 0;
  long negatives = 0;
};

ClassCounts CountClasses(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ArgumentError("scores and labels differ in length");
  }
  ClassCounts counts;
  for (const int label : labels) {
    if (label == 1) {
      ++counts.positives;
    } else if (label == 0) {
      ++counts.negatives;
    } else {
      throw ArgumentError("labels must be 0 or 1");
    }
  }
  return counts;
}

std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

}  // namespace

double Auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts counts = CountClasses(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw ArgumentError("AUC needs at least one positive and one negative");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Integer pair counts keep the numerator exact.
  long concordant = 0;
  long tied = 0;
  long negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    long group_pos = 0, group_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? group_pos : group_neg)++;
      ++j;
    }
    concordant += group_pos * negatives_below;
    tied += group_pos * group_neg;
    negatives_below += group_neg;
    i = j;
  }
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
         (static_cast<double>(counts.positives) *
          static_cast<double>(counts.negatives));
}

double AveragePrecision(std::span<const double> scores,
                        std::span<const int> labels) {
  const ClassCounts counts = CountClasses(scores, labels);
  if (counts.positives == 0) {
    throw ArgumentError("average precision needs at least one positive");
  }
  const std::vector<std::size_t> order = DescendingOrder(scores);
  double total = 0.0;
  long hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1) {
      ++hits;
      total += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return total / static_cast<double>(counts.positives);
}

F1Threshold BestF1Threshold(std::span<const double> scores,
                            std::span<const int> labels) {
  const ClassCounts counts = CountClasses(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw ArgumentError("F1 threshold search needs both classes");
  }
  const std::vector<std::size_t> order = DescendingOrder(scores);
  F1Threshold best{scores[order.front()], -1.0};
  long true_positives = 0;
  long predicted = 0;
  // Walking down the ranking, each tie group's last member closes the
  // candidate "score >= threshold"; >= keeps the lowest threshold on ties.
  for (std::size_t k = 0; k < order.size(); ++k) {
    ++predicted;
    true_positives += labels[order[k]] == 1 ? 1 : 0;
    const bool group_end =
        k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]];
    if (!group_end) continue;
    const double f1 = 2.0 * static_cast<double>(true_positives) /
                      static_cast<double>(predicted + counts.positives);
    if (f1 >= best.f1) best = {scores[order[k]], f1};
  }
  return best;
}

}  // namespace retainex
