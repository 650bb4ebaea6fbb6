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

#ifndef RETAINEX_METRICS_H_
#define RETAINEX_METRICS_H_

#include <span>

namespace retainex {

// Area under the ROC curve in its Mann-Whitney form:
//   (concordant pairs + 0.5 * tied pairs) / (P * N).
// Throws ArgumentError unless both classes are present.
double Auc(std::span<const double> scores, std::span<const int> labels);

// Mean of precision@k over the ranks k of the positives, ranking by
// descending score with ties broken by ascending original index.
// Throws ArgumentError when there is no positive.
double AveragePrecision(std::span<const double> scores,
                        std::span<const int> labels);

struct F1Threshold {
  double threshold = 0.0;
  double f1 = 0.0;
};

// Scans every distinct score as a threshold (positive when score >=
// threshold) and returns the F1 maximizer, preferring the lowest threshold on
// ties. Throws ArgumentError unless both classes are present.
F1Threshold BestF1Threshold(std::span<const double> scores,
                            std::span<const int> labels);

}  // namespace retainex

#endif  // RETAINEX_METRICS_H_
