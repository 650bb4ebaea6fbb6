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

#include "retainex/math_ops.h"

#include <algorithm>

#include "retainex/error.h"

namespace retainex {

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("softmax of an empty vector");
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const std::vector<double> out =
      Softmax(std::span<const double>(logits.data(), logits.size()));
  return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
}

}  // namespace retainex
