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

#ifndef RETAINEX_MATH_OPS_H_
#define RETAINEX_MATH_OPS_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace retainex {

// Max-subtracted softmax. Throws ArgumentError on empty input.
std::vector<double> Softmax(std::span<const double> logits);
Eigen::VectorXd Softmax(const Eigen::VectorXd& logits);

inline double Sigmoid(double x) {
  // Branching keeps exp() argument non-positive, so neither side overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  // Deep negative inputs underflow; keep the result strictly positive.
  return std::max(e / (1.0 + e), std::numeric_limits<double>::denorm_min());
}

}  // namespace retainex

#endif  // RETAINEX_MATH_OPS_H_
