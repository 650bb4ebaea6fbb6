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

#include "retainex/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "retainex/error.h"

namespace retainex {
namespace {

double CheckedLoss(const LossFunction& loss, ParamStore& store,
                   bool with_gradient) {
  const double value = loss(store, with_gradient);
  if (!std::isfinite(value)) {
    throw NumericError("non-finite loss during gradient check");
  }
  return value;
}

}  // namespace

GradientCheckResult FiniteDiffCheck(const LossFunction& loss, ParamStore& store,
                                    double h) {
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");

  store.ZeroGrad();
  CheckedLoss(loss, store, /*with_gradient=*/true);
  std::map<std::string, Tensor> analytic;
  for (const std::string& name : store.names()) {
    analytic.emplace(name, store.grad(name));
  }
  store.ZeroGrad();

  GradientCheckResult result;
  for (const std::string& name : store.names()) {
    Tensor& value = store.MutableValue(name);
    const Tensor& expected = analytic.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + h;
      const double plus = CheckedLoss(loss, store, false);
      value[i] = saved - h;
      const double minus = CheckedLoss(loss, store, false);
      value[i] = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = expected[i];
      const double error = std::abs(a - numeric) /
                           std::max({1.0, std::abs(a), std::abs(numeric)});
      if (error > result.max_relative_error) {
        result.max_relative_error = error;
        result.worst_parameter = name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace retainex
