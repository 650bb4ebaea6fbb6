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

#ifndef RETAINEX_GRADIENT_CHECK_H_
#define RETAINEX_GRADIENT_CHECK_H_

#include <functional>
#include <string>

#include "retainex/param_store.h"

namespace retainex {

// Evaluates a scalar loss of the parameters. When `with_gradient` is true the
// function must also write d(loss)/d(param) into store.MutableGrad(...) for
// every parameter it depends on, overwriting previous contents.
using LossFunction = std::function<double(ParamStore& store, bool with_gradient)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

// Compares analytic gradients against central differences
// (f(w + h) - f(w - h)) / 2h, scalar by scalar, and reports the largest
// |a - n| / max(1, |a|, |n|). Parameter values are restored on return.
// Throws NumericError if the loss is non-finite at any probe.
GradientCheckResult FiniteDiffCheck(const LossFunction& loss, ParamStore& store,
                                    double h = 1e-5);

}  // namespace retainex

#endif  // RETAINEX_GRADIENT_CHECK_H_
