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

#ifndef RETAINEX_PARAM_STORE_H_
#define RETAINEX_PARAM_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "retainex/tensor.h"

namespace retainex {

// Named learnable tensors with their gradients and Adam moments. Entries keep
// insertion order for iteration and serialization.
class ParamStore {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    Tensor first_moment;
    Tensor second_moment;
    // Set by MutableGrad(); cleared once an optimizer step consumes it.
    bool grad_populated = false;
  };

  // Registers a parameter. Throws ArgumentError on a duplicate name.
  void Add(const std::string& name, Tensor initial);

  bool Contains(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t NumScalars() const;

  const Tensor& value(const std::string& name) const;
  Tensor& MutableValue(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  // Returns the gradient buffer and marks it populated for the next step.
  Tensor& MutableGrad(const std::string& name);

  const Entry& entry(const std::string& name) const;
  Entry& MutableEntry(const std::string& name);

  void ZeroGrad();
  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t steps) { step_count_ = steps; }

  // Copy of the parameter values only; moments and gradients are reset.
  ParamStore CloneValues() const;

 private:
  friend void AdamStep(ParamStore&, double, double, double, double);

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
  std::int64_t step_count_ = 0;
};

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update of every parameter, using step_count + 1 for
// the correction. Gradients are zeroed afterwards. Throws StateError when any
// parameter has no populated gradient.
void AdamStep(ParamStore& store, double learning_rate, double beta1,
              double beta2, double epsilon);
inline void AdamStep(ParamStore& store, const AdamOptions& options) {
  AdamStep(store, options.learning_rate, options.beta1, options.beta2,
           options.epsilon);
}

}  // namespace retainex

#endif  // RETAINEX_PARAM_STORE_H_
