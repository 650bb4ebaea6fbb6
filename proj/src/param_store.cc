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

#include "retainex/param_store.h"

#include <cmath>

#include "retainex/error.h"

namespace retainex {

void ParamStore::Add(const std::string& name, Tensor initial) {
  if (entries_.contains(name)) {
    throw ArgumentError("duplicate parameter name: " + name);
  }
  Entry entry;
  entry.grad = Tensor(initial.shape());
  entry.first_moment = Tensor(initial.shape());
  entry.second_moment = Tensor(initial.shape());
  entry.value = std::move(initial);
  entries_.emplace(name, std::move(entry));
  order_.push_back(name);
}

bool ParamStore::Contains(const std::string& name) const {
  return entries_.contains(name);
}

std::size_t ParamStore::NumScalars() const {
  std::size_t total = 0;
  for (const auto& [name, entry] : entries_) total += entry.value.size();
  return total;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw NotFoundError("unknown parameter: " + name);
  return it->second;
}

ParamStore::Entry& ParamStore::MutableEntry(const std::string& name) {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw NotFoundError("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const {
  return entry(name).value;
}

Tensor& ParamStore::MutableValue(const std::string& name) {
  return MutableEntry(name).value;
}

const Tensor& ParamStore::grad(const std::string& name) const {
  return entry(name).grad;
}

Tensor& ParamStore::MutableGrad(const std::string& name) {
  Entry& e = MutableEntry(name);
  e.grad_populated = true;
  return e.grad;
}

void ParamStore::ZeroGrad() {
  for (auto& [name, entry] : entries_) {
    entry.grad.SetZero();
    entry.grad_populated = false;
  }
}

ParamStore ParamStore::CloneValues() const {
  ParamStore copy;
  for (const std::string& name : order_) copy.Add(name, value(name));
  return copy;
}

void AdamStep(ParamStore& store, double learning_rate, double beta1,
              double beta2, double epsilon) {
  if (!(learning_rate > 0.0)) {
    throw ArgumentError("Adam learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
  for (const std::string& name : store.order_) {
    if (!store.entries_.at(name).grad_populated) {
      throw StateError("missing gradient for parameter " + name);
    }
  }
  const double step = static_cast<double>(store.step_count_ + 1);
  const double correction1 = 1.0 - std::pow(beta1, step);
  const double correction2 = 1.0 - std::pow(beta2, step);
  for (const std::string& name : store.order_) {
    ParamStore::Entry& e = store.entries_.at(name);
    double* w = e.value.data();
    const double* g = e.grad.data();
    double* m = e.first_moment.data();
    double* v = e.second_moment.data();
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
  }
  store.ZeroGrad();
  ++store.step_count_;
}

}  // namespace retainex
