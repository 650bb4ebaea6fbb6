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

#include "retainex/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "retainex/error.h"

namespace retainex {
namespace {

std::size_t CheckedVolume(const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw ArgumentError("tensor rank must be 1 or 2, got " +
                        std::to_string(shape.size()));
  }
  std::size_t volume = 1;
  for (const int extent : shape) {
    if (extent <= 0) {
      throw ArgumentError("tensor extents must be positive, got " +
                          std::to_string(extent));
    }
    volume *= static_cast<std::size_t>(extent);
  }
  return volume;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(CheckedVolume(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (CheckedVolume(shape_) != data_.size()) {
    throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape volume");
  }
}

void Tensor::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace retainex
