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

#include "retainex/rng.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "retainex/error.h"

namespace retainex {

double SeededRng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::UniformInt(std::uint64_t n) {
  if (n == 0) throw ArgumentError("UniformInt requires n > 0");
  if (n == 1) return 0;
  // Smallest all-ones mask covering n - 1; reject draws outside [0, n).
  std::uint64_t mask = n - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  while (true) {
    const std::uint64_t draw = engine_() & mask;
    if (draw < n) return draw;
  }
}

int SeededRng::UniformInt(int lo, int hi) {
  if (hi < lo) throw ArgumentError("UniformInt requires lo <= hi");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(UniformInt(span));
}

double SeededRng::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

int SeededRng::Geometric(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ArgumentError("Geometric requires p in (0, 1]");
  }
  if (p == 1.0) return 0;
  double u = Uniform();
  while (u <= 0.0) u = Uniform();
  return static_cast<int>(std::floor(std::log(u) / std::log1p(-p)));
}

std::size_t SeededRng::Categorical(std::span<const double> cumulative_weights) {
  if (cumulative_weights.empty() || !(cumulative_weights.back() > 0.0)) {
    throw ArgumentError("Categorical requires a positive total weight");
  }
  const double target = Uniform() * cumulative_weights.back();
  const auto it = std::upper_bound(cumulative_weights.begin(),
                                   cumulative_weights.end(), target);
  return std::min<std::size_t>(it - cumulative_weights.begin(),
                               cumulative_weights.size() - 1);
}

SeededRng SeededRng::Fork() {
  // SplitMix64 finalizer decorrelates the child seed from the parent stream.
  std::uint64_t z = engine_() + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return SeededRng(z ^ (z >> 31));
}

}  // namespace retainex
