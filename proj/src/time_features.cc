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

#include "retainex/time_features.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "retainex/error.h"

namespace retainex {

std::array<double, kNumTimeFeatures> IntervalFeatures(double interval_days) {
  return {interval_days, 1.0 / interval_days,
          1.0 / std::log(std::numbers::e + interval_days)};
}

TimeFeatures ComputeTimeFeatures(std::span<const int> days) {
  if (days.empty()) throw ArgumentError("time features need at least one visit");
  TimeFeatures features;
  features.values.reserve(days.size());
  features.values.push_back(IntervalFeatures(1.0));
  for (std::size_t t = 1; t < days.size(); ++t) {
    const int gap = days[t] - days[t - 1];
    if (gap < 0) {
      throw ArgumentError("visit days decrease at visit " + std::to_string(t));
    }
    features.values.push_back(IntervalFeatures(std::max(1, gap)));
  }
  return features;
}

}  // namespace retainex
