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

#ifndef RETAINEX_TIME_FEATURES_H_
#define RETAINEX_TIME_FEATURES_H_

#include <array>
#include <span>
#include <vector>

namespace retainex {

inline constexpr int kNumTimeFeatures = 3;

// Per visit: (dt, 1/dt, 1/ln(e + dt)), where dt is the gap to the previous
// visit in days, floored at 1, and the first visit has dt = 1.
struct TimeFeatures {
  std::vector<std::array<double, kNumTimeFeatures>> values;

  int length() const { return static_cast<int>(values.size()); }
  double interval(int t) const { return values[t][0]; }
};

std::array<double, kNumTimeFeatures> IntervalFeatures(double interval_days);

// Throws ArgumentError on empty input or decreasing days.
TimeFeatures ComputeTimeFeatures(std::span<const int> days);

}  // namespace retainex

#endif  // RETAINEX_TIME_FEATURES_H_
