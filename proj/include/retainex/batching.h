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

#ifndef RETAINEX_BATCHING_H_
#define RETAINEX_BATCHING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "retainex/patient.h"

namespace retainex {

struct SplitRatios {
  double train = 0.65;
  double validation = 0.10;
  double test = 0.25;
};

struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Group ids in order of first appearance.
std::vector<std::string> GroupIds(const Dataset& dataset);

// Splits at case-group granularity after a seeded shuffle of the groups.
// Validation and test receive round(ratio * groups); train takes the rest.
// Ratios must be positive and sum to 1 within 1e-9 (ArgumentError).
DatasetSplit SplitDataset(const Dataset& dataset, const SplitRatios& ratios,
                          std::uint64_t seed);

// One case with its matched controls; indices point into the dataset.
struct Batch {
  std::string group;
  std::vector<int> patient_indices;  // case first, then controls in file order
};

// One batch per case group, in an order shuffled by `seed`. Throws DataError
// when a group does not have exactly one case (orphan controls) or has no
// controls.
std::vector<Batch> MakeBatches(const Dataset& dataset, std::uint64_t seed);

}  // namespace retainex

#endif  // RETAINEX_BATCHING_H_
