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

#include "retainex/batching.h"

#include <cmath>
#include <map>
#include <set>

#include "retainex/error.h"
#include "retainex/rng.h"

namespace retainex {
namespace {

std::map<std::string, std::vector<int>> MembersByGroup(const Dataset& dataset) {
  std::map<std::string, std::vector<int>> members;
  for (int i = 0; i < dataset.size(); ++i) {
    members[dataset.patients[i].group].push_back(i);
  }
  return members;
}

Dataset SubsetOf(const Dataset& dataset, const std::set<std::string>& groups) {
  Dataset subset;
  subset.vocabulary = dataset.vocabulary;
  subset.provenance = dataset.provenance;
  for (const PatientRecord& p : dataset.patients) {
    if (groups.contains(p.group)) subset.patients.push_back(p);
  }
  return subset;
}

}  // namespace

std::vector<std::string> GroupIds(const Dataset& dataset) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const PatientRecord& p : dataset.patients) {
    if (seen.insert(p.group).second) ids.push_back(p.group);
  }
  return ids;
}

DatasetSplit SplitDataset(const Dataset& dataset, const SplitRatios& ratios,
                          std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0)) {
    throw ArgumentError("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ArgumentError("split ratios must sum to 1");
  }
  std::vector<std::string> groups = GroupIds(dataset);
  SeededRng rng(seed);
  rng.Shuffle(groups);

  const auto n = static_cast<double>(groups.size());
  const auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * n));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * n));
  if (n_val + n_test > groups.size()) {
    throw ArgumentError("too few groups to honor the split ratios");
  }
  const std::size_t n_train = groups.size() - n_val - n_test;

  std::set<std::string> train(groups.begin(), groups.begin() + n_train);
  std::set<std::string> validation(groups.begin() + n_train,
                                   groups.begin() + n_train + n_val);
  std::set<std::string> test(groups.begin() + n_train + n_val, groups.end());
  return {SubsetOf(dataset, train), SubsetOf(dataset, validation),
          SubsetOf(dataset, test)};
}

std::vector<Batch> MakeBatches(const Dataset& dataset, std::uint64_t seed) {
  const auto members = MembersByGroup(dataset);
  std::vector<Batch> batches;
  for (const std::string& group : GroupIds(dataset)) {
    const std::vector<int>& indices = members.at(group);
    Batch batch;
    batch.group = group;
    int cases = 0;
    for (const int i : indices) {
      if (dataset.patients[i].label == 1) {
        ++cases;
        batch.patient_indices.insert(batch.patient_indices.begin(), i);
      } else {
        batch.patient_indices.push_back(i);
      }
    }
    if (cases != 1) {
      throw DataError("group " + group + " has " + std::to_string(cases) +
                      " cases; expected exactly one (orphan controls?)");
    }
    if (indices.size() < 2) {
      throw DataError("group " + group + " has no controls");
    }
    batches.push_back(std::move(batch));
  }
  SeededRng rng(seed);
  rng.Shuffle(batches);
  return batches;
}

}  // namespace retainex
