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

#ifndef RETAINEX_RNG_H_
#define RETAINEX_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace retainex {

// Explicitly seeded random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; every transform below is implemented
// here (never through <random> distributions, whose algorithms vary between
// standard libraries), so a seed yields the same stream on every platform.
//
//   Uniform()     53 high bits of one draw scaled by 2^-53, in [0, 1).
//   UniformInt(n) rejection sampling on the top bits, unbiased in [0, n).
//   Normal()      Box-Muller, both variates used in turn.
//   Shuffle()     Fisher-Yates from the back.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextBits() { return engine_(); }
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);
  // Uniform integer in [lo, hi] inclusive.
  int UniformInt(int lo, int hi);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }
  // Number of failures before the first success, success probability p.
  int Geometric(double p);
  // Index drawn proportionally to non-negative weights (cumulative form).
  std::size_t Categorical(std::span<const double> cumulative_weights);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent child stream, for handing one stream per component.
  SeededRng Fork();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace retainex

#endif  // RETAINEX_RNG_H_
