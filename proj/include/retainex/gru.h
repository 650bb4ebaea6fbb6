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

#ifndef RETAINEX_GRU_H_
#define RETAINEX_GRU_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "retainex/param_store.h"
#include "retainex/rng.h"

namespace retainex {

// Gated recurrent unit weights, stored in a ParamStore under
//   <prefix>.W  (3m x input)   rows ordered update z, reset r, candidate
//   <prefix>.U  (3m x m)
//   <prefix>.b  (3m)
//
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   c  = tanh(W_c x + U_c (r * h) + b_c)
//   h' = (1 - z) * h + z * c
struct GruView {
  ConstMatrixMap W;
  ConstMatrixMap U;
  ConstVectorMap b;

  int hidden() const { return static_cast<int>(U.cols()); }
  int input() const { return static_cast<int>(W.cols()); }

  static GruView Of(const ParamStore& store, const std::string& prefix);
};

void AddGruParams(ParamStore& store, const std::string& prefix, int input,
                  int hidden, double init_scale, SeededRng& rng);

struct GruStepCache {
  Eigen::VectorXd input;
  Eigen::VectorXd h_prev;
  Eigen::VectorXd z;
  Eigen::VectorXd r;
  Eigen::VectorXd candidate;
  Eigen::VectorXd h;
};

Eigen::VectorXd GruCell(const GruView& gru, const Eigen::VectorXd& input,
                        const Eigen::VectorXd& h_prev,
                        GruStepCache* cache = nullptr);

// One directional pass from a zero initial state. steps[t] always refers to
// sequence position t; a reverse pass consumes positions T-1 down to 0.
struct GruRun {
  bool reverse = false;
  std::vector<GruStepCache> steps;

  const Eigen::VectorXd& state(int t) const { return steps[t].h; }
};

GruRun RunGru(const GruView& gru, const std::vector<Eigen::VectorXd>& inputs,
              bool reverse);

// Per-position [forward; backward] states of a bidirectional GRU.
std::vector<Eigen::VectorXd> BiGru(const GruView& forward,
                                   const GruView& backward,
                                   const std::vector<Eigen::VectorXd>& inputs,
                                   GruRun* forward_run = nullptr,
                                   GruRun* backward_run = nullptr);

// Backpropagation through time. `state_grads[t]` is dL/dh_t from outside the
// recurrence. Parameter gradients are accumulated into store's
// <prefix>.{W,U,b} gradients; input gradients are added into `input_grads`
// (sized like the inputs).
void BackpropGru(const GruView& gru, const GruRun& run,
                 const std::vector<Eigen::VectorXd>& state_grads,
                 ParamStore& store, const std::string& prefix,
                 std::vector<Eigen::VectorXd>& input_grads);

}  // namespace retainex

#endif  // RETAINEX_GRU_H_
