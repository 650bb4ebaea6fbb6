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

#include "retainex/gru.h"

#include "retainex/math_ops.h"

namespace retainex {
namespace {

Eigen::VectorXd SigmoidOf(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return Sigmoid(v); });
}

Tensor UniformTensor(std::vector<int> shape, double scale, SeededRng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.Uniform(-scale, scale);
  return t;
}

}  // namespace

GruView GruView::Of(const ParamStore& store, const std::string& prefix) {
  const Tensor& w = store.value(prefix + ".W");
  const Tensor& u = store.value(prefix + ".U");
  const Tensor& b = store.value(prefix + ".b");
  return {w.AsMatrix(), u.AsMatrix(), b.AsVector()};
}

void AddGruParams(ParamStore& store, const std::string& prefix, int input,
                  int hidden, double init_scale, SeededRng& rng) {
  store.Add(prefix + ".W", UniformTensor({3 * hidden, input}, init_scale, rng));
  store.Add(prefix + ".U", UniformTensor({3 * hidden, hidden}, init_scale, rng));
  store.Add(prefix + ".b", UniformTensor({3 * hidden}, init_scale, rng));
}

Eigen::VectorXd GruCell(const GruView& gru, const Eigen::VectorXd& input,
                        const Eigen::VectorXd& h_prev, GruStepCache* cache) {
  const int m = gru.hidden();
  const Eigen::VectorXd pre = gru.W * input + gru.b;
  const Eigen::VectorXd recurrent = gru.U.topRows(2 * m) * h_prev;
  Eigen::VectorXd z = SigmoidOf(pre.head(m) + recurrent.head(m));
  Eigen::VectorXd r = SigmoidOf(pre.segment(m, m) + recurrent.tail(m));
  Eigen::VectorXd candidate =
      (pre.tail(m) + gru.U.bottomRows(m) * r.cwiseProduct(h_prev))
          .array()
          .tanh()
          .matrix();
  Eigen::VectorXd h = (1.0 - z.array()).matrix().cwiseProduct(h_prev) +
                      z.cwiseProduct(candidate);
  if (cache != nullptr) {
    cache->input = input;
    cache->h_prev = h_prev;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->candidate = std::move(candidate);
    cache->h = h;
  }
  return h;
}

GruRun RunGru(const GruView& gru, const std::vector<Eigen::VectorXd>& inputs,
              bool reverse) {
  const int length = static_cast<int>(inputs.size());
  GruRun run;
  run.reverse = reverse;
  run.steps.resize(length);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(gru.hidden());
  for (int i = 0; i < length; ++i) {
    const int t = reverse ? length - 1 - i : i;
    h = GruCell(gru, inputs[t], h, &run.steps[t]);
  }
  return run;
}

std::vector<Eigen::VectorXd> BiGru(const GruView& forward,
                                   const GruView& backward,
                                   const std::vector<Eigen::VectorXd>& inputs,
                                   GruRun* forward_run, GruRun* backward_run) {
  GruRun fwd = RunGru(forward, inputs, /*reverse=*/false);
  GruRun bwd = RunGru(backward, inputs, /*reverse=*/true);
  const int m_f = forward.hidden();
  const int m_b = backward.hidden();
  std::vector<Eigen::VectorXd> states;
  states.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Eigen::VectorXd joined(m_f + m_b);
    joined << fwd.state(t), bwd.state(t);
    states.push_back(std::move(joined));
  }
  if (forward_run != nullptr) *forward_run = std::move(fwd);
  if (backward_run != nullptr) *backward_run = std::move(bwd);
  return states;
}

void BackpropGru(const GruView& gru, const GruRun& run,
                 const std::vector<Eigen::VectorXd>& state_grads,
                 ParamStore& store, const std::string& prefix,
                 std::vector<Eigen::VectorXd>& input_grads) {
  const int m = gru.hidden();
  const int length = static_cast<int>(run.steps.size());
  MatrixMap dW = store.MutableGrad(prefix + ".W").AsMatrix();
  MatrixMap dU = store.MutableGrad(prefix + ".U").AsMatrix();
  VectorMap db = store.MutableGrad(prefix + ".b").AsVector();

  Eigen::VectorXd carry = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd d_pre(3 * m);
  for (int i = 0; i < length; ++i) {
    // Undo the processing order: last processed position first.
    const int t = run.reverse ? i : length - 1 - i;
    const GruStepCache& s = run.steps[t];
    const Eigen::VectorXd dh = state_grads[t] + carry;

    const Eigen::ArrayXd z = s.z.array();
    const Eigen::ArrayXd r = s.r.array();
    const Eigen::ArrayXd c = s.candidate.array();
    const Eigen::ArrayXd dz = dh.array() * (c - s.h_prev.array());
    const Eigen::ArrayXd dc_pre = dh.array() * z * (1.0 - c * c);
    Eigen::VectorXd dh_prev = (dh.array() * (1.0 - z)).matrix();

    const Eigen::VectorXd reset_h = s.r.cwiseProduct(s.h_prev);
    const Eigen::VectorXd d_reset_h =
        gru.U.bottomRows(m).transpose() * dc_pre.matrix();
    const Eigen::ArrayXd dr = d_reset_h.array() * s.h_prev.array();
    dh_prev += d_reset_h.cwiseProduct(s.r);

    d_pre.head(m) = (dz * z * (1.0 - z)).matrix();
    d_pre.segment(m, m) = (dr * r * (1.0 - r)).matrix();
    d_pre.tail(m) = dc_pre.matrix();

    dW.noalias() += d_pre * s.input.transpose();
    db += d_pre;
    dU.topRows(2 * m).noalias() += d_pre.head(2 * m) * s.h_prev.transpose();
    dU.bottomRows(m).noalias() += d_pre.tail(m) * reset_h.transpose();
    input_grads[t].noalias() += gru.W.transpose() * d_pre;
    dh_prev.noalias() += gru.U.topRows(2 * m).transpose() * d_pre.head(2 * m);
    carry = std::move(dh_prev);
  }
}

}  // namespace retainex
