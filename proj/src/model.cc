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

#include "retainex/model.h"

#include <algorithm>
#include <cmath>

#include "retainex/error.h"
#include "retainex/math_ops.h"
#include "retainex/rng.h"

namespace retainex {
namespace {

std::string Join(const char* prefix, const char* leaf) {
  return std::string(prefix) + "." + leaf;
}

void CheckInput(const Model& model, const EncodedSequence& encoded) {
  if (encoded.length() == 0) {
    throw ArgumentError("forward requires at least one visit");
  }
  if (encoded.num_codes != model.num_codes()) {
    throw ArgumentError("sequence encoded for " +
                        std::to_string(encoded.num_codes) +
                        " codes, model expects " +
                        std::to_string(model.num_codes()));
  }
  if (static_cast<int>(encoded.days.size()) != encoded.length()) {
    throw ArgumentError("sequence days and visits differ in length");
  }
}

// Splits per-position gradients of [forward; backward] states.
void SplitHalves(const std::vector<Eigen::VectorXd>& joined, int m,
                 std::vector<Eigen::VectorXd>& first,
                 std::vector<Eigen::VectorXd>& second) {
  first.clear();
  second.clear();
  for (const Eigen::VectorXd& v : joined) {
    first.push_back(v.head(m));
    second.push_back(v.tail(m));
  }
}

void AccumulateEmbeddingGrad(Tensor& grad, const std::vector<std::vector<int>>& codes,
                             const std::vector<Eigen::VectorXd>& visit_grads,
                             int rows) {
  const int num_codes = grad.cols();
  double* g = grad.data();
  for (std::size_t t = 0; t < codes.size(); ++t) {
    const Eigen::VectorXd& d = visit_grads[t];
    for (const int c : codes[t]) {
      for (int i = 0; i < rows; ++i) g[static_cast<std::size_t>(i) * num_codes + c] += d[i];
    }
  }
}

Eigen::VectorXd ContextVector(const ForwardTrace& trace) {
  Eigen::VectorXd o = Eigen::VectorXd::Zero(trace.v_b.front().size());
  for (int t = 0; t < trace.length(); ++t) {
    o += trace.alpha[t] * trace.beta[t].cwiseProduct(trace.v_b[t]);
  }
  return o;
}

ForwardTrace AttentionForward(const Model& model, const EncodedSequence& encoded) {
  const ParamStore& p = model.params();
  ForwardTrace trace;
  trace.variant = model.variant();
  trace.beta_tanh = model.beta_tanh();
  trace.codes = encoded.active;
  trace.days = encoded.days;
  trace.time = ComputeTimeFeatures(encoded.days);

  const int m = model.hidden();
  const std::vector<Eigen::VectorXd> embedded_a =
      EmbedVisits(p.value(model.attention_embedding()), encoded);
  if (model.uses_time_features()) {
    for (int t = 0; t < encoded.length(); ++t) {
      Eigen::VectorXd v(m + kNumTimeFeatures);
      const auto& tau = trace.time.values[t];
      v << embedded_a[t], tau[0], tau[1], tau[2];
      trace.v_a.push_back(std::move(v));
    }
  } else {
    trace.v_a = embedded_a;
  }
  trace.v_b = model.attention_embedding() == std::string(model.value_embedding())
                  ? embedded_a
                  : EmbedVisits(p.value(model.value_embedding()), encoded);

  if (model.bidirectional()) {
    trace.alpha_states = BiGru(GruView::Of(p, param::kAlphaForward),
                               GruView::Of(p, param::kAlphaBackward), trace.v_a,
                               &trace.alpha_forward, &trace.alpha_backward);
    trace.beta_states = BiGru(GruView::Of(p, param::kBetaForward),
                              GruView::Of(p, param::kBetaBackward), trace.v_a,
                              &trace.beta_forward, &trace.beta_backward);
  } else {
    trace.alpha_backward =
        RunGru(GruView::Of(p, param::kAlphaBackward), trace.v_a, true);
    trace.beta_backward =
        RunGru(GruView::Of(p, param::kBetaBackward), trace.v_a, true);
    for (int t = 0; t < encoded.length(); ++t) {
      trace.alpha_states.push_back(trace.alpha_backward.state(t));
      trace.beta_states.push_back(trace.beta_backward.state(t));
    }
  }

  trace.alpha = AlphaAttention(trace.alpha_states,
                               p.value(param::kAlphaWeights).AsVector(), &trace.e);
  trace.beta = BetaAttention(trace.beta_states,
                             p.value(param::kBetaWeights).AsMatrix(),
                             model.beta_tanh(), &trace.beta_pre);
  trace.context = ContextVector(trace);
  trace.score = p.value(param::kOutput).AsVector().dot(trace.context);
  trace.prediction = Sigmoid(trace.score);
  return trace;
}

ForwardTrace GruForward(const Model& model, const EncodedSequence& encoded) {
  const ParamStore& p = model.params();
  ForwardTrace trace;
  trace.variant = model.variant();
  trace.beta_tanh = model.beta_tanh();
  trace.codes = encoded.active;
  trace.days = encoded.days;
  trace.time = ComputeTimeFeatures(encoded.days);
  trace.v_a = EmbedVisits(p.value(param::kEmbedding), encoded);
  trace.alpha_forward = RunGru(GruView::Of(p, param::kGru), trace.v_a, false);
  const Eigen::VectorXd& last = trace.alpha_forward.state(encoded.length() - 1);
  trace.score =
      p.value(param::kOutput).AsVector().dot(last) + p.value(param::kOutputBias)[0];
  trace.prediction = Sigmoid(trace.score);
  return trace;
}

void AttentionBackward(const ForwardTrace& trace, double score_grad,
                       Model& model) {
  ParamStore& p = model.params();
  const int m = model.hidden();
  const int length = trace.length();
  const Eigen::VectorXd w_out = p.value(param::kOutput).AsVector();

  p.MutableGrad(param::kOutput).AsVector() += score_grad * trace.context;
  const Eigen::VectorXd d_context = score_grad * w_out;

  Eigen::VectorXd d_alpha(length);
  std::vector<Eigen::VectorXd> d_value(length);
  std::vector<Eigen::VectorXd> d_beta_pre(length);
  for (int t = 0; t < length; ++t) {
    d_alpha[t] = d_context.dot(trace.beta[t].cwiseProduct(trace.v_b[t]));
    const Eigen::VectorXd d_beta =
        trace.alpha[t] * d_context.cwiseProduct(trace.v_b[t]);
    d_value[t] = trace.alpha[t] * d_context.cwiseProduct(trace.beta[t]);
    d_beta_pre[t] =
        trace.beta_tanh
            ? Eigen::VectorXd(d_beta.array() *
                              (1.0 - trace.beta[t].array().square()))
            : d_beta;
  }

  // Beta projection.
  const Tensor& w_beta_tensor = p.value(param::kBetaWeights);
  const ConstMatrixMap w_beta = w_beta_tensor.AsMatrix();
  MatrixMap d_w_beta = p.MutableGrad(param::kBetaWeights).AsMatrix();
  std::vector<Eigen::VectorXd> d_beta_states(length);
  for (int t = 0; t < length; ++t) {
    d_w_beta.noalias() += d_beta_pre[t] * trace.beta_states[t].transpose();
    d_beta_states[t] = w_beta.transpose() * d_beta_pre[t];
  }

  // Softmax and alpha projection.
  const double mean = trace.alpha.dot(d_alpha);
  const Eigen::VectorXd d_e =
      (trace.alpha.array() * (d_alpha.array() - mean)).matrix();
  const Eigen::VectorXd w_alpha = p.value(param::kAlphaWeights).AsVector();
  VectorMap d_w_alpha = p.MutableGrad(param::kAlphaWeights).AsVector();
  std::vector<Eigen::VectorXd> d_alpha_states(length);
  for (int t = 0; t < length; ++t) {
    d_w_alpha += d_e[t] * trace.alpha_states[t];
    d_alpha_states[t] = d_e[t] * w_alpha;
  }

  const int input_width = model.rnn_input_width();
  std::vector<Eigen::VectorXd> d_inputs(length,
                                        Eigen::VectorXd::Zero(input_width));
  if (model.bidirectional()) {
    std::vector<Eigen::VectorXd> fwd, bwd;
    SplitHalves(d_alpha_states, m, fwd, bwd);
    BackpropGru(GruView::Of(p, param::kAlphaForward), trace.alpha_forward, fwd,
                p, param::kAlphaForward, d_inputs);
    BackpropGru(GruView::Of(p, param::kAlphaBackward), trace.alpha_backward, bwd,
                p, param::kAlphaBackward, d_inputs);
    SplitHalves(d_beta_states, m, fwd, bwd);
    BackpropGru(GruView::Of(p, param::kBetaForward), trace.beta_forward, fwd, p,
                param::kBetaForward, d_inputs);
    BackpropGru(GruView::Of(p, param::kBetaBackward), trace.beta_backward, bwd,
                p, param::kBetaBackward, d_inputs);
  } else {
    BackpropGru(GruView::Of(p, param::kAlphaBackward), trace.alpha_backward,
                d_alpha_states, p, param::kAlphaBackward, d_inputs);
    BackpropGru(GruView::Of(p, param::kBetaBackward), trace.beta_backward,
                d_beta_states, p, param::kBetaBackward, d_inputs);
  }

  // Time channels are constants; only the first m input rows reach the
  // embedding.
  AccumulateEmbeddingGrad(p.MutableGrad(model.attention_embedding()),
                          trace.codes, d_inputs, m);
  AccumulateEmbeddingGrad(p.MutableGrad(model.value_embedding()), trace.codes,
                          d_value, m);
}

void GruBackward(const ForwardTrace& trace, double score_grad, Model& model) {
  ParamStore& p = model.params();
  const int length = trace.length();
  const Eigen::VectorXd& last = trace.alpha_forward.state(length - 1);
  p.MutableGrad(param::kOutput).AsVector() += score_grad * last;
  p.MutableGrad(param::kOutputBias)[0] += score_grad;

  std::vector<Eigen::VectorXd> state_grads(
      length, Eigen::VectorXd::Zero(model.hidden()));
  state_grads[length - 1] = score_grad * p.value(param::kOutput).AsVector();
  std::vector<Eigen::VectorXd> d_inputs(
      length, Eigen::VectorXd::Zero(model.hidden()));
  BackpropGru(GruView::Of(p, param::kGru), trace.alpha_forward, state_grads, p,
              param::kGru, d_inputs);
  AccumulateEmbeddingGrad(p.MutableGrad(param::kEmbedding), trace.codes,
                          d_inputs, model.hidden());
}

}  // namespace

std::string_view VariantName(Variant variant) {
  switch (variant) {
    case Variant::kRetainEx:
      return "retainex";
    case Variant::kRetainExNoTime:
      return "retainex-no-time";
    case Variant::kRetainOriginal:
      return "retain";
    case Variant::kGruBaseline:
      return "gru";
  }
  return "retainex";
}

Variant ParseVariant(std::string_view name) {
  for (const Variant v : AllVariants()) {
    if (VariantName(v) == name) return v;
  }
  throw ArgumentError("unknown model variant '" + std::string(name) + "'");
}

std::vector<Variant> AllVariants() {
  return {Variant::kGruBaseline, Variant::kRetainOriginal,
          Variant::kRetainExNoTime, Variant::kRetainEx};
}

nlohmann::json Hyperparams::ToJson() const {
  return {{"hidden", hidden},   {"learning_rate", learning_rate},
          {"epochs", epochs},   {"seed", seed},
          {"variant", VariantName(variant)},
          {"beta_tanh", beta_tanh}};
}

Hyperparams Hyperparams::FromJson(const nlohmann::json& object) {
  Hyperparams h;
  try {
    h.hidden = object.value("hidden", h.hidden);
    h.learning_rate = object.value("learning_rate", h.learning_rate);
    h.epochs = object.value("epochs", h.epochs);
    h.seed = object.value("seed", h.seed);
    h.variant = ParseVariant(
        object.value("variant", std::string(VariantName(h.variant))));
    h.beta_tanh = object.value("beta_tanh", h.beta_tanh);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("hyperparameters: ") + e.what());
  }
  if (h.hidden < 1) throw ArgumentError("hidden size must be at least 1");
  if (h.epochs < 0) throw ArgumentError("epochs must be non-negative");
  return h;
}

const char* Model::attention_embedding() const {
  return variant_ == Variant::kRetainEx || variant_ == Variant::kRetainExNoTime
             ? param::kEmbeddingA
             : param::kEmbedding;
}

const char* Model::value_embedding() const {
  return variant_ == Variant::kRetainEx || variant_ == Variant::kRetainExNoTime
             ? param::kEmbeddingB
             : param::kEmbedding;
}

int Model::rnn_input_width() const {
  return hidden_ + (uses_time_features() ? kNumTimeFeatures : 0);
}

int Model::attention_state_width() const {
  return bidirectional() ? 2 * hidden_ : hidden_;
}

std::vector<std::pair<std::string, std::vector<int>>> Model::ExpectedShapes()
    const {
  const int m = hidden_;
  const int in = rnn_input_width();
  std::vector<std::pair<std::string, std::vector<int>>> shapes;
  const auto gru = [&shapes, m](const char* prefix, int input) {
    shapes.push_back({Join(prefix, "W"), {3 * m, input}});
    shapes.push_back({Join(prefix, "U"), {3 * m, m}});
    shapes.push_back({Join(prefix, "b"), {3 * m}});
  };
  switch (variant_) {
    case Variant::kRetainEx:
    case Variant::kRetainExNoTime:
      shapes.push_back({param::kEmbeddingA, {m, num_codes_}});
      shapes.push_back({param::kEmbeddingB, {m, num_codes_}});
      gru(param::kAlphaForward, in);
      gru(param::kAlphaBackward, in);
      gru(param::kBetaForward, in);
      gru(param::kBetaBackward, in);
      shapes.push_back({param::kAlphaWeights, {2 * m}});
      shapes.push_back({param::kBetaWeights, {m, 2 * m}});
      shapes.push_back({param::kOutput, {m}});
      break;
    case Variant::kRetainOriginal:
      shapes.push_back({param::kEmbedding, {m, num_codes_}});
      gru(param::kAlphaBackward, in);
      gru(param::kBetaBackward, in);
      shapes.push_back({param::kAlphaWeights, {m}});
      shapes.push_back({param::kBetaWeights, {m, m}});
      shapes.push_back({param::kOutput, {m}});
      break;
    case Variant::kGruBaseline:
      shapes.push_back({param::kEmbedding, {m, num_codes_}});
      gru(param::kGru, m);
      shapes.push_back({param::kOutput, {m}});
      shapes.push_back({param::kOutputBias, {1}});
      break;
  }
  return shapes;
}

Model Model::Initialize(Variant variant, int hidden, int num_codes,
                        bool beta_tanh, std::uint64_t seed) {
  if (hidden < 1) throw ArgumentError("hidden size must be at least 1");
  if (num_codes < 1) throw ArgumentError("vocabulary must be non-empty");
  Model model(variant, hidden, num_codes, beta_tanh);
  SeededRng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (const auto& [name, shape] : model.ExpectedShapes()) {
    Tensor t(shape);
    for (double& v : t.values()) v = rng.Uniform(-scale, scale);
    model.params_.Add(name, std::move(t));
  }
  return model;
}

Model Model::Initialize(const Hyperparams& hyperparams, int num_codes) {
  return Initialize(hyperparams.variant, hyperparams.hidden, num_codes,
                    hyperparams.beta_tanh, hyperparams.seed);
}

Model Model::FromParams(Variant variant, int hidden, int num_codes,
                        bool beta_tanh, ParamStore params) {
  Model model(variant, hidden, num_codes, beta_tanh);
  const auto expected = model.ExpectedShapes();
  if (expected.size() != params.names().size()) {
    throw ArgumentError("parameter count does not match the model layout");
  }
  for (const auto& [name, shape] : expected) {
    if (!params.Contains(name)) {
      throw ArgumentError("missing parameter " + name);
    }
    if (params.value(name).shape() != shape) {
      throw ArgumentError("parameter " + name + " has the wrong shape");
    }
  }
  model.params_ = std::move(params);
  return model;
}

Eigen::VectorXd EmbedVisit(const Tensor& embedding, const std::vector<int>& codes) {
  const int rows = embedding.rows();
  const int cols = embedding.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(rows);
  const double* w = embedding.data();
  for (const int c : codes) {
    for (int i = 0; i < rows; ++i) v[i] += w[static_cast<std::size_t>(i) * cols + c];
  }
  return v;
}

std::vector<Eigen::VectorXd> EmbedVisits(const Tensor& embedding,
                                         const EncodedSequence& encoded) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(encoded.active.size());
  for (const auto& codes : encoded.active) out.push_back(EmbedVisit(embedding, codes));
  return out;
}

Eigen::VectorXd AlphaAttention(const std::vector<Eigen::VectorXd>& states,
                               const Eigen::VectorXd& w_alpha,
                               Eigen::VectorXd* logits) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(states.size()));
  for (std::size_t t = 0; t < states.size(); ++t) e[t] = w_alpha.dot(states[t]);
  Eigen::VectorXd alpha = Softmax(e);
  if (logits != nullptr) *logits = std::move(e);
  return alpha;
}

std::vector<Eigen::VectorXd> BetaAttention(
    const std::vector<Eigen::VectorXd>& states, const ConstMatrixMap& w_beta,
    bool beta_tanh, std::vector<Eigen::VectorXd>* pre_activation) {
  std::vector<Eigen::VectorXd> beta;
  beta.reserve(states.size());
  if (pre_activation != nullptr) pre_activation->clear();
  for (const Eigen::VectorXd& state : states) {
    Eigen::VectorXd q = w_beta * state;
    beta.push_back(beta_tanh ? Eigen::VectorXd(q.array().tanh()) : q);
    if (pre_activation != nullptr) pre_activation->push_back(std::move(q));
  }
  return beta;
}

ForwardTrace Forward(const Model& model, const EncodedSequence& encoded) {
  CheckInput(model, encoded);
  return model.is_attention_model() ? AttentionForward(model, encoded)
                                    : GruForward(model, encoded);
}

ForwardTrace BaselineRetainForward(const Model& model,
                                   const EncodedSequence& encoded) {
  if (model.variant() != Variant::kRetainOriginal) {
    throw UnsupportedError("model is not the original RETAIN variant");
  }
  return Forward(model, encoded);
}

double BaselineGruForward(const Model& model, const EncodedSequence& encoded) {
  if (model.variant() != Variant::kGruBaseline) {
    throw UnsupportedError("model is not the GRU baseline");
  }
  return Forward(model, encoded).prediction;
}

double ScoreFromTrace(const Model& model, const ForwardTrace& trace) {
  if (!model.is_attention_model()) {
    throw UnsupportedError("the GRU baseline has no attention trace");
  }
  return model.params().value(param::kOutput).AsVector().dot(ContextVector(trace));
}

double Loss(double prediction, int label) {
  const double p = std::clamp(prediction, kPredictionClamp, 1.0 - kPredictionClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double LossScoreGradient(double prediction, int label) {
  if (prediction < kPredictionClamp || prediction > 1.0 - kPredictionClamp) {
    return 0.0;
  }
  return prediction - static_cast<double>(label);
}

void Backward(const ForwardTrace& trace, double score_grad, Model& model) {
  if (trace.variant != model.variant()) {
    throw ArgumentError("trace and model variants differ");
  }
  if (model.is_attention_model()) {
    AttentionBackward(trace, score_grad, model);
  } else {
    GruBackward(trace, score_grad, model);
  }
}

double BatchLoss(Model& model, const std::vector<const EncodedSequence*>& inputs,
                 const std::vector<int>& labels, bool with_gradient) {
  if (inputs.empty() || inputs.size() != labels.size()) {
    throw ArgumentError("batch inputs and labels must be non-empty and aligned");
  }
  if (with_gradient) {
    model.params().ZeroGrad();
    for (const std::string& name : model.params().names()) {
      model.params().MutableGrad(name);
    }
  }
  const double scale = 1.0 / static_cast<double>(inputs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ForwardTrace trace = Forward(model, *inputs[i]);
    total += Loss(trace.prediction, labels[i]);
    if (with_gradient) {
      Backward(trace, scale * LossScoreGradient(trace.prediction, labels[i]),
               model);
    }
  }
  return total * scale;
}

}  // namespace retainex
