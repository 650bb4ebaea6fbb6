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

#ifndef RETAINEX_MODEL_H_
#define RETAINEX_MODEL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "retainex/gru.h"
#include "retainex/param_store.h"
#include "retainex/patient.h"
#include "retainex/time_features.h"

namespace retainex {

enum class Variant {
  // Two embeddings, two bidirectional GRUs, time features on the attention
  // inputs.
  kRetainEx,
  // As kRetainEx without the three time channels.
  kRetainExNoTime,
  // One shared embedding, two reverse-time unidirectional GRUs, no time.
  kRetainOriginal,
  // A single GRU read out from its final state.
  kGruBaseline,
};

std::string_view VariantName(Variant variant);  // retainex, retainex-no-time,
                                                // retain, gru
Variant ParseVariant(std::string_view name);    // ArgumentError if unknown
std::vector<Variant> AllVariants();

struct Hyperparams {
  int hidden = 64;
  double learning_rate = 0.001;
  int epochs = 10;
  std::uint64_t seed = 1;
  Variant variant = Variant::kRetainEx;
  // tanh on the beta projection; off gives the purely linear form.
  bool beta_tanh = true;

  nlohmann::json ToJson() const;
  static Hyperparams FromJson(const nlohmann::json& object);
};

// Parameter names used in the ParamStore.
namespace param {
inline constexpr const char* kEmbeddingA = "emb_a";
inline constexpr const char* kEmbeddingB = "emb_b";
inline constexpr const char* kEmbedding = "emb";
inline constexpr const char* kAlphaForward = "alpha_fwd";
inline constexpr const char* kAlphaBackward = "alpha_bwd";
inline constexpr const char* kBetaForward = "beta_fwd";
inline constexpr const char* kBetaBackward = "beta_bwd";
inline constexpr const char* kGru = "gru";
inline constexpr const char* kAlphaWeights = "w_alpha";
inline constexpr const char* kBetaWeights = "W_beta";
inline constexpr const char* kOutput = "w_out";
inline constexpr const char* kOutputBias = "b_out";
}  // namespace param

class Model {
 public:
  // Uniform initialization in [-1/sqrt(m), 1/sqrt(m)] from a seeded stream.
  static Model Initialize(Variant variant, int hidden, int num_codes,
                          bool beta_tanh, std::uint64_t seed);
  static Model Initialize(const Hyperparams& hyperparams, int num_codes);
  // Adopts existing parameters; throws ArgumentError if a tensor is missing
  // or misshaped for the layout.
  static Model FromParams(Variant variant, int hidden, int num_codes,
                          bool beta_tanh, ParamStore params);

  Variant variant() const { return variant_; }
  int hidden() const { return hidden_; }
  int num_codes() const { return num_codes_; }
  bool beta_tanh() const { return beta_tanh_; }

  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  bool is_attention_model() const { return variant_ != Variant::kGruBaseline; }
  bool uses_time_features() const { return variant_ == Variant::kRetainEx; }
  bool bidirectional() const {
    return variant_ == Variant::kRetainEx ||
           variant_ == Variant::kRetainExNoTime;
  }
  // Embedding feeding the attention RNNs, and the one multiplied by the
  // attention weights. The same matrix for kRetainOriginal.
  const char* attention_embedding() const;
  const char* value_embedding() const;
  int rnn_input_width() const;
  int attention_state_width() const;

 private:
  Model(Variant variant, int hidden, int num_codes, bool beta_tanh)
      : variant_(variant),
        hidden_(hidden),
        num_codes_(num_codes),
        beta_tanh_(beta_tanh) {}
  std::vector<std::pair<std::string, std::vector<int>>> ExpectedShapes() const;

  Variant variant_;
  int hidden_;
  int num_codes_;
  bool beta_tanh_;
  ParamStore params_;
};

// Cached intermediates of one forward pass over one patient.
struct ForwardTrace {
  Variant variant = Variant::kRetainEx;
  bool beta_tanh = true;
  std::vector<std::vector<int>> codes;  // active codes per visit
  std::vector<int> days;
  TimeFeatures time;

  std::vector<Eigen::VectorXd> v_a;  // attention inputs (time appended)
  std::vector<Eigen::VectorXd> v_b;  // value embeddings

  // Attention variants: alpha/beta RNN runs (forward runs unused for the
  // reverse-only kRetainOriginal). kGruBaseline keeps its single run in
  // alpha_forward.
  GruRun alpha_forward, alpha_backward, beta_forward, beta_backward;
  std::vector<Eigen::VectorXd> alpha_states;  // [g^f; g^b] (or g)
  std::vector<Eigen::VectorXd> beta_states;   // [h^f; h^b] (or h)

  Eigen::VectorXd e;
  Eigen::VectorXd alpha;
  std::vector<Eigen::VectorXd> beta_pre;
  std::vector<Eigen::VectorXd> beta;
  Eigen::VectorXd context;  // o

  double score = 0.0;       // s
  double prediction = 0.5;  // y_hat = sigmoid(s)

  int length() const { return static_cast<int>(codes.size()); }
};

// v_t = W x_t: sum of the columns of `embedding` (m x C) at the active codes.
Eigen::VectorXd EmbedVisit(const Tensor& embedding, const std::vector<int>& codes);
std::vector<Eigen::VectorXd> EmbedVisits(const Tensor& embedding,
                                         const EncodedSequence& encoded);

// e_t = w . state_t; returns softmax(e) and writes e when requested.
Eigen::VectorXd AlphaAttention(const std::vector<Eigen::VectorXd>& states,
                               const Eigen::VectorXd& w_alpha,
                               Eigen::VectorXd* logits = nullptr);
// beta_t = W_beta state_t, then tanh when enabled.
std::vector<Eigen::VectorXd> BetaAttention(
    const std::vector<Eigen::VectorXd>& states, const ConstMatrixMap& w_beta,
    bool beta_tanh, std::vector<Eigen::VectorXd>* pre_activation = nullptr);

// Dispatches on the model variant. Throws ArgumentError when T = 0 or the
// sequence was encoded against a different code count.
ForwardTrace Forward(const Model& model, const EncodedSequence& encoded);
ForwardTrace BaselineRetainForward(const Model& model,
                                   const EncodedSequence& encoded);
double BaselineGruForward(const Model& model, const EncodedSequence& encoded);

// s recomputed from the cached alpha, beta and v_b with the forward's order of
// operations (attention variants only).
double ScoreFromTrace(const Model& model, const ForwardTrace& trace);

inline constexpr double kPredictionClamp = 1e-12;

// Binary cross-entropy with y_hat clamped into [1e-12, 1 - 1e-12].
double Loss(double prediction, int label);
// d(Loss)/d(score); zero where the clamp is active.
double LossScoreGradient(double prediction, int label);

// Accumulates d(objective)/d(param) into model.params() gradients, given
// d(objective)/d(score) for this trace. Time features are constants.
void Backward(const ForwardTrace& trace, double score_grad, Model& model);

// Mean loss over the patients; when `with_gradient`, gradients of that mean
// are accumulated into the model (after zeroing).
double BatchLoss(Model& model, const std::vector<const EncodedSequence*>& inputs,
                 const std::vector<int>& labels, bool with_gradient);

}  // namespace retainex

#endif  // RETAINEX_MODEL_H_
