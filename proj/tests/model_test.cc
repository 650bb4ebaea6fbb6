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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "retainex/batching.h"
#include "retainex/checkpoint.h"
#include "retainex/cohort_generator.h"
#include "retainex/error.h"
#include "retainex/experiment.h"
#include "retainex/gradient_check.h"
#include "retainex/model.h"
#include "retainex/trainer.h"
#include "test_support.h"

namespace retainex {

// Readable parameter names in test listings.
void PrintTo(Variant v, std::ostream* os) { *os << VariantName(v); }

namespace {

using testing::OracleForward;
using testing::OracleOutput;
using testing::RandomModel;
using testing::RandomSequence;

class VariantTest : public ::testing::TestWithParam<Variant> {};

INSTANTIATE_TEST_SUITE_P(AllVariants, VariantTest, ::testing::ValuesIn(AllVariants()),
                         [](const auto& info) {
                           std::string name(VariantName(info.param));
                           std::replace(name.begin(), name.end(), '-', '_');
                           return name;
                         });

TEST_P(VariantTest, ForwardMatchesScalarOracle) {
  for (const bool beta_tanh : {true, false}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      SeededRng rng(seed);
      const Model model = RandomModel(GetParam(), 5, 12, seed, 0.8, beta_tanh);
      const EncodedSequence x = RandomSequence(rng, 12, rng.UniformInt(1, 9));
      const ForwardTrace trace = Forward(model, x);
      const OracleOutput want = OracleForward(model, x);
      EXPECT_NEAR(trace.score, want.score, 1e-12);
      EXPECT_NEAR(trace.prediction, want.prediction, 1e-14);
      if (!model.is_attention_model()) continue;
      for (int t = 0; t < x.length(); ++t) {
        EXPECT_NEAR(trace.alpha[t], want.alpha[t], 1e-13);
        for (int i = 0; i < model.hidden(); ++i) {
          EXPECT_NEAR(trace.beta[t][i], want.beta[t][i], 1e-13);
        }
      }
    }
  }
}

TEST_P(VariantTest, AlphaIsADistribution) {
  const Model model = RandomModel(GetParam(), 6, 12, 3, 2.0);
  if (!model.is_attention_model()) GTEST_SKIP() << "no attention";
  SeededRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const ForwardTrace trace = Forward(model, RandomSequence(rng, 12, rng.UniformInt(1, 30)));
    EXPECT_NEAR(trace.alpha.sum(), 1.0, 1e-12);
    EXPECT_GE(trace.alpha.minCoeff(), 0.0);
  }
}

TEST_P(VariantTest, ScoreFromTraceReproducesScore) {
  const Model model = RandomModel(GetParam(), 4, 12, 8);
  if (!model.is_attention_model()) GTEST_SKIP() << "no attention";
  SeededRng rng(8);
  const ForwardTrace trace = Forward(model, RandomSequence(rng, 12, 7));
  EXPECT_EQ(ScoreFromTrace(model, trace), trace.score);
}

// Mean cross-entropy over three patients, m = 4, C = 12, T = 5.
TEST_P(VariantTest, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Model model = Model::Initialize(GetParam(), 4, 12, true, seed);
    SeededRng rng(seed + 100);
    std::vector<EncodedSequence> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(RandomSequence(rng, 12, 5));
    std::vector<const EncodedSequence*> inputs;
    for (const auto& x : xs) inputs.push_back(&x);
    const std::vector<int> labels = {1, 0, 0};
    const GradientCheckResult r = FiniteDiffCheck(
        [&](ParamStore&, bool g) { return BatchLoss(model, inputs, labels, g); },
        model.params());
    EXPECT_LE(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
  }
}

TEST_P(VariantTest, RejectsEmptyAndMismatchedInput) {
  const Model model = Model::Initialize(GetParam(), 4, 12, true, 1);
  EncodedSequence empty;
  empty.num_codes = 12;
  EXPECT_THROW(Forward(model, empty), ArgumentError);
  SeededRng rng(1);
  EXPECT_THROW(Forward(model, RandomSequence(rng, 13, 3)), ArgumentError);
}

TEST(ModelTest, ParameterLayoutPerVariant) {
  const Model ex = Model::Initialize(Variant::kRetainEx, 8, 12, true, 1);
  EXPECT_EQ(ex.params().value("emb_a").shape(), (std::vector<int>{8, 12}));
  EXPECT_EQ(ex.params().value("alpha_fwd.W").shape(), (std::vector<int>{24, 11}));
  EXPECT_EQ(ex.params().value("W_beta").shape(), (std::vector<int>{8, 16}));
  EXPECT_FALSE(ex.params().Contains("b_out"));
  const Model no_time = Model::Initialize(Variant::kRetainExNoTime, 8, 12, true, 1);
  EXPECT_EQ(no_time.params().value("alpha_fwd.W").shape(), (std::vector<int>{24, 8}));
  const Model retain = Model::Initialize(Variant::kRetainOriginal, 8, 12, true, 1);
  EXPECT_FALSE(retain.params().Contains("alpha_fwd.W"));
  EXPECT_EQ(retain.params().value("W_beta").shape(), (std::vector<int>{8, 8}));
  const Model gru = Model::Initialize(Variant::kGruBaseline, 8, 12, true, 1);
  EXPECT_TRUE(gru.params().Contains("b_out"));
}

TEST(ModelTest, InitializationIsSeededAndBounded) {
  const Model a = Model::Initialize(Variant::kRetainEx, 16, 12, true, 5);
  const Model b = Model::Initialize(Variant::kRetainEx, 16, 12, true, 5);
  const Model c = Model::Initialize(Variant::kRetainEx, 16, 12, true, 6);
  EXPECT_EQ(a.params().value("emb_b"), b.params().value("emb_b"));
  EXPECT_NE(a.params().value("emb_b"), c.params().value("emb_b"));
  for (double v : a.params().value("W_beta").values()) EXPECT_LE(std::abs(v), 0.25);
}

TEST(ModelTest, FromParamsRejectsMissingTensor) {
  const Model a = Model::Initialize(Variant::kRetainEx, 4, 12, true, 5);
  ParamStore partial;
  for (const std::string& name : a.params().names()) {
    if (name != "w_out") partial.Add(name, a.params().value(name));
  }
  EXPECT_THROW(Model::FromParams(Variant::kRetainEx, 4, 12, true, partial), ArgumentError);
}

TEST(ModelTest, LossClampsAndGradientVanishesWhenClamped) {
  EXPECT_NEAR(Loss(0.8, 1), -std::log(0.8), 1e-15);
  EXPECT_NEAR(Loss(0.8, 0), -std::log(0.2), 1e-15);
  EXPECT_NEAR(Loss(0.0, 1), -std::log(kPredictionClamp), 1e-9);
  EXPECT_NEAR(LossScoreGradient(0.8, 1), -0.2, 1e-15);
  EXPECT_EQ(LossScoreGradient(0.0, 1), 0.0);
}

Dataset TinyCohort(int groups = 40) {
  GeneratorConfig config;
  config.n_case_groups = groups;
  config.controls_per_case = 4;
  config.vocabulary = {30, 30, 30};
  config.num_default_risk_codes = 9;
  return GenerateCohort(config);
}

TEST(TrainerTest, DeterministicAndBestEpochRestored) {
  const DatasetSplit split = SplitDataset(TinyCohort(), SplitRatios{}, 1);
  Hyperparams h;
  h.hidden = 6;
  h.epochs = 3;
  h.learning_rate = 0.01;
  const TrainResult a = Train(split.train, split.validation, h);
  const TrainResult b = Train(split.train, split.validation, h);
  for (const std::string& name : a.model.params().names()) {
    EXPECT_EQ(a.model.params().value(name), b.model.params().value(name)) << name;
  }
  EXPECT_EQ(a.history.ToJson(false), b.history.ToJson(false));
  ASSERT_EQ(a.history.epochs.size(), 3u);
  // The returned model scores the recorded best validation AUC.
  if (a.history.best_epoch > 0) {
    const double auc = EvaluateModel(a.model, split.validation).auc;
    EXPECT_EQ(auc, a.history.best_validation_auc);
  }
}

TEST(TrainerTest, TrainingLossDecreases) {
  const DatasetSplit split = SplitDataset(TinyCohort(), SplitRatios{}, 1);
  Hyperparams h;
  h.hidden = 8;
  h.epochs = 4;
  h.learning_rate = 0.01;
  const TrainResult r = Train(split.train, split.validation, h);
  EXPECT_LT(r.history.epochs.back().train_loss, r.history.epochs.front().train_loss);
}

TEST(TrainerTest, HistoryJsonRoundTrip) {
  TrainingHistory h;
  h.epochs = {{1, 0.5, 0.6, 1.25}, {2, 0.4, 0.7, 1.5}};
  h.best_epoch = 2;
  h.best_validation_auc = 0.7;
  EXPECT_EQ(TrainingHistory::FromJson(h.ToJson()).ToJson(), h.ToJson());
  EXPECT_FALSE(h.ToJson(false)["epochs"][0].contains("seconds"));
}

std::string TempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "retainex_model_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

Checkpoint MakeCheckpoint(Variant variant) {
  Checkpoint c{RandomModel(variant, 5, 12, 2), {}, testing::SmallVocabulary().Fingerprint(), {}};
  c.history.epochs = {{1, 0.6, 0.7, 0.0}};
  c.history.best_epoch = 1;
  c.history.best_validation_auc = 0.7;
  return c;
}

TEST_P(VariantTest, CheckpointRoundTripIsBitwise) {
  const Checkpoint c = MakeCheckpoint(GetParam());
  const std::string path = TempPath(std::string(VariantName(GetParam())) + ".ckpt");
  SaveCheckpoint(c, path);
  const CodeVocabulary vocab = testing::SmallVocabulary();
  const Checkpoint back = LoadCheckpoint(path, &vocab);
  EXPECT_EQ(back.model.variant(), GetParam());
  for (const std::string& name : c.model.params().names()) {
    const Tensor& a = c.model.params().value(name);
    const Tensor& b = back.model.params().value(name);
    ASSERT_EQ(a.shape(), b.shape());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0) << name;
  }
  EXPECT_EQ(SerializeCheckpoint(back), SerializeCheckpoint(c));
}

TEST(CheckpointTest, TamperedVersionAndTruncationRejected) {
  std::string bytes = SerializeCheckpoint(MakeCheckpoint(Variant::kRetainEx));
  std::string tampered = bytes;
  const std::size_t at = tampered.find("\"version\":1");
  ASSERT_NE(at, std::string::npos);
  tampered.replace(at, 11, "\"version\":2");
  EXPECT_THROW(DeserializeCheckpoint(tampered), ParseError);
  EXPECT_THROW(DeserializeCheckpoint(bytes.substr(0, bytes.size() - 8)), ParseError);
  EXPECT_THROW(DeserializeCheckpoint("not a checkpoint"), ParseError);
}

TEST(CheckpointTest, VocabularyMismatchRejected) {
  const std::string path = TempPath("mismatch.ckpt");
  SaveCheckpoint(MakeCheckpoint(Variant::kRetainEx), path);
  const CodeVocabulary other = BuildVocabulary({4, 4, 5});
  EXPECT_THROW(LoadCheckpoint(path, &other), DataError);
  EXPECT_THROW(LoadCheckpoint(TempPath("absent.ckpt")), IoError);
}

TEST(CheckpointTest, SizeMatchesShapeArithmetic) {
  const Model model = Model::Initialize(Variant::kRetainEx, 64, 1400, true, 1);
  const std::string bytes = SerializeCheckpoint({model, {}, 0, {}});
  const std::size_t newline = bytes.find('\n');
  const std::size_t payload = bytes.size() - newline - 1;
  // Two m x C embeddings, four GRUs over m + 3 inputs, w_alpha, W_beta, w_out.
  const std::size_t m = 64, c = 1400, in = m + 3;
  const std::size_t scalars =
      2 * m * c + 4 * (3 * m * in + 3 * m * m + 3 * m) + 2 * m + m * 2 * m + m;
  EXPECT_EQ(payload, 8 * scalars);
  EXPECT_GT(payload, 2 * m * c * 8);
}

}  // namespace
}  // namespace retainex
