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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "retainex/checkpoint.h"
#include "retainex/dataset_io.h"
#include "retainex/trainer.h"

namespace retainex {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "retainex");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("retainex_cli_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  void Generate(const std::string& name, int groups = 12) {
    ASSERT_EQ(Cli({"generate", "--out", P(name), "--groups", std::to_string(groups),
                   "--seed", "5"}),
              kExitOk);
  }
  void TrainSmall(const std::string& data, const std::string& out,
                  const std::string& variant = "retainex") {
    ASSERT_EQ(Cli({"train", "--dataset", P(data), "--out", P(out), "--variant", variant,
                   "--hidden", "4", "--epochs", "3", "--learning-rate", "0.01"}),
              kExitOk);
  }

  fs::path dir_;
};

TEST_F(CliTest, GenerateTrainProjectAreDeterministic) {
  Generate("a.json");
  Generate("b.json");
  EXPECT_EQ(Slurp(P("a.json")), Slurp(P("b.json")));
  TrainSmall("a.json", "a.ckpt");
  TrainSmall("a.json", "b.ckpt");
  EXPECT_EQ(Slurp(P("a.ckpt")), Slurp(P("b.ckpt")));
  for (const std::string out : {"p1.json", "p2.json"}) {
    ASSERT_EQ(Cli({"project", "--dataset", P("a.json"), "--checkpoint", P("a.ckpt"),
                   "--iterations", "300", "--out", P(out)}),
              kExitOk);
  }
  EXPECT_EQ(Slurp(P("p1.json")), Slurp(P("p2.json")));
  const Json projection = Json::parse(Slurp(P("p1.json")));
  EXPECT_EQ(projection["ids"].size(), ReadDataset(P("a.json")).patients.size());
  EXPECT_EQ(projection["points"].size(), projection["ids"].size());
}

TEST_F(CliTest, GenerateSeedChangesTheCohort) {
  Generate("a.json");
  ASSERT_EQ(Cli({"generate", "--out", P("b.json"), "--groups", "12", "--seed", "6"}),
            kExitOk);
  EXPECT_NE(Slurp(P("a.json")), Slurp(P("b.json")));
}

TEST_F(CliTest, EvaluateCheckpointReproducesValidationAuc) {
  Generate("d.json", 30);
  TrainSmall("d.json", "m.ckpt");
  ASSERT_EQ(Cli({"evaluate", "--dataset", P("d.json"), "--checkpoint", P("m.ckpt"),
                 "--format", "json", "--out", P("r.json")}),
            kExitOk);
  const Json report = Json::parse(Slurp(P("r.json")));
  ASSERT_EQ(report["rows"].size(), 1u);
  const Json history = Json::parse(Slurp(P("m.ckpt.history.json")));
  const Checkpoint checkpoint = LoadCheckpoint(P("m.ckpt"));
  EXPECT_EQ(report["rows"][0]["best_epoch"], checkpoint.history.best_epoch);
  if (checkpoint.history.best_epoch > 0) {
    EXPECT_NEAR(report["rows"][0]["validation_auc"].get<double>(),
                checkpoint.history.best_validation_auc, 1e-12);
  }
  EXPECT_GT(report["rows"][0]["seconds_per_epoch"].get<double>(), 0.0);
  EXPECT_EQ(history["epochs"].size(), 3u);
}

TEST_F(CliTest, EvaluateVariantsWritesOneRowEach) {
  Generate("d.json", 20);
  ASSERT_EQ(Cli({"evaluate", "--dataset", P("d.json"), "--variants",
                 "gru,retain,retainex-no-time,retainex", "--hidden", "4", "--epochs", "2",
                 "--format", "csv", "--out", P("r.csv")}),
            kExitOk);
  const std::string csv = Slurp(P("r.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  for (const char* name : {"gru", "retain", "retainex-no-time"}) {
    EXPECT_NE(csv.find(name), std::string::npos) << name;
  }
}

TEST_F(CliTest, ExitCodes) {
  Generate("d.json");
  EXPECT_EQ(Cli({}), kExitUsageError);
  EXPECT_EQ(Cli({"frobnicate"}), kExitUsageError);
  EXPECT_EQ(Cli({"train", "--dataset", P("d.json")}), kExitUsageError);
  EXPECT_EQ(Cli({"train", "--dataset", P("d.json"), "--out", P("m.ckpt"), "--variant",
                 "lstm"}),
            kExitUsageError);
  EXPECT_EQ(Cli({"train", "--dataset", P("d.json"), "--out", P("m.ckpt"), "--hidden",
                 "-3"}),
            kExitUsageError);
  EXPECT_EQ(Cli({"evaluate", "--dataset", P("d.json")}), kExitUsageError);
  // A corrupt dataset is a validation failure; a missing one is an I/O failure.
  std::ofstream(P("bad.json")) << "{\"patients\": 3}";
  EXPECT_EQ(Cli({"train", "--dataset", P("bad.json"), "--out", P("m.ckpt")}),
            kExitUsageError);
  EXPECT_EQ(Cli({"train", "--dataset", P("missing.json"), "--out", P("m.ckpt")}),
            kExitRuntimeError);
  EXPECT_EQ(Cli({"generate", "--out", P("no/such/dir/d.json")}), kExitRuntimeError);
  EXPECT_FALSE(fs::exists(P("m.ckpt")));
}

TEST_F(CliTest, ProjectRejectsGruAndOversizedTsne) {
  Generate("d.json");
  TrainSmall("d.json", "g.ckpt", "gru");
  EXPECT_EQ(Cli({"project", "--dataset", P("d.json"), "--checkpoint", P("g.ckpt")}),
            kExitUsageError);
  TrainSmall("d.json", "m.ckpt");
  EXPECT_EQ(Cli({"project", "--dataset", P("d.json"), "--checkpoint", P("m.ckpt"),
                 "--max-points", "5"}),
            kExitUsageError);
  EXPECT_EQ(Cli({"project", "--dataset", P("d.json"), "--checkpoint", P("m.ckpt"),
                 "--method", "pca", "--max-points", "5", "--out", P("p.json")}),
            kExitOk);
}

}  // namespace
}  // namespace retainex
