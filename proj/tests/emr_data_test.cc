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
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "gtest/gtest.h"
#include "retainex/batching.h"
#include "retainex/cohort_generator.h"
#include "retainex/dataset_io.h"
#include "retainex/error.h"
#include "retainex/patient.h"
#include "retainex/time_features.h"
#include "retainex/vocabulary.h"
#include "test_support.h"

namespace retainex {
namespace {

namespace fs = std::filesystem;
using testing::MakeRecord;
using testing::OracleTimeFeatures;
using testing::SmallVocabulary;

std::string TempPath(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "retainex_emr_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

GeneratorConfig SmallConfig(std::uint64_t seed = 7) {
  GeneratorConfig config;
  config.n_case_groups = 30;
  config.seed = seed;
  return config;
}

TEST(VocabularyTest, DefaultLayoutHas1400Codes) {
  const CodeVocabulary v = BuildVocabulary();
  EXPECT_EQ(v.size(), 1400);
  EXPECT_EQ(v.CountOfKind(CodeKind::kDiagnosis), 268);
  EXPECT_EQ(v.CountOfKind(CodeKind::kTreatment), 500);
  EXPECT_EQ(v.CountOfKind(CodeKind::kPrescription), 632);
  // Kinds are laid out in contiguous id blocks.
  EXPECT_EQ(v.kind(267), CodeKind::kDiagnosis);
  EXPECT_EQ(v.kind(268), CodeKind::kTreatment);
  EXPECT_EQ(v.kind(768), CodeKind::kPrescription);
}

TEST(VocabularyTest, JsonRoundTripKeepsFingerprint) {
  const CodeVocabulary v = SmallVocabulary();
  const CodeVocabulary back = CodeVocabulary::FromJson(v.ToJson());
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.Fingerprint(), v.Fingerprint());
  EXPECT_NE(BuildVocabulary({4, 4, 5}).Fingerprint(), v.Fingerprint());
}

TEST(VocabularyTest, RejectsDuplicateLabelsAndGaps) {
  EXPECT_THROW(CodeVocabulary({{0, "A", CodeKind::kDiagnosis},
                               {1, "A", CodeKind::kTreatment}}),
               ArgumentError);
  EXPECT_THROW(CodeVocabulary({{0, "A", CodeKind::kDiagnosis},
                               {2, "B", CodeKind::kTreatment}}),
               ArgumentError);
}

TEST(TimeFeaturesTest, MatchesOracleWithFlooredGaps) {
  const std::vector<int> days = {3, 3, 10, 200};
  const TimeFeatures f = ComputeTimeFeatures(days);
  const double dts[] = {1.0, 1.0, 7.0, 190.0};
  for (int t = 0; t < 4; ++t) {
    const auto want = OracleTimeFeatures(dts[t]);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.values[t][k], want[k], 1e-15);
  }
}

TEST(TimeFeaturesTest, RejectsDecreasingDays) {
  EXPECT_THROW(ComputeTimeFeatures(std::vector<int>{5, 4}), ArgumentError);
  EXPECT_THROW(ComputeTimeFeatures(std::vector<int>{}), ArgumentError);
}

TEST(PatientTest, EncodeDecodeRoundTrip) {
  const CodeVocabulary v = SmallVocabulary();
  const PatientRecord r =
      MakeRecord("a", {{0, {3, 1}}, {2, {0}}, {9, {11, 4, 7}}, {9, {2}}, {12, {5}}});
  const EncodedSequence x = EncodePatient(r, v);
  EXPECT_EQ(x.num_codes, 12);
  EXPECT_EQ(x.length(), 5);
  EXPECT_EQ(x.active[0], (std::vector<int>{1, 3}));
  EXPECT_EQ(x.days, (std::vector<int>{0, 2, 9, 9, 12}));
  const std::vector<double> dense = x.Dense(2);
  for (int c = 0; c < 12; ++c) {
    EXPECT_EQ(dense[c], (c == 4 || c == 7 || c == 11) ? 1.0 : 0.0);
  }
  EXPECT_EQ(DecodeVisits(x)[2], (std::vector<int>{4, 7, 11}));
}

TEST(PatientTest, ValidationRejectsMalformedRecords) {
  const CodeVocabulary v = SmallVocabulary();
  const auto five = [](std::vector<int> last) {
    return MakeRecord("p", {{0, {1}}, {1, {2}}, {2, {3}}, {3, {4}}, {4, std::move(last)}});
  };
  EXPECT_NO_THROW(ValidatePatient(five({5}), v));
  EXPECT_THROW(ValidatePatient(five({}), v), DataError);
  EXPECT_THROW(ValidatePatient(five({5, 5}), v), DataError);
  EXPECT_THROW(ValidatePatient(five({12}), v), DataError);
  PatientRecord short_record = MakeRecord("s", {{0, {1}}});
  EXPECT_THROW(ValidatePatient(short_record, v), DataError);
  PatientRecord backwards = five({5});
  backwards.visits[3].day = 0;
  EXPECT_THROW(ValidatePatient(backwards, v), DataError);
}

TEST(PatientTest, JsonRoundTrip) {
  PatientRecord r = MakeRecord("x", {{1, {2, 3}}, {4, {0}}}, 1);
  r.gender = Gender::kMale;
  EXPECT_EQ(PatientFromJson(PatientToJson(r)), r);
}

TEST(GeneratorTest, SameSeedSameCohortDifferentSeedDiffers) {
  const Dataset a = GenerateCohort(SmallConfig(7));
  const Dataset b = GenerateCohort(SmallConfig(7));
  const Dataset c = GenerateCohort(SmallConfig(8));
  EXPECT_EQ(SerializePatients(a), SerializePatients(b));
  EXPECT_NE(SerializePatients(a), SerializePatients(c));
}

TEST(GeneratorTest, GroupsAreMatchedAndRecordsValid) {
  const GeneratorConfig config = SmallConfig();
  const Dataset d = GenerateCohort(config);
  ASSERT_EQ(d.size(), config.n_case_groups * (1 + config.controls_per_case));
  std::map<std::string, std::vector<const PatientRecord*>> groups;
  for (const PatientRecord& p : d.patients) {
    ValidatePatient(p, d.vocabulary);
    EXPECT_LE(p.num_visits(), config.max_visits);
    EXPECT_GE(p.visits.front().day, 0);
    EXPECT_LE(p.visits.back().day, config.window_days - 1);
    groups[p.group].push_back(&p);
  }
  for (const auto& [name, members] : groups) {
    ASSERT_EQ(members.front()->label, 1) << name;
    const PatientRecord& c = *members.front();
    const int band = (c.age - config.min_age) / config.age_band_years;
    const int width = std::max(
        1, static_cast<int>(std::lround(config.visit_count_band * c.num_visits())));
    for (std::size_t k = 1; k < members.size(); ++k) {
      const PatientRecord& m = *members[k];
      EXPECT_EQ(m.label, 0);
      EXPECT_EQ(m.gender, c.gender);
      EXPECT_EQ((m.age - config.min_age) / config.age_band_years, band);
      EXPECT_LE(std::abs(m.num_visits() - c.num_visits()), width);
    }
  }
}

TEST(GeneratorTest, RiskCodesAreMoreFrequentInCases) {
  GeneratorConfig config = SmallConfig();
  config.n_case_groups = 120;
  const Dataset d = GenerateCohort(config);
  std::set<int> risk;
  for (const RiskCode& r : ResolveRiskCodes(config, d.vocabulary)) risk.insert(r.id);
  EXPECT_EQ(static_cast<int>(risk.size()), config.num_default_risk_codes);
  double rate[2] = {0, 0};
  int visits[2] = {0, 0};
  for (const PatientRecord& p : d.patients) {
    for (const VisitRecord& v : p.visits) {
      for (int c : v.codes) rate[p.label] += risk.contains(c);
      ++visits[p.label];
    }
  }
  EXPECT_GT(rate[1] / visits[1], rate[0] / visits[0]);
}

TEST(GeneratorTest, ConfigValidation) {
  GeneratorConfig config;
  config.mean_visits = 3;
  EXPECT_THROW(GenerateCohort(config), ArgumentError);
  config = GeneratorConfig();
  config.window_days = 100;
  EXPECT_THROW(ValidateGeneratorConfig(config), ArgumentError);
  EXPECT_THROW(GeneratorConfig::FromJson({{"no_such_key", 1}}), ParseError);
  const GeneratorConfig back = GeneratorConfig::FromJson(SmallConfig(9).ToJson());
  EXPECT_EQ(back.ToJson(), SmallConfig(9).ToJson());
}

TEST(DatasetIoTest, WriteReadRoundTrip) {
  const Dataset d = GenerateCohort(SmallConfig());
  const std::string path = TempPath("roundtrip.jsonl");
  WriteDataset(d, path);
  const Dataset back = ReadDataset(path);
  EXPECT_EQ(back.vocabulary, d.vocabulary);
  EXPECT_EQ(back.patients, d.patients);
  EXPECT_EQ(back.provenance, d.provenance);
  WriteDataset(back, path + ".2");
  EXPECT_EQ(Slurp(path), Slurp(path + ".2"));
}

TEST(DatasetIoTest, TruncatedLineNamesTheLine) {
  const Dataset d = GenerateCohort(SmallConfig());
  const std::string path = TempPath("truncated.jsonl");
  WriteDataset(d, path);
  std::string text = Slurp(path);
  text.resize(text.size() - 20);
  std::ofstream(path, std::ios::trunc) << text;
  try {
    ReadDataset(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(d.size())), std::string::npos)
        << e.what();
  }
  EXPECT_THROW(ReadDataset(TempPath("missing.jsonl")), IoError);
}

TEST(BatchingTest, SplitIsGroupDisjointAndSized) {
  const Dataset d = GenerateCohort(SmallConfig());
  const DatasetSplit s = SplitDataset(d, SplitRatios{}, 3);
  std::set<std::string> seen;
  int total = 0;
  for (const Dataset* part : {&s.train, &s.validation, &s.test}) {
    std::set<std::string> groups;
    for (const PatientRecord& p : part->patients) groups.insert(p.group);
    for (const std::string& g : groups) EXPECT_TRUE(seen.insert(g).second) << g;
    total += part->size();
  }
  EXPECT_EQ(total, d.size());
  EXPECT_EQ(GroupIds(s.validation).size(), 3u);  // round(0.10 * 30)
  EXPECT_EQ(GroupIds(s.test).size(), 8u);        // round(0.25 * 30)
  EXPECT_THROW(SplitDataset(d, {0.5, 0.2, 0.2}, 1), ArgumentError);
}

TEST(BatchingTest, OneBatchPerGroupCaseFirst) {
  const Dataset d = GenerateCohort(SmallConfig());
  const std::vector<Batch> batches = MakeBatches(d, 4);
  EXPECT_EQ(batches.size(), 30u);
  for (const Batch& b : batches) {
    EXPECT_EQ(d.patients[b.patient_indices.front()].label, 1);
    EXPECT_EQ(b.patient_indices.size(), 11u);
  }
  Dataset orphan = d;
  orphan.patients.erase(orphan.patients.begin());  // drop the first case
  EXPECT_THROW(MakeBatches(orphan, 4), DataError);
}

}  // namespace
}  // namespace retainex
