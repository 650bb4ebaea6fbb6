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
#include <set>
#include <thread>

#include "gtest/gtest.h"
#include "retainex/cohort_generator.h"
#include "retainex/error.h"
#include "retainex/http_server.h"
#include "retainex/interpretation.h"
#include "retainex/service.h"
#include "test_support.h"
// After Eigen: resolv.h defines a _res macro that breaks Eigen headers.
#include "httplib.h"

namespace retainex {
namespace {

using Json = nlohmann::json;
using testing::RandomModel;

Dataset SmallCohort() {
  GeneratorConfig config;
  config.n_case_groups = 6;
  config.controls_per_case = 4;
  config.vocabulary = {10, 10, 10};
  config.num_default_risk_codes = 6;
  return GenerateCohort(config);
}

ServiceConfig PcaConfig() {
  ServiceConfig config;
  config.projection.method = ProjectionMethod::kPca;
  return config;
}

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest()
      : service_(SmallCohort(), RandomModel(Variant::kRetainEx, 6, 30, 3, 0.4),
                 PcaConfig()) {}

  ApiResponse Get(const std::string& path, std::map<std::string, std::string> query = {}) {
    return service_.Handle("GET", path, query, "");
  }
  ApiResponse Post(const std::string& path, const Json& body) {
    return service_.Handle("POST", path, {}, body.dump());
  }
  std::vector<std::string> AllIds() const {
    std::vector<std::string> ids;
    for (const auto& p : service_.dataset().patients) ids.push_back(p.id);
    return ids;
  }

  WorkbenchService service_;
};

TEST_F(ServiceTest, Health) {
  const ApiResponse r = Get("/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
}

TEST_F(ServiceTest, OverviewCoordinatesMatchDirectProjection) {
  const ApiResponse r = Get("/overview");
  ASSERT_EQ(r.status, 200);
  const Dataset& d = service_.dataset();
  ASSERT_EQ(r.body["patients"].size(), static_cast<std::size_t>(d.size()));
  const Model model = service_.published_model();
  Eigen::MatrixXd vectors(d.size(), 30);
  for (int i = 0; i < d.size(); ++i) {
    const ForwardTrace trace = Forward(model, EncodePatient(d.patients[i], d.vocabulary));
    const PatientEmbedding e = EmbedPatient(CodeContributions(model, trace), 30);
    for (int c = 0; c < 30; ++c) vectors(i, c) = e.scores[c];
    EXPECT_EQ(r.body["patients"][i]["prediction"].get<double>(), trace.prediction);
  }
  const Embedding2D want = Pca2d(vectors);
  for (int i = 0; i < d.size(); ++i) {
    EXPECT_EQ(r.body["patients"][i]["x"].get<double>(), want.points[i][0]);
    EXPECT_EQ(r.body["patients"][i]["y"].get<double>(), want.points[i][1]);
  }
}

TEST_F(ServiceTest, PolygonAroundEverythingSelectsEveryone) {
  const Json body = {{"polygon", {{-1e6, -1e6}, {1e6, -1e6}, {1e6, 1e6}, {-1e6, 1e6}}}};
  const ApiResponse r = Post("/select", body);
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.body["ids"].get<std::vector<std::string>>(), AllIds());
}

TEST_F(ServiceTest, FiltersAgreeWithDirectEvaluation) {
  const Json overview = Get("/overview").body;
  const Json body = {{"age", {40, 70}},
                     {"gender", "F"},
                     {"risk", {0.0, 0.6}},
                     {"polygon", {{-1e6, 0.0}, {1e6, 0.0}, {1e6, 1.0}, {-1e6, 1.0}}},
                     {"axes", {{"x", "age"}, {"y", "risk"}}}};
  const ApiResponse r = Post("/select", body);
  ASSERT_EQ(r.status, 200) << r.body;
  std::vector<std::string> want;
  for (const Json& p : overview["patients"]) {
    const double risk = p["prediction"];
    if (p["age"] >= 40 && p["age"] <= 70 && p["gender"] == "F" && risk <= 0.6) {
      want.push_back(p["id"]);
    }
  }
  EXPECT_EQ(r.body["ids"].get<std::vector<std::string>>(), want);
  EXPECT_EQ(r.body["count"], want.size());
}

TEST_F(ServiceTest, CodeContributionRangeFilter) {
  const Model model = service_.published_model();
  const Dataset& d = service_.dataset();
  const int code = 2;
  std::vector<std::string> want;
  for (const PatientRecord& p : d.patients) {
    const ForwardTrace trace = Forward(model, EncodePatient(p, d.vocabulary));
    const double s = EmbedPatient(CodeContributions(model, trace), 30).scores[code];
    if (s >= 0.0 && s <= 1.0) want.push_back(p.id);
  }
  const ApiResponse r = Post("/select", {{"codes", {{{"code", code}, {"range", {0.0, 1.0}}}}}});
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.body["ids"].get<std::vector<std::string>>(), want);
}

TEST_F(ServiceTest, SelectValidation) {
  EXPECT_EQ(Post("/select", {{"shape", 1}}).body["error"]["code"], "parse_error");
  EXPECT_EQ(Post("/select", {{"age", {5}}}).status, 400);
  EXPECT_EQ(Post("/select", {{"polygon", {{0, 0}, {1, 1}}}}).status, 400);
  EXPECT_EQ(service_.Handle("POST", "/select", {}, "{not json").status, 400);
}

TEST_F(ServiceTest, SummaryTopContributorsFollowCohortMeans) {
  const std::vector<std::string> ids = AllIds();
  std::string joined;
  for (const auto& id : ids) joined += (joined.empty() ? "" : ",") + id;
  const ApiResponse r = Get("/summary", {{"ids", joined}});
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.body["patients"].size(), ids.size());
  const Json& top = r.body["top_contributors"];
  ASSERT_EQ(top.size(), 9u);
  // Oracle: per-patient mean of summed contributions, top three per kind.
  const Model model = service_.published_model();
  const Dataset& d = service_.dataset();
  std::vector<double> mean(30, 0.0);
  for (const PatientRecord& p : d.patients) {
    const auto m = CodeContributions(model, Forward(model, EncodePatient(p, d.vocabulary)));
    for (const Contribution& c : m.entries) mean[c.code] += c.score / d.size();
  }
  for (int kind = 0; kind < 3; ++kind) {
    std::vector<int> codes;
    for (int c = 10 * kind; c < 10 * kind + 10; ++c) codes.push_back(c);
    std::stable_sort(codes.begin(), codes.end(),
                     [&](int a, int b) { return mean[a] > mean[b]; });
    for (int k = 0; k < 3; ++k) {
      EXPECT_EQ(top[3 * kind + k]["code"], codes[k]);
      EXPECT_NEAR(top[3 * kind + k]["score"].get<double>(), mean[codes[k]], 1e-12);
    }
  }
  EXPECT_EQ(r.body["temporal"]["series"].size(), 9u);
  EXPECT_EQ(Get("/summary").status, 400);
  EXPECT_EQ(Get("/summary", {{"ids", "nobody"}}).status, 404);
}

TEST_F(ServiceTest, PatientView) {
  const std::string id = AllIds()[3];
  const ApiResponse r = Get("/patients/" + id);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["record"]["id"], id);
  EXPECT_EQ(r.body["risk_curve"].back(), r.body["prediction"]);
  EXPECT_EQ(r.body["contributions"].size(), r.body["record"]["visits"].size());
  const ApiResponse missing = Get("/patients/nobody");
  EXPECT_EQ(missing.status, 404);
  EXPECT_EQ(missing.body["error"]["code"], "not_found");
}

TEST_F(ServiceTest, WhatIfDoesNotTouchTheModel) {
  const std::string id = AllIds()[0];
  const ApiResponse same = Post("/patients/" + id + "/whatif", Json::array());
  ASSERT_EQ(same.status, 200) << same.body;
  EXPECT_EQ(same.body["before"], same.body["after"]);
  const ApiResponse moved =
      Post("/patients/" + id + "/whatif", {{{"op", "remove_visit"}, {"visit", 0}}});
  ASSERT_EQ(moved.status, 200) << moved.body;
  EXPECT_NE(moved.body["before"], moved.body["after"]);
  EXPECT_EQ(service_.model_version(), 1u);
  const ApiResponse bad =
      Post("/patients/" + id + "/whatif", {{{"op", "remove_visit"}, {"visit", 99}}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["error"]["code"], "edit_error");
}

Json SteerFirstCode(const Json& patient_view) {
  const int code = patient_view["record"]["visits"][0]["codes"][0];
  return {{"selections", {{{"visit", 0}, {"code", code}, {"direction", "increase"}}}}};
}

TEST_F(ServiceTest, PreviewThenCommitPublishesAtomically) {
  const std::string id = AllIds()[1];
  const Json request = SteerFirstCode(Get("/patients/" + id).body);
  const Json before = Get("/patients/" + id).body;
  const ApiResponse preview = Post("/patients/" + id + "/retrain/preview", request);
  ASSERT_EQ(preview.status, 200) << preview.body;
  EXPECT_EQ(preview.body["base_version"], 1);
  // Previews leave the published model alone.
  EXPECT_EQ(Get("/patients/" + id).body, before);
  EXPECT_EQ(service_.model_version(), 1u);

  const ApiResponse commit = Post("/patients/" + id + "/retrain/commit",
                                  {{"snapshot_id", preview.body["snapshot_id"]}});
  ASSERT_EQ(commit.status, 200) << commit.body;
  EXPECT_EQ(commit.body["model_version"], 2);
  const Json after = Get("/patients/" + id).body;
  EXPECT_EQ(after["model_version"], 2);
  EXPECT_EQ(after["contributions"], preview.body["report"]["after"]);
  // A consumed snapshot cannot be committed twice.
  EXPECT_EQ(Post("/patients/" + id + "/retrain/commit",
                 {{"snapshot_id", preview.body["snapshot_id"]}})
                .status,
            404);
}

TEST_F(ServiceTest, StaleCommitConflicts) {
  const std::string id = AllIds()[2];
  const Json request = SteerFirstCode(Get("/patients/" + id).body);
  const Json stale = Post("/patients/" + id + "/retrain/preview", request).body;
  ASSERT_EQ(Post("/patients/" + id + "/retrain/commit", request).status, 200);
  const ApiResponse conflict = Post("/patients/" + id + "/retrain/commit",
                                    {{"snapshot_id", stale["snapshot_id"]}});
  EXPECT_EQ(conflict.status, 409);
  EXPECT_EQ(conflict.body["error"]["code"], "conflict");
  Json versioned = request;
  versioned["base_version"] = 1;
  EXPECT_EQ(Post("/patients/" + id + "/retrain/commit", versioned).status, 409);
  EXPECT_EQ(service_.model_version(), 2u);
}

TEST_F(ServiceTest, AggregatesExposeFullRankings) {
  const ApiResponse r = Get("/aggregates");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["num_patients"], service_.dataset().size());
  EXPECT_EQ(r.body["ranking_s1"].size(), 30u);
  const Json& s1 = r.body["s1"];
  const Json& ranking = r.body["ranking_s1"];
  for (std::size_t k = 1; k < ranking.size(); ++k) {
    EXPECT_GE(s1[ranking[k - 1].get<int>()].get<double>(),
              s1[ranking[k].get<int>()].get<double>());
  }
}

TEST_F(ServiceTest, RoutingErrors) {
  EXPECT_EQ(Get("/nope").status, 404);
  EXPECT_EQ(Post("/health", Json::object()).status, 405);
  EXPECT_EQ(Get("/patients/x/whatif").status, 405);
}

TEST_F(ServiceTest, ConcurrentReadsDuringCommit) {
  const std::string id = AllIds()[0];
  const Json request = SteerFirstCode(Get("/patients/" + id).body);
  std::vector<std::thread> readers;
  std::atomic<int> failures = 0;
  for (int k = 0; k < 4; ++k) {
    readers.emplace_back([&] {
      for (int i = 0; i < 20; ++i) {
        if (Get("/patients/" + id).status != 200) ++failures;
      }
    });
  }
  EXPECT_EQ(Post("/patients/" + id + "/retrain/commit", request).status, 200);
  for (auto& t : readers) t.join();
  EXPECT_EQ(failures, 0);
}

TEST(ServiceGruTest, ContributionEndpointsUnsupported) {
  WorkbenchService service(SmallCohort(), RandomModel(Variant::kGruBaseline, 4, 30, 1),
                           PcaConfig());
  const ApiResponse r = service.Handle("GET", "/overview", {}, "");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "unsupported");
  EXPECT_EQ(service.Handle("GET", "/patients/P000000", {}, "").status, 200);
}

TEST(ServiceConfigTest, TsneCapAndJson) {
  ServiceConfig config;
  config.max_projection_points = 10;
  WorkbenchService service(SmallCohort(), RandomModel(Variant::kRetainEx, 4, 30, 1), config);
  const ApiResponse r = service.Handle("GET", "/overview", {}, "");
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("t-SNE"), std::string::npos);
  EXPECT_EQ(ServiceConfig::FromJson(config.ToJson()).ToJson(), config.ToJson());
  EXPECT_THROW(ServiceConfig::FromJson({{"prot", 1}}), ParseError);
  EXPECT_THROW(ServiceConfig::FromJson({{"port", 70000}}), ArgumentError);
}

TEST(ApiErrorTest, EachCodeMapsToOneStatus) {
  EXPECT_EQ(ToApiError(ArgumentError("x")).status, 400);
  EXPECT_EQ(ToApiError(ParseError("x")).status, 400);
  EXPECT_EQ(ToApiError(EditError("x")).status, 400);
  EXPECT_EQ(ToApiError(UnsupportedError("x")).status, 400);
  EXPECT_EQ(ToApiError(NotFoundError("x")).status, 404);
  EXPECT_EQ(ToApiError(ConflictError("x")).status, 409);
  EXPECT_EQ(ToApiError(NumericError("x")).status, 500);
  EXPECT_EQ(ToApiError(NumericError("x")).code, "numeric_error");
  EXPECT_EQ(ToApiError(std::runtime_error("x")).status, 500);
}

// Winding number over a star-shaped polygon, which is simple, so it agrees
// with even-odd crossing everywhere off the boundary.
bool WindingInside(double x, double y, const std::vector<std::array<double, 2>>& poly) {
  int winding = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const double cross = (b[0] - a[0]) * (y - a[1]) - (x - a[0]) * (b[1] - a[1]);
    if (a[1] <= y && b[1] > y && cross > 0) ++winding;
    if (a[1] > y && b[1] <= y && cross < 0) --winding;
  }
  return winding != 0;
}

TEST(PolygonTest, AgreesWithWindingNumberOracle) {
  SeededRng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.UniformInt(3, 12);
    std::vector<double> angles;
    for (int k = 0; k < n; ++k) angles.push_back(rng.Uniform(0, 2 * M_PI));
    std::sort(angles.begin(), angles.end());
    std::vector<std::array<double, 2>> poly;
    for (const double a : angles) {
      const double r = rng.Uniform(0.2, 1.0);
      poly.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const double x = rng.Uniform(-1.1, 1.1), y = rng.Uniform(-1.1, 1.1);
    ASSERT_EQ(PointInPolygon(x, y, poly), WindingInside(x, y, poly)) << trial;
  }
}

TEST(HttpTest, ServesTheApiOverSockets) {
  WorkbenchService service(SmallCohort(), RandomModel(Variant::kRetainEx, 4, 30, 1),
                           PcaConfig());
  HttpServer server(service);
  const int port = server.Bind("127.0.0.1", 0);
  std::thread worker([&] { server.Listen(); });
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  for (int attempt = 0; !health && attempt < 50; ++attempt) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    health = client.Get("/health");
  }
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(Json::parse(health->body)["status"], "ok");
  const auto summary = client.Get("/summary?ids=P000000,P000001");
  ASSERT_TRUE(summary);
  EXPECT_EQ(Json::parse(summary->body)["patients"].size(), 2u);
  const auto select = client.Post("/select", R"({"gender":"M"})", "application/json");
  ASSERT_TRUE(select);
  EXPECT_EQ(select->status, 200);
  const auto missing = client.Get("/patients/nobody");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.Stop();
  worker.join();
}

}  // namespace
}  // namespace retainex
