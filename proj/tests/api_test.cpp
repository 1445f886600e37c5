// Copyright 2026 The hposerve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "hposerve/campaign.hpp"
#include "hposerve/canonical.hpp"
#include "hposerve/sampler.hpp"
#include "support/live_server.hpp"

namespace hposerve {
namespace {

using bench::ProtocolClient;
using bench::WireResponse;
using nlohmann::json;
using testing::LiveServer;

json ask_body(const std::string& name = "quad", const json& sampler = {{"kind", "random"}},
              const json& pruner = {{"kind", "none"}}) {
  return {{"study_name", name},
          {"properties",
           {{"direction", "minimize"}, {"sampler", sampler}, {"pruner", pruner}}},
          {"space", {{"x", {{"kind", "uniform"}, {"low", -5}, {"high", 5}}}}}};
}

class ApiTest : public ::testing::Test {
 protected:
  LiveServer server;
  ProtocolClient worker{server.url(), server.issue("alice")};
  ProtocolClient admin{server.url(), ""};

  json ok(const WireResponse& r) {
    EXPECT_EQ(r.status, 200) << r.body;
    return r.json();
  }
  json ask(const json& body = ask_body()) { return ok(worker.ask(body.dump())); }
  WireResponse tell(const std::string& trial_id, double objective) {
    return worker.tell(json{{"trial_id", trial_id}, {"objective", objective}}.dump());
  }
  WireResponse prune(const std::string& trial_id, std::int64_t step, double value) {
    return worker.should_prune(
        json{{"trial_id", trial_id}, {"step", step}, {"value", value}}.dump());
  }
  WireResponse admin_get(const std::string& path) {
    return admin.get(path, std::string(LiveServer::kAdmin));
  }
};

TEST_F(ApiTest, AskCreatesThenAttaches) {
  const auto a = ask();
  EXPECT_EQ(a.at("trial_index"), 0);
  const auto b = ask();
  EXPECT_EQ(b.at("trial_index"), 1);
  EXPECT_EQ(a.at("study_id"), b.at("study_id"));
  EXPECT_NE(a.at("trial_id"), b.at("trial_id"));
  const double x = b.at("params").at("x");
  EXPECT_GE(x, -5.0);
  EXPECT_LE(x, 5.0);
}

TEST_F(ApiTest, AskValidationNamesTheParameter) {
  json body = ask_body();
  body["space"] = {{"lr", {{"kind", "log-uniform"}, {"low", 0}, {"high", 1}}}};
  const auto r = worker.ask(body.dump());
  EXPECT_EQ(r.status, 422);
  const auto j = r.json();
  EXPECT_EQ(j.at("error"), "validation_failed");
  EXPECT_EQ(j.at("violations").at(0).at("param"), "lr");
  EXPECT_EQ(j.at("violations").at(0).at("code"), "BadBounds");

  body = ask_body();
  body["colour"] = "blue";
  EXPECT_EQ(worker.ask(body.dump()).status, 422);
  EXPECT_EQ(worker.ask("not json").status, 422);
  EXPECT_EQ(worker.ask("[1,2]").status, 422);
}

TEST_F(ApiTest, TellFinalizesExactlyOnce) {
  const auto a = ask();
  const auto r = tell(a.at("trial_id"), 0.5);
  const auto j = ok(r);
  EXPECT_EQ(j.at("ok"), true);
  EXPECT_LE(j.at("best_objective").get<double>(), 0.5);
  EXPECT_EQ(tell(a.at("trial_id"), 0.5).status, 409);
  EXPECT_EQ(tell("0000000000000000deadbeef", 0.5).status, 404);
}

TEST_F(ApiTest, TellOmitsBestWhenNothingCompleted) {
  const auto a = ask();
  const auto j = ok(worker.tell(json{{"trial_id", a.at("trial_id")}, {"state", "failed"}}.dump()));
  EXPECT_FALSE(j.contains("best_objective"));
}

TEST_F(ApiTest, TellBodyShape) {
  const std::string id = ask().at("trial_id");
  EXPECT_EQ(worker.tell(json{{"trial_id", id}}.dump()).status, 422);
  EXPECT_EQ(worker.tell(json{{"trial_id", id}, {"objective", 1}, {"state", "failed"}}.dump())
                .status, 422);
  EXPECT_EQ(worker.tell(json{{"trial_id", id}, {"state", "completed"}}.dump()).status, 422);
  EXPECT_EQ(worker.tell(json{{"trial_id", id}, {"objective", "1"}}.dump()).status, 422);
  EXPECT_EQ(worker.tell(json{{"trial_id", id}, {"objective", 1}, {"x", 1}}.dump()).status,
            422);
  EXPECT_EQ(worker.tell(R"({"trial_id":")" + id + R"(","objective":1e999})").status, 422);
  EXPECT_EQ(tell(id, 1.0).status, 200);
}

TEST_F(ApiTest, OtherOwnersTrialsAreInvisible) {
  const std::string id = ask().at("trial_id");
  ProtocolClient bob(server.url(), server.issue("bob"));
  EXPECT_EQ(bob.tell(json{{"trial_id", id}, {"objective", 1}}.dump()).status, 404);
  EXPECT_EQ(bob.should_prune(json{{"trial_id", id}, {"step", 0}, {"value", 1}}.dump()).status,
            404);
}

TEST_F(ApiTest, ShouldPruneFlow) {
  const json pruner = {{"kind", "median"}, {"n_warmup_steps", 1}, {"n_min_trials", 2}};
  const auto body = ask_body("pruned", {{"kind", "random"}}, pruner);
  for (int i = 0; i < 2; ++i) {
    const std::string id = ask(body).at("trial_id");
    for (int s = 0; s < 3; ++s) {
      EXPECT_EQ(ok(prune(id, s, 1.0)).at("prune"), false);
    }
    ASSERT_EQ(tell(id, 1.0).status, 200);
  }
  const std::string id = ask(body).at("trial_id");
  EXPECT_EQ(ok(prune(id, 0, 100.0)).at("prune"), false);  // warmup
  EXPECT_EQ(ok(prune(id, 1, 100.0)).at("prune"), true);
  EXPECT_EQ(tell(id, 1.0).status, 409);
  EXPECT_EQ(prune(id, 2, 1.0).status, 409);

  const std::string other = ask(body).at("trial_id");
  ASSERT_EQ(ok(prune(other, 3, 0.5)).at("prune"), false);
  EXPECT_EQ(prune(other, 2, 0.5).status, 422);
  EXPECT_EQ(prune(other, 3, 0.5).status, 422);
  EXPECT_EQ(prune("0000000000000000deadbeef", 3, 0.5).status, 404);
  EXPECT_EQ(worker.should_prune(json{{"trial_id", other}, {"step", -1}, {"value", 1}}.dump())
                .status, 422);
  EXPECT_EQ(worker.should_prune(json{{"trial_id", other}, {"step", 4.5}, {"value", 1}}.dump())
                .status, 422);

  const auto trials = ok(admin_get("/api/studies/" + ask(body).at("study_id").get<std::string>() +
                                   "/trials?state=pruned"));
  ASSERT_EQ(trials.at("trials").size(), 1u);
  EXPECT_EQ(trials.at("trials").at(0).at("trial_id"), id);
  EXPECT_EQ(trials.at("trials").at(0).at("intermediates"), json::parse("[[0,100.0],[1,100.0]]"));
}

TEST_F(ApiTest, ShouldPruneOnCompletedTrialIsConflict) {
  const std::string id = ask().at("trial_id");
  ASSERT_EQ(tell(id, 1.0).status, 200);
  EXPECT_EQ(prune(id, 0, 1.0).status, 409);
}

TEST_F(ApiTest, UniformUnauthorizedBody) {
  ProtocolClient stranger(server.url(), "0123456789abcdef.bogus");
  const auto a = stranger.ask(ask_body().dump());
  const auto t = stranger.tell("{}");
  const auto p = stranger.should_prune("{}");
  EXPECT_EQ(a.status, 401);
  EXPECT_EQ(t.status, 401);
  EXPECT_EQ(p.status, 401);
  EXPECT_EQ(a.body, R"({"error":"unauthorized"})");
  EXPECT_EQ(t.body, a.body);
  EXPECT_EQ(p.body, a.body);
  EXPECT_EQ(stranger.get("/api/studies").status, 401);
  EXPECT_EQ(stranger.get("/api/studies").body, a.body);
}

TEST_F(ApiTest, GridExhaustionIsConflict) {
  json body = ask_body("grid", {{"kind", "grid"}, {"grid_points", 2}});
  ask(body);
  ask(body);
  const auto r = worker.ask(body.dump());
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.json().at("error"), "grid_exhausted");
}

// The second ask samples from a history that already holds the first tell.
TEST_F(ApiTest, AskSeesPrecedingTell) {
  const json sampler = {{"kind", "tpe"}, {"seed", 11}, {"n_startup_trials", 1}};
  const auto body = ask_body("seq", sampler);
  const auto first = ask(body);
  ASSERT_EQ(tell(first.at("trial_id"), 2.0).status, 200);
  const auto second = ask(body);

  const auto def = parse_definition(body);
  ObservationHistory h;
  h.entries.push_back({assignment_from_json(def.space, first.at("params")), 2.0});
  const auto expected = suggest(def.space, h, def.properties.sampler, 1, mix_seed(11, 1));
  EXPECT_EQ(second.at("params"), assignment_to_json(expected));
  EXPECT_NE(second.at("params"),
            assignment_to_json(suggest(def.space, {}, def.properties.sampler, 1, mix_seed(11, 1))));
}

TEST_F(ApiTest, ReadApis) {
  EXPECT_EQ(ok(worker.get("/api/studies")).at("studies"), json::array());

  const auto pruner = json{{"kind", "median"}, {"n_warmup_steps", 0}, {"n_min_trials", 1}};
  const auto body = ask_body("curves", {{"kind", "random"}}, pruner);
  const auto a = ask(body);
  prune(a.at("trial_id"), 0, 1.0);
  tell(a.at("trial_id"), 0.75);
  const auto b = ask(body);
  ASSERT_EQ(ok(prune(b.at("trial_id"), 0, 5.0)).at("prune"), true);
  const auto c = ask(body);
  prune(c.at("trial_id"), 0, 0.5);
  const std::string study_id = a.at("study_id");

  const auto curves = ok(worker.get("/api/studies/" + study_id + "/curves"));
  const auto& series = curves.at("series");
  ASSERT_EQ(series.size(), 3u);
  EXPECT_EQ(series[0].at("state"), "completed");
  EXPECT_EQ(series[0].at("objective"), 0.75);
  EXPECT_EQ(series[1].at("state"), "pruned");
  EXPECT_EQ(series[2].at("state"), "running");
  EXPECT_EQ(series[2].at("points"), json::parse("[[0,0.5]]"));

  const auto summary = ok(worker.get("/api/studies/" + study_id));
  EXPECT_EQ(summary.at("counts"),
            json::parse(R"({"completed":1,"failed":0,"pruned":1,"running":1})"));
  EXPECT_EQ(summary.at("n_trials"), 3);
  EXPECT_EQ(summary.at("best_objective"), 0.75);
  EXPECT_EQ(summary.at("definition"), json::parse(canonical_text(parse_definition(body))));

  EXPECT_EQ(ok(worker.get("/api/studies/" + study_id + "/trials?state=running"))
                .at("trials").size(), 1u);
  EXPECT_EQ(worker.get("/api/studies/" + study_id + "/trials?state=weird").status, 422);
  EXPECT_EQ(worker.get("/api/studies/abcdef").status, 404);

  ProtocolClient bob(server.url(), server.issue("bob"));
  EXPECT_EQ(bob.get("/api/studies/" + study_id).status, 404);
  EXPECT_EQ(ok(bob.get("/api/studies")).at("studies").size(), 0u);
  EXPECT_EQ(ok(admin_get("/api/studies")).at("studies").size(), 1u);
}

TEST_F(ApiTest, TokenConsole) {
  const std::string key = LiveServer::kAdmin;
  auto created = ok(admin.post("/api/tokens",
                               R"({"validity_seconds":3600,"owner":"carol"})", key));
  EXPECT_EQ(created.at("owner"), "carol");
  EXPECT_EQ(created.at("revoked"), false);
  const std::string secret = created.at("secret");
  const std::string token_id = created.at("token_id");

  ProtocolClient carol(server.url(), secret);
  EXPECT_EQ(carol.ask(ask_body().dump()).status, 200);

  const auto listed = ok(admin_get("/api/tokens"));
  EXPECT_EQ(listed.dump().find(secret.substr(17)), std::string::npos);

  EXPECT_EQ(admin.del("/api/tokens/" + token_id, key).status, 200);
  EXPECT_EQ(carol.ask(ask_body().dump()).status, 401);
  EXPECT_EQ(admin.del("/api/tokens/ffffffffffffffff", key).status, 404);

  // Worker tokens cannot use the console.
  EXPECT_EQ(worker.post("/api/tokens", R"({"validity_seconds":10})").status, 401);
  EXPECT_EQ(worker.get("/api/tokens").status, 401);
  EXPECT_EQ(admin.post("/api/tokens", R"({"validity_seconds":0})", key).status, 422);
  EXPECT_EQ(admin.post("/api/tokens", R"({"validity_seconds":10,"x":1})", key).status, 422);
}

TEST_F(ApiTest, SessionLogin) {
  httplib::Client http(server.url());
  EXPECT_EQ(http.Post("/api/login", R"({"credential":"wrong"})", "application/json")->status,
            401);
  auto r = http.Post("/api/login",
                     json{{"credential", LiveServer::kAdmin}}.dump(), "application/json");
  ASSERT_EQ(r->status, 200);
  const auto set_cookie = r->get_header_value("Set-Cookie");
  ASSERT_NE(set_cookie.find("HttpOnly"), std::string::npos);
  const auto cookie = set_cookie.substr(0, set_cookie.find(';'));
  httplib::Headers h = {{"Cookie", cookie}};
  EXPECT_EQ(http.Get("/api/studies", h)->status, 200);
  EXPECT_EQ(http.Get("/api/tokens", h)->status, 200);
  EXPECT_EQ(http.Post("/api/logout", h, "", "application/json")->status, 200);
  EXPECT_EQ(http.Get("/api/studies", h)->status, 401);
  EXPECT_EQ(http.Get("/healthz")->status, 200);
}

TEST(ApiClock, ExpiredTokenIsRejected) {
  auto now = std::make_shared<std::atomic<std::int64_t>>(1'800'000'000'000);
  LiveServer server([now] { return TimePoint(std::chrono::milliseconds(now->load())); });
  const auto issued =
      server.storage().issue_token("alice", std::chrono::seconds(10)).credential;
  ProtocolClient worker(server.url(), issued);
  EXPECT_EQ(worker.ask(ask_body().dump()).status, 200);
  *now += 10'000;
  const auto r = worker.ask(ask_body().dump());
  EXPECT_EQ(r.status, 401);
  EXPECT_EQ(r.body, R"({"error":"unauthorized"})");
}

}  // namespace
}  // namespace hposerve
