#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "support.hpp"
#include "talechat/service.hpp"

namespace talechat::service {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() : clock(make_instant(2023, 5, 25, 14, 41, 0)) { start(); }

  void start() {
    app.reset();
    app = std::make_unique<Application>(testing::fixture_config(dir.path()), clock);
    api = std::make_unique<Api>(*app);
  }

  struct Reply {
    int status;
    json body;
    std::map<std::string, std::string> headers;
  };

  Reply call(const std::string& method, const std::string& path, const json& body = nullptr,
             std::map<std::string, std::string> query = {}, bool supervisor = false) {
    Request r{method, path, std::move(query), {}, body.is_null() ? "" : body.dump()};
    if (supervisor) r.headers[kSupervisorHeader] = "fixture-supervisor-token";
    const auto res = api->handle(r);
    return {res.status, json::parse(res.body), res.headers};
  }

  testing::TempDir dir;
  ManualClock clock;
  std::unique_ptr<Application> app;
  std::unique_ptr<Api> api;
};

TEST_F(ServiceTest, HealthAndEmotions) {
  auto r = call("GET", "/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ready");
  EXPECT_EQ(r.body["approved_tales"], 6);
  r = call("GET", "/emotions");
  ASSERT_EQ(r.body["emotions"].size(), 30u);
  EXPECT_EQ(r.body["emotions"][13]["name"], "tension");
  EXPECT_EQ(r.body["emotions"][13]["valence"], "negative");
  EXPECT_EQ(call("GET", "/nowhere").status, 404);
}

TEST_F(ServiceTest, RegisterAndConverse) {
  auto r = call("POST", "/register", {{"age", 20}, {"gender", "female"}, {"visible_to_supervisor", true}});
  ASSERT_EQ(r.status, 201);
  const std::string uid = r.body["user_id"];
  EXPECT_EQ(call("POST", "/register", {{"age", "abc"}, {"gender", "female"}}).status, 400);
  EXPECT_EQ(call("POST", "/register", {{"age", 2}, {"gender", "female"}}).status, 400);

  r = call("POST", "/session", {{"user_id", uid}});
  ASSERT_EQ(r.status, 201);
  const std::string sid = r.body["session_id"];
  EXPECT_EQ(r.headers["X-Session-Id"], sid);
  EXPECT_TRUE(r.body["alarms"].empty());
  EXPECT_EQ(call("POST", "/session", {{"user_id", "u9999"}}).status, 404);

  r = call("POST", "/session/" + sid + "/message", {{"text", "I want to search for tales on mental illnesses"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["mode"], "searching");
  r = call("POST", "/session/" + sid + "/command", {{"command", "/chat"}});
  EXPECT_EQ(r.body["mode"], "chatting");
  r = call("POST", "/session/" + sid + "/message", {{"text", "Tonight I had insomnia"}});
  EXPECT_NE(r.body["replies"][0].get<std::string>().find("Feeling of restlessness, discomfort"), std::string::npos);
  r = call("GET", "/session/" + sid);
  EXPECT_EQ(r.body["mode"], "chatting");
  EXPECT_EQ(r.body["interactions"], 3);

  r = call("POST", "/session/" + sid + "/command", {{"command", "/exit"}});
  EXPECT_EQ(r.body["mode"], "closed");
  EXPECT_EQ(call("POST", "/session/" + sid + "/message", {{"text", "hi"}}).status, 409);
  EXPECT_EQ(call("POST", "/session/s999999/message", {{"text", "hi"}}).status, 404);
  EXPECT_EQ(call("POST", "/session/" + sid + "/message", json::object()).status, 400);

  r = call("GET", "/stats", nullptr, {{"gender", "female"}, {"age_bucket", "18-23"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["total"], 1);
  EXPECT_EQ(r.body["emotions"][13]["percent"], 100.0);
}

TEST_F(ServiceTest, TalesSearchAndReview) {
  auto r = call("GET", "/tales", nullptr, {{"query", "mental illnesses"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["results"].size(), 3u);
  r = call("GET", "/tales", nullptr, {{"emotions", "frustration,strength"}});
  ASSERT_EQ(r.body["results"].size(), 1u);
  EXPECT_EQ(r.body["results"][0]["id"], "t01");
  EXPECT_EQ(call("GET", "/tales", nullptr, {{"emotions", "happiness"}}).status, 400);
  EXPECT_EQ(call("GET", "/tales/t05").body["title"], "Coffee with Marisa");
  EXPECT_EQ(call("GET", "/tales/t99").status, 404);

  r = call("POST", "/tales", {{"title", "The Lighthouse"}, {"body", "A keeper asks for help."}});
  ASSERT_EQ(r.status, 201);
  const std::string id = r.body["id"];
  EXPECT_EQ(r.body["status"], "pending");
  EXPECT_EQ(call("POST", "/tales", {{"title", ""}, {"body", "x"}}).status, 400);
  EXPECT_EQ(call("GET", "/tales/" + id).status, 404);
  EXPECT_EQ(call("GET", "/tales/" + id, nullptr, {}, true).status, 200);
  EXPECT_EQ(call("GET", "/supervisor/pending", nullptr, {}, true).body["tales"].size(), 1u);

  const json approve = {{"decision", "approve"}, {"emotions", {"calm"}}, {"themes", {"work"}}};
  EXPECT_EQ(call("POST", "/tales/" + id + "/review", approve).status, 403);
  EXPECT_EQ(call("POST", "/tales/" + id + "/review", {{"decision", "approve"}}, {}, true).status, 400);
  r = call("POST", "/tales/" + id + "/review", approve, {}, true);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "approved");
  EXPECT_EQ(call("POST", "/tales/" + id + "/review", approve, {}, true).status, 409);
  EXPECT_EQ(call("POST", "/tales/t99/review", approve, {}, true).status, 404);
  EXPECT_EQ(call("GET", "/health").body["approved_tales"], 7);
  EXPECT_EQ(call("GET", "/tales", nullptr, {{"emotions", "calm"}}).body["results"][0]["id"], id);
}

TEST_F(ServiceTest, AlarmsAndTimeline) {
  const std::string uid = call("POST", "/register", {{"age", 16}, {"gender", "male"}, {"visible_to_supervisor", true}})
                              .body["user_id"];
  const std::string hidden =
      call("POST", "/register", {{"age", 16}, {"gender", "male"}, {"visible_to_supervisor", false}}).body["user_id"];
  for (const auto& u : {uid, hidden}) {
    const std::string sid = call("POST", "/session", {{"user_id", u}}).body["session_id"];
    call("POST", "/session/" + sid + "/command", {{"command", "/chat"}});
    call("POST", "/session/" + sid + "/message", {{"text", "Tonight I had insomnia"}});
    call("POST", "/session/" + sid + "/message", {{"text", "There are times I would like to end it all"}});
    call("POST", "/session/" + sid + "/command", {{"command", "/exit"}});
  }

  EXPECT_EQ(call("GET", "/supervisor/alerts").status, 403);
  auto r = call("GET", "/supervisor/alerts", nullptr, {}, true);
  ASSERT_EQ(r.body["alerts"].size(), 1u);
  EXPECT_EQ(r.body["alerts"][0]["user_id"], uid);
  EXPECT_EQ(r.body["alerts"][0]["category"], "suicide_self_harm");

  r = call("POST", "/session", {{"user_id", uid}});
  ASSERT_EQ(r.body["alarms"].size(), 1u);
  EXPECT_EQ(r.body["alarms"][0]["category"], "suicide_self_harm");
  EXPECT_EQ(call("POST", "/users/" + uid + "/alarm/ack").status, 403);
  EXPECT_EQ(call("POST", "/users/" + uid + "/alarm/ack", nullptr, {}, true).status, 200);
  EXPECT_TRUE(call("POST", "/session", {{"user_id", uid}}).body["alarms"].empty());

  r = call("GET", "/users/" + uid + "/timeline", nullptr, {{"window", "1d"}}, true);
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["buckets"].size(), 1u);
  EXPECT_EQ(r.body["buckets"][0]["start"], "2023-05-25T00:00:00Z");
  EXPECT_EQ(call("GET", "/users/" + uid + "/timeline", nullptr, {{"window", "1w"}}, true).status, 400);
  EXPECT_EQ(call("GET", "/users/" + uid + "/timeline", nullptr, {{"window", "1d"}}).status, 403);
  EXPECT_EQ(call("GET", "/users/u9999/timeline", nullptr, {}, true).status, 404);
  EXPECT_EQ(call("GET", "/users/" + hidden + "/timeline", nullptr, {}, true).status, 404);
}

TEST_F(ServiceTest, RestartKeepsUsersReadsAndSessions) {
  const std::string uid = call("POST", "/register", {{"age", 30}, {"gender", "female"}}).body["user_id"];
  const std::string sid = call("POST", "/session", {{"user_id", uid}}).body["session_id"];
  call("POST", "/session/" + sid + "/command", {{"command", "/open t04"}});
  call("POST", "/tales", {{"title", "Kept"}, {"body", "Across restarts."}});

  start();
  EXPECT_TRUE(app->users().is_registered(uid));
  EXPECT_EQ(app->users().find(uid)->read_tales, std::set<std::string>{"t04"});
  EXPECT_EQ(app->reads().events().size(), 1u);
  EXPECT_EQ(app->library().snapshot()->corpus.counts().pending, 1u);
  const std::string next = call("POST", "/session", {{"user_id", uid}}).body["session_id"];
  EXPECT_GT(next, sid);
  EXPECT_TRUE(std::filesystem::exists(dir / "models/emotions.model"));
  const auto logs = dir / "conversations";
  EXPECT_TRUE(std::filesystem::exists(logs));
}

TEST_F(ServiceTest, IdenticalScriptsGiveIdenticalResponses) {
  auto script = [&] {
    std::vector<std::string> out;
    const std::string sid = call("POST", "/session").body["session_id"];
    for (const auto* text : {"I want to search for tales on mental illnesses", "Better only on bipolarity",
                             "I'm tired of looking for tales, I would like to talk to you about emotions",
                             "Tonight I had insomnia"}) {
      auto body = call("POST", "/session/" + sid + "/message", {{"text", text}}).body;
      out.push_back(body.dump());
    }
    return out;
  };
  EXPECT_EQ(script(), script());
}

TEST(ServiceStartup, MissingCorpusNamesThePath) {
  testing::TempDir dir;
  auto config = testing::fixture_config(dir.path());
  config.corpus_dir = dir / "no-corpus";
  ManualClock clock(make_instant(2023, 1, 1));
  try {
    Application app(config, clock);
    FAIL() << "expected startup failure";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find((dir / "no-corpus").string()), std::string::npos);
  }
}

TEST(ServiceStartup, StaleModelSnapshotIsRetrained) {
  testing::TempDir dir;
  const auto file = dir / "intents.model";
  const auto lex = testing::fixture_dir() / "lexicons/intents";
  const auto fresh = load_or_train(classify::expressed_intent_names(), lex, file, 1.0);
  EXPECT_EQ(load_or_train(classify::expressed_intent_names(), lex, file, 1.0), fresh);
  const auto other = load_or_train(classify::expressed_intent_names(), lex, file, 0.5);
  EXPECT_DOUBLE_EQ(other.alpha(), 0.5);
  EXPECT_DOUBLE_EQ(classify::BayesModel::load(file).alpha(), 0.5);
}

TEST(HttpServer, ServesTheApi) {
  testing::TempDir dir;
  ManualClock clock(make_instant(2023, 5, 25));
  Application app(testing::fixture_config(dir.path()), clock);
  HttpServer server(app);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.run(); });

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "ready");
  res = client.Post("/session", "{}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  EXPECT_TRUE(res->has_header("X-Session-Id"));
  res = client.Get("/supervisor/alerts", {{"X-Supervisor-Token", "fixture-supervisor-token"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  server.stop();
  t.join();
}

}  // namespace
}  // namespace talechat::service
