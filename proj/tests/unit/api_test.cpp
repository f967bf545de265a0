#include "qsign/api.hpp"

#include <gtest/gtest.h>

#include "api_harness.hpp"
#include "test_support.hpp"

namespace qsign::api {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;
using testing::ApiHarness;
using testing::mention_update;

TEST(Api, HealthReportsBackend) {
  ApiHarness h;
  auto r = h.client->Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const auto j = json::parse(r->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["backend"], "local_simulator");
  EXPECT_GE(j["uptime_s"].get<int>(), 0);
}

TEST(Api, UnknownGroupIsEmptyNotError) {
  ApiHarness h;
  auto r = h.client->Get("/api/messages/nobody");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body), (json{{"messages", json::array()}, {"leaderboard", json::array()}}));
}

TEST(Api, WebhookSecretGate) {
  ApiHarness h;
  const auto body = mention_update(1, "qsign_bot").body();
  for (const std::string bad : {"", "wrong", "hook-secre", "hook-secret!"}) {
    auto r = h.webhook("g", body, bad);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 401) << bad;
  }
  h.ingestor.wait_idle();
  EXPECT_EQ(h.store.record_count(), 0u);

  auto ok = h.webhook("g", body);
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(json::parse(ok->body), (json{{"ok", true}, {"status", "acknowledged"}}));
}

TEST(Api, WebhookBadJsonAndIgnoredUpdates) {
  ApiHarness h;
  EXPECT_EQ(h.webhook("g", "{nope")->status, 400);
  testing::UpdateBuilder b;
  b.text = "no mention here";
  auto r = h.webhook("g", b.body());
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["status"], "ignored");
  EXPECT_EQ(h.store.record_count(), 0u);
}

TEST(Api, PublicProjectionOfCompletedCard) {
  ApiHarness h;
  h.webhook("g", mention_update(5, "qsign_bot").body());
  h.ingestor.wait_idle();
  const auto j = h.messages("g");
  ASSERT_EQ(j["messages"].size(), 1u);
  const auto& m = j["messages"][0];
  EXPECT_EQ(m["message_id"], "5");
  EXPECT_EQ(m["signature_status"], "completed");
  EXPECT_TRUE(m["photo_url"].is_null());
  EXPECT_TRUE(m["badge"]["text"].get<std::string>().starts_with("Q#"));
  EXPECT_TRUE(m["badge"]["css_color"].get<std::string>().starts_with("hsl("));
  EXPECT_FALSE(m["provenance"].contains("rng_seed"));
  EXPECT_FALSE(m["provenance"]["fallback"].get<bool>());
  EXPECT_EQ(j["leaderboard"], (json::array({{{"sender_handle", "alice"}, {"count", 1}}})));
}

TEST(Api, GeneratingCardHasNoBadge) {
  auto hanging = std::make_shared<testing::HangingBackend>();
  ApiHarness h(hanging, 10s);
  h.webhook("g", mention_update(6, "qsign_bot").body());
  const auto m = h.messages("g")["messages"][0];
  EXPECT_EQ(m["signature_status"], "generating");
  EXPECT_FALSE(m.contains("badge"));
  EXPECT_FALSE(m.contains("provenance"));
  hanging->release();
  h.ingestor.wait_idle();
}

TEST(Api, SinceFiltersByTimestamp) {
  ApiHarness h;
  for (int i = 1; i <= 3; ++i) {
    auto b = mention_update(i, "qsign_bot");
    b.date_s = 1700000000 + i;
    h.webhook("g", b.body());
  }
  h.ingestor.wait_idle();
  auto r = h.client->Get("/api/messages/g?since=1700000002000");
  const auto j = json::parse(r->body);
  ASSERT_EQ(j["messages"].size(), 1u);
  EXPECT_EQ(j["messages"][0]["message_id"], "3");
  EXPECT_EQ(h.client->Get("/api/messages/g?since=abc")->status, 400);
}

TEST(Api, AdminRoutesRequireBearer) {
  ApiHarness h;
  h.webhook("g", mention_update(1, "qsign_bot").body());
  h.ingestor.wait_idle();
  const json patch = {{"id", "1"}, {"x_pct", 10}, {"y_pct", 20}};
  for (const httplib::Headers& hdr :
       {httplib::Headers{}, ApiHarness::bearer("deadbeef"), httplib::Headers{{"Authorization", "Basic x"}}}) {
    EXPECT_EQ(h.client->Delete("/api/messages/g?id=1", hdr)->status, 401);
    EXPECT_EQ(h.client->Patch("/api/messages/g", hdr, patch.dump(), "application/json")->status, 401);
    EXPECT_EQ(h.client->Get("/api/admin/messages/g", hdr)->status, 401);
  }
  const auto r = h.store.get("g", "1");
  EXPECT_FALSE(r->hidden);
  EXPECT_FALSE(r->position);
}

TEST(Api, LoginFlow) {
  ApiHarness h;
  auto bad = h.client->Post("/api/admin", json{{"password", "nope"}}.dump(), "application/json");
  EXPECT_EQ(bad->status, 401);
  EXPECT_EQ(bad->body.find("token"), std::string::npos);
  EXPECT_EQ(h.client->Post("/api/admin", "[]", "application/json")->status, 400);

  auto good = h.client->Post("/api/admin", json{{"password", testing::kPassword}}.dump(), "application/json");
  ASSERT_EQ(good->status, 200);
  const auto j = json::parse(good->body);
  EXPECT_EQ(j["token"].get<std::string>().size(), 64u);
  EXPECT_EQ(j["expires_in_s"], 12 * 3600);
  EXPECT_NE(good->body.find("token"), std::string::npos);
  EXPECT_EQ(good->body.find(testing::kPassword), std::string::npos);
}

TEST(Api, SoftDeleteHidesFromPublicButNotAdmin) {
  ApiHarness h;
  h.webhook("g", mention_update(1, "qsign_bot").body());
  h.webhook("g", mention_update(2, "qsign_bot").body());
  h.ingestor.wait_idle();
  const auto token = h.login();
  ASSERT_FALSE(token.empty());

  EXPECT_EQ(h.client->Delete("/api/messages/g?id=1", ApiHarness::bearer(token))->status, 200);
  EXPECT_EQ(h.client->Delete("/api/messages/g", ApiHarness::bearer(token))->status, 400);
  EXPECT_EQ(h.client->Delete("/api/messages/g?id=99", ApiHarness::bearer(token))->status, 404);

  const auto pub = h.messages("g");
  ASSERT_EQ(pub["messages"].size(), 1u);
  EXPECT_EQ(pub["messages"][0]["message_id"], "2");

  auto adm = h.client->Get("/api/admin/messages/g", ApiHarness::bearer(token));
  ASSERT_EQ(adm->status, 200);
  const auto rows = json::parse(adm->body)["messages"];
  ASSERT_EQ(rows.size(), 2u);
  int hidden = 0;
  for (const auto& row : rows) {
    hidden += row["hidden"].get<bool>();
    EXPECT_EQ(row["audit"]["device"], "SV1-embedded");
    EXPECT_EQ(row["audit"]["bell_state"].size(), 4u);
    EXPECT_EQ(row["audit"]["signature_status"], "completed");
  }
  EXPECT_EQ(hidden, 1);
}

TEST(Api, PatchPosition) {
  ApiHarness h;
  h.webhook("g", mention_update(1, "qsign_bot").body());
  h.ingestor.wait_idle();
  const auto hdr = ApiHarness::bearer(h.login());
  auto patch = [&](const json& body) { return h.client->Patch("/api/messages/g", hdr, body.dump(), "application/json")->status; };
  EXPECT_EQ(patch({{"id", "1"}, {"x_pct", 12.5}, {"y_pct", 80}}), 200);
  EXPECT_EQ(patch({{"id", "1"}, {"x_pct", 101}, {"y_pct", 0}}), 422);
  EXPECT_EQ(patch({{"id", "1"}, {"x_pct", -0.1}, {"y_pct", 0}}), 422);
  EXPECT_EQ(patch({{"id", "404"}, {"x_pct", 1}, {"y_pct", 1}}), 404);
  EXPECT_EQ(patch({{"x_pct", 1}}), 400);
  const auto m = h.messages("g")["messages"][0];
  EXPECT_EQ(m["position"], (json{{"x_pct", 12.5}, {"y_pct", 80.0}}));
}

TEST(Api, GroupsListing) {
  ApiHarness h;
  h.webhook("a", mention_update(1, "qsign_bot").body());
  h.webhook("b", mention_update(1, "qsign_bot").body());
  h.ingestor.wait_idle();
  const auto j = json::parse(h.client->Get("/api/groups")->body);
  ASSERT_EQ(j["groups"].size(), 2u);
  EXPECT_EQ(j["groups"][0]["group_id"], "a");
  EXPECT_EQ(j["groups"][0]["message_count"], 1);
}

TEST(Api, PhotosServedByKey) {
  ApiHarness h;
  const std::vector<std::uint8_t> png = {1, 2, 3};
  const auto key = h.store.put_blob(png, "image/png").key;
  auto r = h.client->Get("/api/photos/" + key);
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(r->body, std::string("\x01\x02\x03", 3));
  EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(h.client->Get("/api/photos/" + std::string(64, '0'))->status, 404);
}

TEST(Api, FallbackFlagOnTimedOutCards) {
  ApiHarness h(std::make_shared<testing::HangingBackend>(), 50ms);
  h.webhook("g", mention_update(1, "qsign_bot").body());
  h.ingestor.wait_idle();
  const auto m = h.messages("g")["messages"][0];
  EXPECT_EQ(m["signature_status"], "completed");
  EXPECT_TRUE(m["provenance"]["fallback"].get<bool>());
  EXPECT_EQ(m["provenance"]["device"], "local-fallback");
}

TEST(TokenStore, Expiry) {
  TokenStore tokens(30ms);
  const auto t = tokens.issue();
  EXPECT_TRUE(tokens.valid(t));
  EXPECT_FALSE(tokens.valid(""));
  EXPECT_FALSE(tokens.valid(t + "0"));
  std::this_thread::sleep_for(60ms);
  EXPECT_FALSE(tokens.valid(t));
}

TEST(Api, CssColor) { EXPECT_EQ(css_color({137.5, 85, 55}), "hsl(137.5, 85%, 55%)"); }

}  // namespace
}  // namespace qsign::api
