#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jitai/dispatch.hpp"

#include "httplib.h"
#include "json.hpp"

#include <thread>

using namespace jitai;

namespace {

const TimeZone kSgt = *TimeZone::lookup("Asia/Singapore");

TriggerEvent thermal_threshold_event(double temp) {
  TriggerEvent e;
  e.participant = ParticipantId{"p001"};
  e.kind = LabelKind::Thermal;
  e.mechanism = TriggerMechanism::Threshold;
  e.target_label = PreferenceLabel::thermal_cooler();
  e.fired_at = *parse_rfc3339("2022-10-17T02:00:00Z");  // 10:00 SGT
  e.cause = TriggerCause::temperature(temp);
  return e;
}

TriggerEvent personalized_event(LabelKind kind, PreferenceLabel label, double p) {
  TriggerEvent e;
  e.participant = ParticipantId{"p001"};
  e.kind = kind;
  e.mechanism = TriggerMechanism::Personalized;
  e.target_label = label;
  e.fired_at = *parse_rfc3339("2022-10-17T06:00:00Z");  // 14:00 SGT
  e.cause = TriggerCause::probability(p);
  return e;
}

}  // namespace

TEST_CASE("render substitutes the cause to one decimal") {
  auto templates = MessageTemplates::defaults();
  auto text = templates.render(thermal_threshold_event(31.2), kSgt);
  REQUIRE(text.ok());
  CHECK(text->find("31.2") != std::string::npos);
  CHECK(text->find('{') == std::string::npos);

  // noise threshold renders the dBA value
  TriggerEvent noise = thermal_threshold_event(74.3);
  noise.kind = LabelKind::Noise;
  noise.target_label = PreferenceLabel::noise_quieter();
  noise.cause = TriggerCause::sound(74.3);
  auto noise_text = templates.render(noise, kSgt);
  REQUIRE(noise_text.ok());
  CHECK(noise_text->find("74.3") != std::string::npos);
}

TEST_CASE("template without placeholders renders verbatim") {
  auto custom = MessageTemplates::from_json_text(R"({
    "thermal.threshold": "hot outside",
    "noise.threshold": "loud outside",
    "thermal.prefer_cooler": "cooler time",
    "thermal.prefer_warmer": "warmer time",
    "noise.prefer_quieter": "quieter time",
    "noise.prefer_louder": "louder time"
  })");
  REQUIRE(custom.ok());
  TriggerEvent noise = thermal_threshold_event(74.3);
  noise.kind = LabelKind::Noise;
  noise.cause = TriggerCause::sound(74.3);
  auto text = custom->render(noise, kSgt);
  REQUIRE(text.ok());
  CHECK(*text == "loud outside");
}

TEST_CASE("every (kind,label) key renders without error") {
  auto templates = MessageTemplates::defaults();
  std::vector<TriggerEvent> events;
  events.push_back(thermal_threshold_event(31.2));
  TriggerEvent noise = thermal_threshold_event(74.3);
  noise.kind = LabelKind::Noise;
  noise.target_label = PreferenceLabel::noise_quieter();
  noise.cause = TriggerCause::sound(74.3);
  events.push_back(noise);
  events.push_back(
      personalized_event(LabelKind::Thermal, PreferenceLabel::thermal_cooler(), 0.8));
  events.push_back(
      personalized_event(LabelKind::Thermal, PreferenceLabel::thermal_warmer(), 0.7));
  events.push_back(personalized_event(LabelKind::Noise, PreferenceLabel::noise_quieter(), 0.6));
  events.push_back(personalized_event(LabelKind::Noise, PreferenceLabel::noise_louder(), 0.5));

  for (const auto& event : events) {
    auto text = templates.render(event, kSgt);
    REQUIRE(text.ok());
    CHECK_FALSE(text->empty());
    CHECK(text->find('{') == std::string::npos);
  }
  // the personalized ones carry the local hour
  auto personalized = templates.render(events[2], kSgt);
  CHECK(personalized->find("14:00") != std::string::npos);
}

TEST_CASE("template file loading validates keys and placeholders") {
  CHECK_FALSE(MessageTemplates::from_json_text("[1,2]").ok());
  CHECK_FALSE(MessageTemplates::from_json_text(R"({"thermal.threshold": "x"})").ok());
  CHECK_FALSE(MessageTemplates::from_json_text(R"({
    "thermal.threshold": "bad {placeholder}",
    "noise.threshold": "x", "thermal.prefer_cooler": "x",
    "thermal.prefer_warmer": "x", "noise.prefer_quieter": "x",
    "noise.prefer_louder": "x"
  })").ok());
}

TEST_CASE("mock provider records an inspectable outbox") {
  MockPushProvider provider;
  PushMessage m{"p001", "jitai", "It is 31.2 C outside", *parse_rfc3339("2022-10-17T02:00:00Z")};
  auto receipt = provider.send(m);
  CHECK(receipt.accepted);
  REQUIRE(provider.outbox().size() == 1);
  CHECK(provider.outbox()[0] == m);

  auto jsonl = provider.outbox_jsonl();
  auto parsed = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  CHECK(parsed["recipient"] == "p001");
  CHECK(parsed["sent_at"] == "2022-10-17T02:00:00Z");
}

TEST_CASE("failing provider leaves no outbox entry") {
  FailingPushProvider provider;
  auto receipt = provider.send({"p001", "t", "b", UtcTime{}});
  CHECK_FALSE(receipt.accepted);
  CHECK(receipt.reason == "connection refused");
}

TEST_CASE("http push provider posts the wire shape with auth header") {
  httplib::Server server;
  nlohmann::json seen_body;
  std::string seen_auth;
  server.Post("/push", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = nlohmann::json::parse(req.body, nullptr, false);
    if (req.has_header("Authorization")) seen_auth = req.get_header_value("Authorization");
    res.set_content("{\"ok\":true}", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpPushProvider provider("http://127.0.0.1:" + std::to_string(port) + "/push", "secret-key");
  auto receipt = provider.send(
      {"p001", "jitai", "message body", *parse_rfc3339("2022-10-17T02:00:00Z")});
  CHECK(receipt.accepted);
  CHECK(seen_auth == "Bearer secret-key");
  CHECK(seen_body["recipient"] == "p001");
  CHECK(seen_body["body"] == "message body");

  server.stop();
  worker.join();

  HttpPushProvider dead("http://127.0.0.1:1/push", "");
  CHECK_FALSE(dead.send({"p", "t", "b", UtcTime{}}).accepted);
}
