#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jitai/gateway.hpp"

#include "httplib.h"

#include <thread>

using namespace jitai;

namespace {

std::string survey_line(const char* id, const char* ended, double lat = 1.30) {
  MicroSurveyResponse s;
  s.participant = ParticipantId{id};
  s.ended_at = *parse_rfc3339(ended);
  s.started_at = s.ended_at - seconds{10};
  s.lat = lat;
  s.lon = 103.8;
  s.location_acquired_at = s.started_at;
  s.thermal = PreferenceLabel::thermal_cooler();
  s.noise = PreferenceLabel::noise_no_change();
  return record_to_jsonl_line(Record{s});
}

}  // namespace

TEST_CASE("handle_ingest: per-line status without fail-fast") {
  TimeSeriesStore store;
  std::string body = survey_line("p001", "2022-10-17T02:00:00Z") + "\n" +
                     "{broken\n" +
                     survey_line("p001", "2022-10-17T03:00:00Z") + "\n" +
                     R"({"series":"sensor","id_participant":"p001","kind":"sound_level",)"
                     R"("value":400.0,"observed_at":"2022-10-17T02:30:00Z"})" "\n";
  auto response = handle_ingest(store, body);
  CHECK(response.status == 207);
  CHECK(response.body["appended"] == 2);
  REQUIRE(response.body["errors"].size() == 2);
  CHECK(response.body["errors"][0]["line"] == 2);
  CHECK(response.body["errors"][1]["line"] == 4);

  // clean body -> 200; garbage-only body -> 400
  CHECK(handle_ingest(store, survey_line("p002", "2022-10-17T02:00:00Z") + "\n").status == 200);
  CHECK(handle_ingest(store, "nope\n").status == 400);
  CHECK(handle_ingest(store, "").status == 200);
}

TEST_CASE("handle_export: series selection and time bounds") {
  TimeSeriesStore store;
  handle_ingest(store, survey_line("p001", "2022-10-17T02:00:00Z") + "\n" +
                           survey_line("p001", "2022-10-17T05:00:00Z") + "\n");

  auto all = handle_export(store, "survey", "", "");
  CHECK(all.status == 200);
  CHECK(all.content_type == "text/csv");
  auto parsed = csv::parse(all.body);
  REQUIRE(parsed.ok());
  CHECK(parsed->size() == 2);

  auto bounded = handle_export(store, "survey", "2022-10-17T03:00:00Z", "");
  auto bounded_parsed = csv::parse(bounded.body);
  REQUIRE(bounded_parsed.ok());
  CHECK(bounded_parsed->size() == 1);

  CHECK(handle_export(store, "pulse", "", "").status == 400);
  CHECK(handle_export(store, "survey", "yesterday", "").status == 400);

  // empty store: header-only CSV
  TimeSeriesStore empty;
  auto none = handle_export(empty, "weather", "", "");
  CHECK(none.status == 200);
  CHECK(none.body == std::string(csv::kHeader) + "\n");
}

TEST_CASE("gateway over a live loopback server") {
  TimeSeriesStore store;
  httplib::Server server;
  attach_gateway(server, store);
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  std::string body = survey_line("p001", "2022-10-17T02:00:00Z") + "\n{bad}\n";
  auto post = client.Post("/ingest", body, "application/x-ndjson");
  REQUIRE(post);
  CHECK(post->status == 207);
  auto report = nlohmann::json::parse(post->body);
  CHECK(report["appended"] == 1);
  CHECK(report["errors"][0]["line"] == 2);

  auto get = client.Get("/export?series=survey");
  REQUIRE(get);
  CHECK(get->status == 200);
  CHECK(get->get_header_value("Content-Type").find("text/csv") == 0);
  auto parsed = csv::parse(get->body);
  REQUIRE(parsed.ok());
  CHECK(parsed->size() == 1);

  server.stop();
  worker.join();
}
