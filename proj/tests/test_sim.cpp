#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jitai/sim.hpp"

#include <cmath>
#include <set>

using namespace jitai;

namespace {

CohortSpec small_cohort(int n, Phase phase, const char* weather) {
  CohortSpec spec;
  spec.n_participants = n;
  spec.phase = phase;
  spec.duration_weekdays = 10;
  spec.rng_seed = 20221017;
  spec.weather_fixture = weather;
  spec.defaults.surveys_per_day = 8.0;
  spec.defaults.sound.base_dba = 55.0;
  spec.defaults.sound.noise_sd = 3.0;
  // strongly hour-shaped preferences so personalization has signal
  spec.defaults.thermal.base = {0.05, 0.9, 0.05};
  spec.defaults.thermal.rules = {{12, 17, {0.9, 0.05, 0.05}}};
  spec.defaults.noise.base = {0.1, 0.85, 0.05};
  return spec;
}

EngineConfig default_engine(const CohortSpec& spec) {
  return *engine_config_from_json(nlohmann::json::object(), spec);
}

std::string streams_fingerprint(const CohortStreams& streams) {
  std::string out;
  for (const auto& s : streams.surveys) out += record_to_jsonl_line(Record{s}) + "\n";
  for (const auto& s : streams.sound_samples) out += record_to_jsonl_line(Record{s}) + "\n";
  return out;
}

}  // namespace

TEST_CASE("empty cohort yields empty streams") {
  auto spec = small_cohort(0, Phase::Phase1, "never_hot");
  auto streams = generate_cohort(spec, TriggerConfig{}.timezone);
  CHECK(streams.surveys.empty());
  CHECK(streams.sound_samples.empty());
  CHECK(streams.locations.empty());
}

TEST_CASE("generation is deterministic for a fixed seed") {
  auto spec = small_cohort(4, Phase::Phase1, "diurnal");
  const TimeZone tz = TriggerConfig{}.timezone;
  auto a = generate_cohort(spec, tz);
  auto b = generate_cohort(spec, tz);
  CHECK(streams_fingerprint(a) == streams_fingerprint(b));

  spec.rng_seed += 1;
  auto c = generate_cohort(spec, tz);
  CHECK(streams_fingerprint(a) != streams_fingerprint(c));
}

TEST_CASE("generated records respect window, weekday, and validity") {
  auto spec = small_cohort(3, Phase::Phase1, "diurnal");
  const TimeZone tz = TriggerConfig{}.timezone;
  auto streams = generate_cohort(spec, tz);
  REQUIRE_FALSE(streams.surveys.empty());
  for (const auto& survey : streams.surveys) {
    CHECK(validate(survey).empty());
    const auto local = tz.to_local(survey.ended_at);
    CHECK(local.iso_weekday <= 5);
    CHECK(local.hour >= 9);
    CHECK(local.hour < 19);
  }
  // 30-minute cadence per participant per weekday: 20 samples/day
  std::map<std::string, int> samples_per_participant;
  for (const auto& sample : streams.sound_samples) {
    CHECK(validate(sample).empty());
    ++samples_per_participant[sample.participant.value];
  }
  for (const auto& [_, count] : samples_per_participant) {
    CHECK(count == 20 * spec.duration_weekdays);
  }
}

TEST_CASE("survey volume tracks the Poisson expectation within 3 sigma") {
  auto spec = small_cohort(5, Phase::Phase1, "never_hot");
  spec.duration_weekdays = 20;
  spec.defaults.surveys_per_day = 5.0;
  auto streams = generate_cohort(spec, TriggerConfig{}.timezone);
  std::map<std::string, int> per_participant;
  for (const auto& s : streams.surveys) ++per_participant[s.participant.value];
  const double mean = 5.0 * 20;
  const double sigma = std::sqrt(mean);
  REQUIRE(per_participant.size() == 5);
  for (const auto& [id, count] : per_participant) {
    CHECK(std::abs(count - mean) <= 3 * sigma);
  }
}

TEST_CASE("cool weather and quiet cohort produce zero messages") {
  auto spec = small_cohort(2, Phase::Phase1, "never_hot");
  spec.duration_weekdays = 5;
  auto run = run_phase(spec, default_engine(spec));
  REQUIRE(run.ok());
  CHECK((*run)->notifications.empty());
  CHECK((*run)->outbox.outbox().empty());
}

TEST_CASE("all-no-change cohort gets threshold but never personalized messages") {
  auto spec = small_cohort(2, Phase::Phase2, "always_hot");
  spec.duration_weekdays = 12;
  spec.defaults.surveys_per_day = 10.0;  // hits 50 surveys within the run
  spec.defaults.thermal = PreferenceMixture::constant_no_change();
  spec.defaults.noise = PreferenceMixture::constant_no_change();
  auto run = run_phase(spec, default_engine(spec));
  REQUIRE(run.ok());
  auto table = summarize((*run)->notifications);
  REQUIRE(table.size() == 2);
  for (const auto& row : table) {
    CHECK(row.threshold_sent > 0);
    CHECK(row.personalized_sent == 0);
  }
}

TEST_CASE("phase 1 runs never contain personalized records") {
  auto spec = small_cohort(2, Phase::Phase1, "always_hot");
  spec.duration_weekdays = 8;
  spec.defaults.surveys_per_day = 12.0;  // well past 50 surveys
  auto run = run_phase(spec, default_engine(spec));
  REQUIRE(run.ok());
  REQUIRE_FALSE((*run)->notifications.empty());
  for (const auto& record : (*run)->notifications) {
    CHECK(record.event.mechanism == TriggerMechanism::Threshold);
  }
}

TEST_CASE("phase 2 mechanism provenance is ordered around the 50th survey") {
  auto spec = small_cohort(3, Phase::Phase2, "always_hot");
  spec.duration_weekdays = 12;
  spec.defaults.surveys_per_day = 10.0;
  auto config = default_engine(spec);
  auto run = run_phase(spec, config);
  REQUIRE(run.ok());

  const auto& result = **run;
  for (const ParticipantId& p : result.participants) {
    // the 50th survey's end time, from the generated stream
    int count = 0;
    UtcTime fiftieth = UtcTime::max();
    for (const auto& s : result.cohort.surveys) {
      if (s.participant == p && ++count == config.phase.personalization_switch_count) {
        fiftieth = s.ended_at;
        break;
      }
    }
    REQUIRE(count == config.phase.personalization_switch_count);

    bool saw_personalized = false;
    for (const auto& record : result.notifications) {
      if (record.event.participant != p) continue;
      if (record.event.mechanism == TriggerMechanism::Threshold) {
        CHECK(record.event.fired_at < fiftieth);
      } else {
        saw_personalized = true;
        CHECK(record.event.fired_at > fiftieth);
        CHECK_FALSE(record.event.target_label.is_no_change());
      }
    }
    CHECK(saw_personalized);
  }
}

TEST_CASE("summarize partitions the log exactly") {
  CHECK(summarize({}).empty());

  auto spec = small_cohort(3, Phase::Phase2, "diurnal");
  spec.duration_weekdays = 10;
  spec.defaults.surveys_per_day = 9.0;
  auto run = run_phase(spec, default_engine(spec));
  REQUIRE(run.ok());
  const auto& log = (*run)->notifications;
  auto table = summarize(log);

  int total = 0, sent = 0;
  for (const auto& row : table) total += row.total();
  for (const auto& record : log) sent += record.is_sent() ? 1 : 0;
  CHECK(total == int(log.size()));
  int sent_in_table = 0;
  for (const auto& row : table) sent_in_table += row.threshold_sent + row.personalized_sent;
  CHECK(sent_in_table == sent);
  CHECK(sent == int((*run)->outbox.outbox().size()));

  // csv round trip
  auto csv_text = summary_csv(table);
  auto parsed = summary_from_csv(csv_text);
  REQUIRE(parsed.ok());
  CHECK(*parsed == table);
}

TEST_CASE("only some participants receive personalized messages") {
  auto spec = small_cohort(6, Phase::Phase2, "always_hot");
  spec.duration_weekdays = 12;
  spec.defaults.surveys_per_day = 10.0;
  // half the cohort reports no-change everywhere: their plans stay empty
  for (int i = 0; i < 3; ++i) {
    ParticipantSpec flat = spec.defaults;
    flat.thermal = PreferenceMixture::constant_no_change();
    flat.noise = PreferenceMixture::constant_no_change();
    spec.participant_overrides.push_back(flat);
  }
  auto run = run_phase(spec, default_engine(spec));
  REQUIRE(run.ok());
  auto table = summarize((*run)->notifications);
  int threshold_recipients = 0, personalized_recipients = 0;
  for (const auto& row : table) {
    threshold_recipients += row.threshold_sent > 0 ? 1 : 0;
    personalized_recipients += row.personalized_sent > 0 ? 1 : 0;
  }
  CHECK(threshold_recipients == 6);
  CHECK(personalized_recipients < threshold_recipients);
  CHECK(personalized_recipients >= 1);
  // the flat-preference participants got none
  for (int i = 0; i < 3; ++i) {
    const auto& row = *std::find_if(table.begin(), table.end(), [&](const auto& r) {
      return r.participant == participant_id(i).value;
    });
    CHECK(row.personalized_sent == 0);
  }
}

TEST_CASE("run_phase is deterministic end to end") {
  auto spec = small_cohort(2, Phase::Phase2, "diurnal");
  spec.duration_weekdays = 8;
  spec.defaults.surveys_per_day = 10.0;
  auto config = default_engine(spec);
  auto a = run_phase(spec, config);
  auto b = run_phase(spec, config);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(to_jsonl((*a)->store) == to_jsonl((*b)->store));
  CHECK((*a)->outbox.outbox_jsonl() == (*b)->outbox.outbox_jsonl());
  CHECK(summary_csv(summarize((*a)->notifications)) ==
        summary_csv(summarize((*b)->notifications)));
}

TEST_CASE("toml subset parses a cohort file equivalently to json") {
  const char* toml = R"(# sample cohort
n_participants = 4
phase = "phase2"
duration_weekdays = 15
rng_seed = 99
start_date = "2022-10-17"
weather = "diurnal"

[defaults]
surveys_per_day = 6.5

[defaults.sound]
base_dba = 58.0
noise_sd = 4.0
lunch_bump_dba = 14.0

[defaults.thermal_mixture]
base = [0.1, 0.8, 0.1]

[[defaults.thermal_mixture.rules]]
from = 13
to = 16
probs = [0.8, 0.15, 0.05]

[[participants]]
surveys_per_day = 3.0

[[participants]]
waypoints = [[1.2966, 103.7764], [1.3001, 103.7812]]
)";
  auto parsed = parse_toml_lite(toml);
  REQUIRE(parsed.ok());
  auto spec = cohort_from_json(*parsed);
  REQUIRE(spec.ok());
  CHECK(spec->n_participants == 4);
  CHECK(spec->phase == Phase::Phase2);
  CHECK(spec->duration_weekdays == 15);
  CHECK(spec->rng_seed == 99);
  CHECK(spec->start_day == *parse_date("2022-10-17"));
  CHECK(spec->defaults.surveys_per_day == 6.5);
  CHECK(spec->defaults.sound.lunch_bump_dba == 14.0);
  CHECK(spec->defaults.thermal.base[1] == 0.8);
  REQUIRE(spec->defaults.thermal.rules.size() == 1);
  CHECK(spec->defaults.thermal.rules[0].from_hour == 13);
  REQUIRE(spec->participant_overrides.size() == 2);
  CHECK(spec->participant_overrides[0].surveys_per_day == 3.0);
  // overrides inherit unset fields from defaults
  CHECK(spec->participant_overrides[0].sound.base_dba == 58.0);
  REQUIRE(spec->participant_overrides[1].waypoints.size() == 2);
  CHECK(spec->participant_overrides[1].waypoints[0].lat == 1.2966);

  // bad configs are rejected
  CHECK_FALSE(cohort_from_json(nlohmann::json::parse(R"({"phase":"phase9"})")).ok());
  auto bad_mix = nlohmann::json::parse(
      R"({"n_participants":1,"defaults":{"thermal_mixture":{"base":[0.5,0.2,0.1]}}})");
  CHECK_FALSE(cohort_from_json(bad_mix).ok());
  CHECK_FALSE(parse_toml_lite("key = ").ok());
  CHECK_FALSE(parse_toml_lite("[unclosed\n").ok());
}

TEST_CASE("weather fixtures span the run and follow their scenario") {
  const TimeZone tz = TriggerConfig{}.timezone;
  auto stations = default_stations();
  auto csv = make_weather_fixture_csv("diurnal", stations, 19282, 19282, tz);
  auto provider = FixtureWeatherProvider::from_csv_text(csv);
  REQUIRE(provider.ok());
  CHECK(provider->stations().size() == stations.size());

  const UtcTime day_start = tz.local_day_start(19282);
  // crosses 30 C upward at 11:00 local: below at 10:55, at 30 at 11:00
  auto before = provider->latest(stations[0].id, day_start + std::chrono::hours{10} + minutes{55});
  auto at_11 = provider->latest(stations[0].id, day_start + std::chrono::hours{11});
  auto at_13 = provider->latest(stations[0].id, day_start + std::chrono::hours{13});
  auto evening = provider->latest(stations[0].id, day_start + std::chrono::hours{18});
  REQUIRE(before.has_value());
  REQUIRE(at_13.has_value());
  CHECK(before->air_temperature_c < 30.0);
  CHECK(at_11->air_temperature_c == 30.0);
  CHECK(at_13->air_temperature_c == 32.0);
  CHECK(evening->air_temperature_c > 28.0);
  CHECK(evening->air_temperature_c < 30.0);
}
