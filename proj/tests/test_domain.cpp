#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jitai/domain.hpp"
#include "jitai/rng.hpp"

#include <algorithm>

using namespace jitai;

namespace {

MicroSurveyResponse valid_survey() {
  MicroSurveyResponse s;
  s.participant = ParticipantId{"p001"};
  s.started_at = *parse_rfc3339("2022-10-17T02:00:00Z");
  s.ended_at = *parse_rfc3339("2022-10-17T02:00:15Z");
  s.lat = 1.3521;
  s.lon = 103.8198;
  s.location_acquired_at = s.started_at;
  s.thermal = PreferenceLabel::thermal_cooler();
  s.noise = PreferenceLabel::noise_no_change();
  return s;
}

bool has_field(const std::vector<ValidationError>& errors, std::string_view field) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const ValidationError& e) { return e.field == field; });
}

}  // namespace

TEST_CASE("timezone lookup and civil conversion") {
  auto sgt = TimeZone::lookup("Asia/Singapore");
  REQUIRE(sgt.has_value());
  CHECK(sgt->offset() == minutes{480});

  // 2022-10-17 was a Monday; 01:05Z is 09:05 in Singapore.
  auto t = *parse_rfc3339("2022-10-17T01:05:00Z");
  auto local = sgt->to_local(t);
  CHECK(local.year == 2022);
  CHECK(local.month == 10);
  CHECK(local.day == 17);
  CHECK(local.hour == 9);
  CHECK(local.minute == 5);
  CHECK(local.iso_weekday == 1);
  CHECK_FALSE(local.is_weekend());

  auto sunday = sgt->to_local(*parse_rfc3339("2022-10-23T01:05:00Z"));
  CHECK(sunday.iso_weekday == 7);
  CHECK(sunday.is_weekend());

  CHECK_FALSE(TimeZone::lookup("America/New_York").has_value());  // DST zone, unsupported
  auto offset = TimeZone::lookup("UTC+05:30");
  REQUIRE(offset.has_value());
  CHECK(offset->offset() == minutes{330});
}

TEST_CASE("rfc3339 round trip") {
  const char* texts[] = {"1999-12-31T23:59:59Z", "2022-10-17T00:00:00Z",
                         "2023-05-01T12:34:56Z"};
  for (const char* text : texts) {
    auto t = parse_rfc3339(text);
    REQUIRE(t.has_value());
    CHECK(format_rfc3339(*t) == text);
  }
  // offset forms normalize to Z
  auto t = parse_rfc3339("2022-10-17T09:05:00+08:00");
  REQUIRE(t.has_value());
  CHECK(format_rfc3339(*t) == "2022-10-17T01:05:00Z");
  CHECK_FALSE(parse_rfc3339("2022-13-01T00:00:00Z").has_value());
  CHECK_FALSE(parse_rfc3339("not a time").has_value());
}

TEST_CASE("label sets are closed") {
  CHECK(PreferenceLabel::parse(LabelKind::Thermal, "prefer_cooler").has_value());
  CHECK(PreferenceLabel::parse(LabelKind::Noise, "prefer_louder").has_value());
  CHECK_FALSE(PreferenceLabel::parse(LabelKind::Thermal, "prefer_quieter").has_value());
  CHECK_FALSE(PreferenceLabel::parse(LabelKind::Noise, "warmer").has_value());
  CHECK_FALSE(PreferenceLabel::parse(LabelKind::Thermal, "").has_value());

  CHECK(PreferenceLabel::thermal_no_change().is_no_change());
  CHECK(PreferenceLabel::noise_no_change().is_no_change());
  CHECK(PreferenceLabel::thermal_no_change().class_index() == kNoChangeIndex);
  CHECK(PreferenceLabel::noise_no_change().class_index() == kNoChangeIndex);
  CHECK_FALSE(parse_sound_source("whistling").has_value());
}

TEST_CASE("survey validation") {
  CHECK(validate(valid_survey()).empty());

  auto s = valid_survey();
  s.lat = 95.0;
  auto errors = validate(s);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].field == "lat");

  s = valid_survey();
  s.lon = -181.0;
  CHECK(has_field(validate(s), "lon"));

  s = valid_survey();
  s.started_at = s.ended_at + seconds{1};
  CHECK(has_field(validate(s), "started_at"));

  s = valid_survey();
  s.participant = ParticipantId{""};
  CHECK(has_field(validate(s), "participant"));

  // source without distraction
  s = valid_survey();
  s.noise = PreferenceLabel::noise_no_change();
  s.sound_source = SoundSource::Traffic;
  CHECK(has_field(validate(s), "sound_source"));

  s.noise = PreferenceLabel::noise_quieter();
  CHECK(validate(s).empty());
}

TEST_CASE("sound_source/noise invariant over all combinations") {
  // enumerate every (noise label, source present) pair and cross-check
  // against the rule evaluated independently
  for (int idx = 0; idx < kClassesPerKind; ++idx) {
    for (bool with_source : {false, true}) {
      auto s = valid_survey();
      s.noise = *PreferenceLabel::from_index(LabelKind::Noise, idx);
      if (with_source) s.sound_source = SoundSource::Talking;
      const bool expect_error = with_source && idx == kNoChangeIndex;
      CHECK(has_field(validate(s), "sound_source") == expect_error);
    }
  }
}

TEST_CASE("sensor validation") {
  SensorSample sound{ParticipantId{"p001"}, SensorKind::SoundLevel, 70.0, UtcTime{}};
  CHECK(validate(sound).empty());
  sound.value = 140.0;
  CHECK(validate(sound).empty());
  sound.value = 140.5;
  CHECK(has_field(validate(sound), "value"));
  sound.value = -1.0;
  CHECK(has_field(validate(sound), "value"));

  SensorSample hr{ParticipantId{"p001"}, SensorKind::HeartRate, 72.0, UtcTime{}};
  CHECK(validate(hr).empty());
  hr.value = 20.0;  // open interval
  CHECK(has_field(validate(hr), "value"));
  hr.value = 250.0;
  CHECK(has_field(validate(hr), "value"));

  SensorSample spo2{ParticipantId{"p001"}, SensorKind::OxygenSaturation, 0.97, UtcTime{}};
  CHECK(validate(spo2).empty());
  spo2.value = 1.2;
  CHECK(has_field(validate(spo2), "value"));

  SensorSample steps{ParticipantId{"p001"}, SensorKind::StepCount, 12034.0, UtcTime{}};
  CHECK(validate(steps).empty());
}

TEST_CASE("weather validation") {
  WeatherObservation w{"S24", 1.3678, 103.9826, 31.5, std::nullopt, UtcTime{}};
  CHECK(validate(w).empty());
  w.air_temperature_c = 60.0;
  CHECK(has_field(validate(w), "air_temperature_c"));
  w.air_temperature_c = -10.0;
  CHECK(has_field(validate(w), "air_temperature_c"));
  w.air_temperature_c = 25.0;
  w.station_id.clear();
  CHECK(has_field(validate(w), "station_id"));
}

TEST_CASE("config invariants") {
  TriggerConfig trigger;
  CHECK(validate(trigger).empty());
  CHECK(trigger.temp_threshold_c == 30.0);
  CHECK(trigger.noise_threshold_dba == 70.0);
  CHECK(trigger.daily_budget == 4);
  CHECK(trigger.window_start_hour == 9);
  CHECK(trigger.window_end_hour == 19);
  CHECK(trigger.weather_poll_interval == minutes{5});
  CHECK(trigger.timezone.name() == "Asia/Singapore");

  trigger.daily_budget = -1;
  CHECK(has_field(validate(trigger), "daily_budget"));
  trigger = TriggerConfig{};
  trigger.window_start_hour = 19;
  CHECK_FALSE(validate(trigger).empty());

  PhaseConfig phase;
  CHECK(validate(phase).empty());
  CHECK(phase.personalization_switch_count == 50);
  CHECK(phase.survey_quota == 100);
  phase.personalization_switch_count = 120;
  CHECK_FALSE(validate(phase).empty());
  phase.personalization_switch_count = 0;
  CHECK_FALSE(validate(phase).empty());
}

TEST_CASE("splitmix64 determinism and bounds") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  SplitMix64 r(7);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.bounded(10) < 10);
  }
}
