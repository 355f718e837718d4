#pragma once
// Deterministic synthetic-cohort generator and phase runner. A CohortSpec
// plus a seed fully determines every output byte: survey arrivals are
// Poisson-per-day with uniform times inside the weekday wear window, sound
// samples follow a 30-minute cadence, and the runner replays the engine
// tick-by-tick over the simulated span.

#include "jitai/dispatch.hpp"
#include "jitai/domain.hpp"
#include "jitai/personalize.hpp"
#include "jitai/store.hpp"
#include "jitai/triggers.hpp"
#include "jitai/weather.hpp"

#include "json.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace jitai {

struct HourRule {
  int from_hour = 0;
  int to_hour = 23;  // inclusive
  ClassVector probs{};
};

struct PreferenceMixture {
  ClassVector base{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<HourRule> rules;  // first matching rule wins

  const ClassVector& at_hour(int hour) const;
  static PreferenceMixture constant_no_change();
};

struct SoundProfile {
  double base_dba = 55.0;
  double noise_sd = 3.0;
  double lunch_bump_dba = 0.0;  // added during the 12:00 local hour
};

struct ParticipantSpec {
  PreferenceMixture thermal;
  PreferenceMixture noise;
  double surveys_per_day = 5.0;
  SoundProfile sound;
  std::vector<GeoPoint> waypoints;  // empty = generated around the city center
};

struct CohortSpec {
  int n_participants = 0;
  Phase phase = Phase::Phase1;
  int duration_weekdays = 20;
  std::uint64_t rng_seed = 1;
  std::int64_t start_day = 19282;  // 2022-10-17, a Monday
  // builtin scenario ("always_hot", "never_hot", "diurnal") or a fixture
  // CSV path
  std::string weather_fixture = "diurnal";
  ParticipantSpec defaults;
  std::vector<ParticipantSpec> participant_overrides;  // participant i < size

  const ParticipantSpec& spec_for(int participant_index) const;
};

std::vector<ValidationError> validate(const CohortSpec& spec);

ParticipantId participant_id(int index);

// Weekdays the cohort is active, and every calendar day of the span
// (weekends included — the engine still ticks through them).
std::vector<std::int64_t> cohort_weekdays(const CohortSpec& spec);
std::vector<std::int64_t> cohort_span_days(const CohortSpec& spec);

struct CohortStreams {
  std::vector<MicroSurveyResponse> surveys;  // time-sorted across participants
  std::vector<SensorSample> sound_samples;   // time-sorted
  struct LocationFix {
    ParticipantId participant;
    UtcTime at;
    GeoPoint location;
  };
  std::vector<LocationFix> locations;  // GPS acquired at each survey
};

CohortStreams generate_cohort(const CohortSpec& spec, const TimeZone& tz);

// Synthetic weather fixtures at 5-minute cadence for the span.
std::vector<Station> default_stations();
std::string make_weather_fixture_csv(std::string_view scenario,
                                     std::span<const Station> stations,
                                     std::int64_t first_day, std::int64_t last_day,
                                     const TimeZone& tz);

// Config files: JSON, or the TOML subset below (tables, array-of-tables,
// dotted keys, scalars, arrays). Both parse to the same JSON document.
Result<nlohmann::json> parse_toml_lite(std::string_view text);
Result<CohortSpec> cohort_from_json(const nlohmann::json& doc);
Result<CohortSpec> load_cohort_file(const std::filesystem::path& path);
// Engine settings may ride in the same file under "trigger" / "protocol".
Result<EngineConfig> engine_config_from_json(const nlohmann::json& doc,
                                             const CohortSpec& spec);
nlohmann::json cohort_to_json(const CohortSpec& spec);
nlohmann::json engine_config_to_json(const EngineConfig& config);

struct RunResult {
  TimeSeriesStore store;
  std::vector<NotificationRecord> notifications;  // engine decision order
  CohortStreams cohort;
  MockPushProvider outbox;
  std::vector<ParticipantId> participants;
};

// Live endpoints or custom message copy instead of the built-ins. A live
// weather provider needs an explicit station registry (it cannot enumerate
// one).
struct RunProviders {
  std::shared_ptr<WeatherProvider> weather;
  std::optional<StationRegistry> stations;
  PushProvider* push = nullptr;  // default: the run's recording outbox
  std::optional<MessageTemplates> templates;
};

Result<std::unique_ptr<RunResult>> run_phase(const CohortSpec& spec,
                                             const EngineConfig& engine_config,
                                             const RunProviders& providers = {});

struct ParticipantSummary {
  std::string participant;
  int threshold_sent = 0;
  int personalized_sent = 0;
  int suppressed_outside_window = 0;
  int suppressed_weekend = 0;
  int suppressed_budget_exhausted = 0;
  int suppressed_dispatch_error = 0;

  int total() const {
    return threshold_sent + personalized_sent + suppressed_outside_window +
           suppressed_weekend + suppressed_budget_exhausted + suppressed_dispatch_error;
  }
  bool operator==(const ParticipantSummary&) const = default;
};

// Per-participant counts partitioning the log exactly; sorted by id.
std::vector<ParticipantSummary> summarize(std::span<const NotificationRecord> log);
std::string summary_csv(std::span<const ParticipantSummary> table);
Result<std::vector<ParticipantSummary>> summary_from_csv(std::string_view text);

// Reads a notifications.csv produced by the store's exporter.
Result<std::vector<NotificationRecord>> notifications_from_csv_file(
    const std::filesystem::path& path);

// Writes resolved_config.json, surveys.csv, sensors.csv, weather.csv,
// notifications.csv, summary.csv, outbox.jsonl, and store.jsonl.
Result<std::monostate> write_run_dir(const RunResult& result, const CohortSpec& spec,
                                     const EngineConfig& engine_config,
                                     const std::filesystem::path& dir);

}  // namespace jitai
