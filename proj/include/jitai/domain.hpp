#pragma once
// Vocabulary shared by every module: participants, preference labels, survey
// and sensor records, trigger/notification records, and the two config types
// that own all tunable constants. Values are immutable once constructed and
// safe to copy between threads.

#include "jitai/time.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jitai {

struct ParticipantId {
  std::string value;

  bool empty() const { return value.empty(); }
  auto operator<=>(const ParticipantId&) const = default;
};

enum class LabelKind : std::uint8_t { Thermal, Noise };

std::string_view to_string(LabelKind kind);
std::optional<LabelKind> parse_label_kind(std::string_view text);

// Three classes per kind, fixed order; index 1 is always the no-change class.
// The order doubles as the class axis of every feature/probability vector.
inline constexpr int kClassesPerKind = 3;
inline constexpr int kNoChangeIndex = 1;

// One preference answer: a kind plus an index into that kind's closed label
// set. Parsing an unknown label string fails; there is no default.
class PreferenceLabel {
 public:
  PreferenceLabel() = default;

  static PreferenceLabel thermal_cooler() { return {LabelKind::Thermal, 0}; }
  static PreferenceLabel thermal_no_change() { return {LabelKind::Thermal, 1}; }
  static PreferenceLabel thermal_warmer() { return {LabelKind::Thermal, 2}; }
  static PreferenceLabel noise_quieter() { return {LabelKind::Noise, 0}; }
  static PreferenceLabel noise_no_change() { return {LabelKind::Noise, 1}; }
  static PreferenceLabel noise_louder() { return {LabelKind::Noise, 2}; }

  static std::optional<PreferenceLabel> from_index(LabelKind kind, int class_index);
  static std::optional<PreferenceLabel> parse(LabelKind kind, std::string_view text);
  // Canonical class-name list for one kind, in class-index order.
  static const std::array<std::string_view, kClassesPerKind>& class_names(LabelKind kind);

  LabelKind kind() const { return kind_; }
  int class_index() const { return index_; }
  bool is_no_change() const { return index_ == kNoChangeIndex; }
  std::string_view text() const { return class_names(kind_)[std::size_t(index_)]; }

  auto operator<=>(const PreferenceLabel&) const = default;

 private:
  PreferenceLabel(LabelKind kind, int index) : kind_(kind), index_(std::uint8_t(index)) {}

  LabelKind kind_ = LabelKind::Thermal;
  std::uint8_t index_ = kNoChangeIndex;
};

enum class SoundSource : std::uint8_t { Traffic, Talking, Weather, Other };

std::string_view to_string(SoundSource source);
std::optional<SoundSource> parse_sound_source(std::string_view text);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  auto operator<=>(const GeoPoint&) const = default;
};

struct MicroSurveyResponse {
  ParticipantId participant;
  UtcTime started_at{};
  UtcTime ended_at{};
  double lat = 0.0;
  double lon = 0.0;
  UtcTime location_acquired_at{};
  PreferenceLabel thermal = PreferenceLabel::thermal_no_change();
  PreferenceLabel noise = PreferenceLabel::noise_no_change();
  std::optional<SoundSource> sound_source;

  GeoPoint location() const { return {lat, lon}; }
  bool operator==(const MicroSurveyResponse&) const = default;
};

enum class SensorKind : std::uint8_t {
  SoundLevel,        // dBA, 30-minute equivalent continuous level
  HeartRate,         // bpm
  RestingHeartRate,  // bpm
  StepCount,
  WalkingDistance,   // m
  StandTime,         // min
  OxygenSaturation,  // fraction of 1
};

std::string_view to_string(SensorKind kind);
std::optional<SensorKind> parse_sensor_kind(std::string_view text);

struct SensorSample {
  ParticipantId participant;
  SensorKind kind = SensorKind::SoundLevel;
  double value = 0.0;
  UtcTime observed_at{};

  bool operator==(const SensorSample&) const = default;
};

struct WeatherObservation {
  std::string station_id;
  double station_lat = 0.0;
  double station_lon = 0.0;
  double air_temperature_c = 0.0;
  std::optional<double> rainfall_mm;
  UtcTime observed_at{};

  bool operator==(const WeatherObservation&) const = default;
};

// Owns every threshold/scheduling constant; no module hard-codes them.
struct TriggerConfig {
  double temp_threshold_c = 30.0;
  double noise_threshold_dba = 70.0;
  int daily_budget = 4;
  int window_start_hour = 9;
  int window_end_hour = 19;  // exclusive
  bool weekdays_only = true;
  minutes weather_poll_interval{5};
  TimeZone timezone = *TimeZone::lookup("Asia/Singapore");
};

enum class Phase : std::uint8_t { Phase1, Phase2 };

std::string_view to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view text);

struct PhaseConfig {
  Phase phase = Phase::Phase1;
  int personalization_switch_count = 50;
  int survey_quota = 100;
  // Surveys required before threshold triggers start firing. 0 = from the
  // beginning of the deployment.
  int threshold_start_surveys = 0;
};

enum class TriggerMechanism : std::uint8_t { Threshold, Personalized };

std::string_view to_string(TriggerMechanism mechanism);
std::optional<TriggerMechanism> parse_mechanism(std::string_view text);

struct TriggerCause {
  enum class Kind : std::uint8_t {
    MeasuredTemperature,
    MeasuredSound,
    PredictedProbability,
  };

  Kind kind = Kind::MeasuredTemperature;
  double value = 0.0;

  static TriggerCause temperature(double c) { return {Kind::MeasuredTemperature, c}; }
  static TriggerCause sound(double dba) { return {Kind::MeasuredSound, dba}; }
  static TriggerCause probability(double p) { return {Kind::PredictedProbability, p}; }

  bool operator==(const TriggerCause&) const = default;
};

std::string_view to_string(TriggerCause::Kind kind);
std::optional<TriggerCause::Kind> parse_cause_kind(std::string_view text);

struct TriggerEvent {
  ParticipantId participant;
  LabelKind kind = LabelKind::Thermal;
  TriggerMechanism mechanism = TriggerMechanism::Threshold;
  PreferenceLabel target_label = PreferenceLabel::thermal_no_change();
  UtcTime fired_at{};
  TriggerCause cause;
  std::optional<GeoPoint> location;

  bool operator==(const TriggerEvent&) const = default;
};

enum class SuppressReason : std::uint8_t {
  OutsideWindow,
  Weekend,
  BudgetExhausted,
  DispatchError,
};

std::string_view to_string(SuppressReason reason);
std::optional<SuppressReason> parse_suppress_reason(std::string_view text);

struct NotificationRecord {
  TriggerEvent event;
  std::string payload_text;
  // nullopt = sent; otherwise the suppression reason
  std::optional<SuppressReason> suppressed;
  // present iff sent; 1-based position within the participant's local day
  std::optional<int> sequence_in_day;

  bool is_sent() const { return !suppressed.has_value(); }
  bool operator==(const NotificationRecord&) const = default;
};

struct ValidationError {
  std::string field;
  std::string message;

  bool operator==(const ValidationError&) const = default;
};

std::vector<ValidationError> validate(const MicroSurveyResponse& survey);
std::vector<ValidationError> validate(const SensorSample& sample);
std::vector<ValidationError> validate(const WeatherObservation& observation);
std::vector<ValidationError> validate(const TriggerConfig& config);
std::vector<ValidationError> validate(const PhaseConfig& config);

}  // namespace jitai
