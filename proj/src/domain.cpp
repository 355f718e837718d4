#include "jitai/domain.hpp"

#include <cmath>

namespace jitai {
namespace {

constexpr std::array<std::string_view, kClassesPerKind> kThermalNames{
    "prefer_cooler", "no_change", "prefer_warmer"};
constexpr std::array<std::string_view, kClassesPerKind> kNoiseNames{
    "prefer_quieter", "no_change", "prefer_louder"};

void check_participant(const ParticipantId& id, std::vector<ValidationError>& out) {
  if (id.empty()) out.push_back({"participant", "participant id must be non-empty"});
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view to_string(LabelKind kind) {
  return kind == LabelKind::Thermal ? "thermal" : "noise";
}

std::optional<LabelKind> parse_label_kind(std::string_view text) {
  if (text == "thermal") return LabelKind::Thermal;
  if (text == "noise") return LabelKind::Noise;
  return std::nullopt;
}

const std::array<std::string_view, kClassesPerKind>& PreferenceLabel::class_names(
    LabelKind kind) {
  return kind == LabelKind::Thermal ? kThermalNames : kNoiseNames;
}

std::optional<PreferenceLabel> PreferenceLabel::from_index(LabelKind kind, int class_index) {
  if (class_index < 0 || class_index >= kClassesPerKind) return std::nullopt;
  return PreferenceLabel{kind, class_index};
}

std::optional<PreferenceLabel> PreferenceLabel::parse(LabelKind kind, std::string_view text) {
  const auto& names = class_names(kind);
  for (int i = 0; i < kClassesPerKind; ++i) {
    if (names[std::size_t(i)] == text) return PreferenceLabel{kind, i};
  }
  return std::nullopt;
}

std::string_view to_string(SoundSource source) {
  switch (source) {
    case SoundSource::Traffic: return "traffic";
    case SoundSource::Talking: return "talking";
    case SoundSource::Weather: return "weather";
    case SoundSource::Other: return "other";
  }
  return "other";
}

std::optional<SoundSource> parse_sound_source(std::string_view text) {
  if (text == "traffic") return SoundSource::Traffic;
  if (text == "talking") return SoundSource::Talking;
  if (text == "weather") return SoundSource::Weather;
  if (text == "other") return SoundSource::Other;
  return std::nullopt;
}

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::SoundLevel: return "sound_level";
    case SensorKind::HeartRate: return "heart_rate";
    case SensorKind::RestingHeartRate: return "resting_heart_rate";
    case SensorKind::StepCount: return "step_count";
    case SensorKind::WalkingDistance: return "walking_distance";
    case SensorKind::StandTime: return "stand_time";
    case SensorKind::OxygenSaturation: return "oxygen_saturation";
  }
  return "sound_level";
}

std::optional<SensorKind> parse_sensor_kind(std::string_view text) {
  if (text == "sound_level") return SensorKind::SoundLevel;
  if (text == "heart_rate") return SensorKind::HeartRate;
  if (text == "resting_heart_rate") return SensorKind::RestingHeartRate;
  if (text == "step_count") return SensorKind::StepCount;
  if (text == "walking_distance") return SensorKind::WalkingDistance;
  if (text == "stand_time") return SensorKind::StandTime;
  if (text == "oxygen_saturation") return SensorKind::OxygenSaturation;
  return std::nullopt;
}

std::string_view to_string(Phase phase) {
  return phase == Phase::Phase1 ? "phase1" : "phase2";
}

std::optional<Phase> parse_phase(std::string_view text) {
  if (text == "phase1") return Phase::Phase1;
  if (text == "phase2") return Phase::Phase2;
  return std::nullopt;
}

std::string_view to_string(TriggerMechanism mechanism) {
  return mechanism == TriggerMechanism::Threshold ? "threshold" : "personalized";
}

std::optional<TriggerMechanism> parse_mechanism(std::string_view text) {
  if (text == "threshold") return TriggerMechanism::Threshold;
  if (text == "personalized") return TriggerMechanism::Personalized;
  return std::nullopt;
}

std::string_view to_string(TriggerCause::Kind kind) {
  switch (kind) {
    case TriggerCause::Kind::MeasuredTemperature: return "measured_temperature";
    case TriggerCause::Kind::MeasuredSound: return "measured_sound";
    case TriggerCause::Kind::PredictedProbability: return "predicted_probability";
  }
  return "measured_temperature";
}

std::optional<TriggerCause::Kind> parse_cause_kind(std::string_view text) {
  if (text == "measured_temperature") return TriggerCause::Kind::MeasuredTemperature;
  if (text == "measured_sound") return TriggerCause::Kind::MeasuredSound;
  if (text == "predicted_probability") return TriggerCause::Kind::PredictedProbability;
  return std::nullopt;
}

std::string_view to_string(SuppressReason reason) {
  switch (reason) {
    case SuppressReason::OutsideWindow: return "outside_window";
    case SuppressReason::Weekend: return "weekend";
    case SuppressReason::BudgetExhausted: return "budget_exhausted";
    case SuppressReason::DispatchError: return "dispatch_error";
  }
  return "outside_window";
}

std::optional<SuppressReason> parse_suppress_reason(std::string_view text) {
  if (text == "outside_window") return SuppressReason::OutsideWindow;
  if (text == "weekend") return SuppressReason::Weekend;
  if (text == "budget_exhausted") return SuppressReason::BudgetExhausted;
  if (text == "dispatch_error") return SuppressReason::DispatchError;
  return std::nullopt;
}

std::vector<ValidationError> validate(const MicroSurveyResponse& survey) {
  std::vector<ValidationError> errors;
  check_participant(survey.participant, errors);
  if (survey.started_at > survey.ended_at) {
    errors.push_back({"started_at", "started_at must be <= ended_at"});
  }
  if (!finite(survey.lat) || survey.lat < -90.0 || survey.lat > 90.0) {
    errors.push_back({"lat", "lat out of range [-90, 90]"});
  }
  if (!finite(survey.lon) || survey.lon < -180.0 || survey.lon > 180.0) {
    errors.push_back({"lon", "lon out of range [-180, 180]"});
  }
  if (survey.thermal.kind() != LabelKind::Thermal) {
    errors.push_back({"thermal", "thermal label must belong to the thermal set"});
  }
  if (survey.noise.kind() != LabelKind::Noise) {
    errors.push_back({"noise", "noise label must belong to the noise set"});
  }
  if (survey.sound_source.has_value() && survey.noise.is_no_change()) {
    errors.push_back({"sound_source", "source without distraction: sound_source requires a noise preference other than no_change"});
  }
  return errors;
}

std::vector<ValidationError> validate(const SensorSample& sample) {
  std::vector<ValidationError> errors;
  check_participant(sample.participant, errors);
  if (!finite(sample.value)) {
    errors.push_back({"value", "value must be finite"});
    return errors;
  }
  switch (sample.kind) {
    case SensorKind::SoundLevel:
      if (sample.value < 0.0 || sample.value > 140.0) {
        errors.push_back({"value", "sound level out of range [0, 140] dBA"});
      }
      break;
    case SensorKind::HeartRate:
    case SensorKind::RestingHeartRate:
      if (sample.value <= 20.0 || sample.value >= 250.0) {
        errors.push_back({"value", "heart rate out of range (20, 250) bpm"});
      }
      break;
    case SensorKind::OxygenSaturation:
      if (sample.value < 0.0 || sample.value > 1.0) {
        errors.push_back({"value", "oxygen saturation out of range [0, 1]"});
      }
      break;
    default:
      break;
  }
  return errors;
}

std::vector<ValidationError> validate(const WeatherObservation& observation) {
  std::vector<ValidationError> errors;
  if (observation.station_id.empty()) {
    errors.push_back({"station_id", "station_id must be non-empty"});
  }
  if (!finite(observation.air_temperature_c) || observation.air_temperature_c <= -10.0 ||
      observation.air_temperature_c >= 60.0) {
    errors.push_back({"air_temperature_c", "air temperature outside (-10, 60) C sanity band"});
  }
  return errors;
}

std::vector<ValidationError> validate(const TriggerConfig& config) {
  std::vector<ValidationError> errors;
  if (config.daily_budget < 0) {
    errors.push_back({"daily_budget", "daily_budget must be >= 0"});
  }
  if (config.window_start_hour >= config.window_end_hour) {
    errors.push_back({"window_start_hour", "window start must be before window end"});
  }
  if (config.window_start_hour < 0 || config.window_end_hour > 24) {
    errors.push_back({"window_end_hour", "window hours must lie within a day"});
  }
  if (config.weather_poll_interval <= minutes{0}) {
    errors.push_back({"weather_poll_interval", "poll interval must be positive"});
  }
  return errors;
}

std::vector<ValidationError> validate(const PhaseConfig& config) {
  std::vector<ValidationError> errors;
  if (config.personalization_switch_count <= 0 ||
      config.personalization_switch_count > config.survey_quota) {
    errors.push_back({"personalization_switch_count",
                      "switch count must satisfy 0 < count <= survey_quota"});
  }
  if (config.threshold_start_surveys < 0) {
    errors.push_back({"threshold_start_surveys", "threshold start must be >= 0"});
  }
  return errors;
}

}  // namespace jitai
