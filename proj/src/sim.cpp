#include "jitai/sim.hpp"

#include "jitai/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace jitai {

using nlohmann::json;

const ClassVector& PreferenceMixture::at_hour(int hour) const {
  for (const HourRule& rule : rules) {
    if (hour >= rule.from_hour && hour <= rule.to_hour) return rule.probs;
  }
  return base;
}

PreferenceMixture PreferenceMixture::constant_no_change() {
  PreferenceMixture m;
  m.base = {0.0, 1.0, 0.0};
  return m;
}

const ParticipantSpec& CohortSpec::spec_for(int participant_index) const {
  if (participant_index >= 0 && participant_index < int(participant_overrides.size())) {
    return participant_overrides[std::size_t(participant_index)];
  }
  return defaults;
}

namespace {

bool valid_distribution(const ClassVector& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !(p <= 1.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) < 1e-9;
}

void validate_mixture(const PreferenceMixture& mixture, const char* field,
                      std::vector<ValidationError>& errors) {
  if (!valid_distribution(mixture.base)) {
    errors.push_back({field, "base probabilities must form a distribution"});
  }
  for (const HourRule& rule : mixture.rules) {
    if (!valid_distribution(rule.probs)) {
      errors.push_back({field, "rule probabilities must form a distribution"});
    }
    if (rule.from_hour < 0 || rule.to_hour > 23 || rule.from_hour > rule.to_hour) {
      errors.push_back({field, "rule hours must satisfy 0 <= from <= to <= 23"});
    }
  }
}

void validate_participant(const ParticipantSpec& spec, std::vector<ValidationError>& errors) {
  validate_mixture(spec.thermal, "thermal_mixture", errors);
  validate_mixture(spec.noise, "noise_mixture", errors);
  if (!(spec.surveys_per_day > 0.0)) {
    errors.push_back({"surveys_per_day", "survey rate must be positive"});
  }
  if (spec.sound.noise_sd < 0.0) {
    errors.push_back({"sound", "noise_sd must be non-negative"});
  }
  for (const GeoPoint& wp : spec.waypoints) {
    if (wp.lat < -90.0 || wp.lat > 90.0 || wp.lon < -180.0 || wp.lon > 180.0) {
      errors.push_back({"waypoints", "waypoint out of range"});
    }
  }
}

}  // namespace

std::vector<ValidationError> validate(const CohortSpec& spec) {
  std::vector<ValidationError> errors;
  if (spec.n_participants < 0) {
    errors.push_back({"n_participants", "participant count must be >= 0"});
  }
  if (spec.duration_weekdays < 1) {
    errors.push_back({"duration_weekdays", "duration must be >= 1 weekday"});
  }
  if (spec.weather_fixture.empty()) {
    errors.push_back({"weather_fixture", "weather fixture or scenario required"});
  }
  validate_participant(spec.defaults, errors);
  for (const ParticipantSpec& p : spec.participant_overrides) validate_participant(p, errors);
  return errors;
}

ParticipantId participant_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%03d", index + 1);
  return ParticipantId{buf};
}

std::vector<std::int64_t> cohort_weekdays(const CohortSpec& spec) {
  std::vector<std::int64_t> days;
  std::int64_t day = spec.start_day;
  while (int(days.size()) < spec.duration_weekdays) {
    if (iso_weekday_of_day(day) <= 5) days.push_back(day);
    ++day;
  }
  return days;
}

std::vector<std::int64_t> cohort_span_days(const CohortSpec& spec) {
  const auto weekdays = cohort_weekdays(spec);
  std::vector<std::int64_t> days;
  if (weekdays.empty()) return days;
  for (std::int64_t day = weekdays.front(); day <= weekdays.back(); ++day) days.push_back(day);
  return days;
}

namespace {

std::vector<GeoPoint> default_waypoints(SplitMix64& rng) {
  // three spots around the city center
  std::vector<GeoPoint> waypoints;
  for (int i = 0; i < 3; ++i) {
    waypoints.push_back(GeoPoint{1.30 + (rng.uniform() - 0.5) * 0.12,
                                 103.80 + (rng.uniform() - 0.5) * 0.20});
  }
  return waypoints;
}

int draw_class(const ClassVector& probs, SplitMix64& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int c = 0; c < kClassesPerKind; ++c) {
    acc += probs[std::size_t(c)];
    if (u < acc) return c;
  }
  return kClassesPerKind - 1;
}

SoundSource draw_sound_source(SplitMix64& rng) {
  const double u = rng.uniform();
  if (u < 0.40) return SoundSource::Traffic;
  if (u < 0.70) return SoundSource::Talking;
  if (u < 0.85) return SoundSource::Weather;
  return SoundSource::Other;
}

}  // namespace

CohortStreams generate_cohort(const CohortSpec& spec, const TimeZone& tz) {
  CohortStreams streams;
  const auto weekdays = cohort_weekdays(spec);

  for (int i = 0; i < spec.n_participants; ++i) {
    const ParticipantId id = participant_id(i);
    const ParticipantSpec& pspec = spec.spec_for(i);
    SplitMix64 rng(derive_seed(spec.rng_seed, "participant:" + id.value));
    const std::vector<GeoPoint> waypoints =
        pspec.waypoints.empty() ? default_waypoints(rng) : pspec.waypoints;
    std::size_t waypoint_cursor = 0;

    for (std::int64_t day : weekdays) {
      const UtcTime day_start = tz.local_day_start(day);

      // surveys: Poisson count, uniform times inside the wear window
      const int n_surveys = rng.poisson(pspec.surveys_per_day);
      std::vector<std::int64_t> offsets;
      offsets.reserve(std::size_t(n_surveys));
      for (int s = 0; s < n_surveys; ++s) {
        offsets.push_back(9 * 3600 + std::int64_t(rng.bounded(10 * 3600)));
      }
      std::sort(offsets.begin(), offsets.end());
      for (std::int64_t offset : offsets) {
        MicroSurveyResponse survey;
        survey.participant = id;
        survey.ended_at = day_start + seconds{offset};
        survey.started_at = survey.ended_at - seconds{8 + std::int64_t(rng.bounded(18))};
        survey.location_acquired_at = survey.started_at;
        const GeoPoint waypoint = waypoints[waypoint_cursor++ % waypoints.size()];
        survey.lat = waypoint.lat + rng.normal(0.0, 0.0003);
        survey.lon = waypoint.lon + rng.normal(0.0, 0.0003);
        const int hour = int(offset / 3600);
        survey.thermal = *PreferenceLabel::from_index(
            LabelKind::Thermal, draw_class(pspec.thermal.at_hour(hour), rng));
        survey.noise = *PreferenceLabel::from_index(
            LabelKind::Noise, draw_class(pspec.noise.at_hour(hour), rng));
        if (!survey.noise.is_no_change()) survey.sound_source = draw_sound_source(rng);
        streams.locations.push_back(
            {id, survey.location_acquired_at, GeoPoint{survey.lat, survey.lon}});
        streams.surveys.push_back(std::move(survey));
      }

      // sound level at 30-minute cadence across the wear window
      for (int minute = 9 * 60; minute < 19 * 60; minute += 30) {
        SensorSample sample;
        sample.participant = id;
        sample.kind = SensorKind::SoundLevel;
        sample.observed_at = day_start + minutes{minute};
        double value = pspec.sound.base_dba + rng.normal(0.0, pspec.sound.noise_sd);
        if (minute / 60 == 12) value += pspec.sound.lunch_bump_dba;
        sample.value = std::clamp(value, 30.0, 100.0);
        streams.sound_samples.push_back(sample);
      }
    }
  }

  std::stable_sort(streams.surveys.begin(), streams.surveys.end(),
                   [](const MicroSurveyResponse& a, const MicroSurveyResponse& b) {
                     return std::tie(a.ended_at, a.participant.value) <
                            std::tie(b.ended_at, b.participant.value);
                   });
  std::stable_sort(streams.sound_samples.begin(), streams.sound_samples.end(),
                   [](const SensorSample& a, const SensorSample& b) {
                     return std::tie(a.observed_at, a.participant.value) <
                            std::tie(b.observed_at, b.participant.value);
                   });
  std::stable_sort(streams.locations.begin(), streams.locations.end(),
                   [](const CohortStreams::LocationFix& a, const CohortStreams::LocationFix& b) {
                     return std::tie(a.at, a.participant.value) <
                            std::tie(b.at, b.participant.value);
                   });
  return streams;
}

std::vector<Station> default_stations() {
  return {
      {"S100", 1.3521, 103.8198},
      {"S104", 1.3400, 103.7000},
      {"S107", 1.3048, 103.9318},
      {"S109", 1.3764, 103.8492},
  };
}

namespace {

double diurnal_temp(double local_hour) {
  // piecewise linear profile crossing 30 C upward at 11:00 local
  struct Point {
    double hour, temp;
  };
  static constexpr Point kProfile[] = {{0, 26},  {9, 28},  {11, 30}, {13, 32},
                                       {16, 31}, {19, 28}, {24, 26}};
  for (std::size_t i = 1; i < std::size(kProfile); ++i) {
    if (local_hour <= kProfile[i].hour) {
      const auto& a = kProfile[i - 1];
      const auto& b = kProfile[i];
      const double f = (local_hour - a.hour) / (b.hour - a.hour);
      return a.temp + f * (b.temp - a.temp);
    }
  }
  return 26.0;
}

}  // namespace

std::string make_weather_fixture_csv(std::string_view scenario,
                                     std::span<const Station> stations,
                                     std::int64_t first_day, std::int64_t last_day,
                                     const TimeZone& tz) {
  std::string out = "station_id,lat,lon,timestamp,air_temperature_c\n";
  for (std::int64_t day = first_day; day <= last_day; ++day) {
    const UtcTime day_start = tz.local_day_start(day);
    for (int minute = 0; minute < 24 * 60; minute += 5) {
      double temp = 26.0;
      if (scenario == "always_hot") {
        temp = 33.0;
      } else if (scenario == "never_hot") {
        temp = 26.0;
      } else {  // diurnal
        temp = diurnal_temp(double(minute) / 60.0);
      }
      const UtcTime t = day_start + minutes{minute};
      for (const Station& station : stations) {
        out += station.id;
        out += ',';
        out += format_double(station.lat);
        out += ',';
        out += format_double(station.lon);
        out += ',';
        out += format_rfc3339(t);
        out += ',';
        out += format_double(temp);
        out += '\n';
      }
    }
  }
  return out;
}

// --- TOML subset -------------------------------------------------------------

namespace {

struct TomlParser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  std::string error{};

  bool fail(const std::string& message) {
    error = "line " + std::to_string(line) + ": " + message;
    return false;
  }

  static bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  void skip_spaces(std::string_view& s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  }

  bool parse_key_path(std::string_view& s, std::vector<std::string>& path) {
    path.clear();
    for (;;) {
      skip_spaces(s);
      std::string part;
      if (!s.empty() && s.front() == '"') {
        s.remove_prefix(1);
        auto end = s.find('"');
        if (end == std::string_view::npos) return fail("unterminated quoted key");
        part = std::string(s.substr(0, end));
        s.remove_prefix(end + 1);
      } else {
        std::size_t i = 0;
        while (i < s.size() && is_bare_char(s[i])) ++i;
        if (i == 0) return fail("expected key");
        part = std::string(s.substr(0, i));
        s.remove_prefix(i);
      }
      path.push_back(std::move(part));
      skip_spaces(s);
      if (!s.empty() && s.front() == '.') {
        s.remove_prefix(1);
        continue;
      }
      return true;
    }
  }

  bool parse_value(std::string_view& s, json& out) {
    skip_spaces(s);
    if (s.empty()) return fail("expected value");
    if (s.front() == '"') {
      s.remove_prefix(1);
      std::string value;
      while (!s.empty() && s.front() != '"') {
        if (s.front() == '\\' && s.size() >= 2) {
          const char esc = s[1];
          if (esc == '"') value += '"';
          else if (esc == '\\') value += '\\';
          else if (esc == 'n') value += '\n';
          else if (esc == 't') value += '\t';
          else return fail("unsupported escape");
          s.remove_prefix(2);
          continue;
        }
        value += s.front();
        s.remove_prefix(1);
      }
      if (s.empty()) return fail("unterminated string");
      s.remove_prefix(1);
      out = value;
      return true;
    }
    if (s.front() == '[') {
      s.remove_prefix(1);
      json array = json::array();
      skip_spaces(s);
      if (!s.empty() && s.front() == ']') {
        s.remove_prefix(1);
        out = array;
        return true;
      }
      for (;;) {
        json element;
        if (!parse_value(s, element)) return false;
        array.push_back(std::move(element));
        skip_spaces(s);
        if (!s.empty() && s.front() == ',') {
          s.remove_prefix(1);
          continue;
        }
        if (!s.empty() && s.front() == ']') {
          s.remove_prefix(1);
          out = array;
          return true;
        }
        return fail("expected ',' or ']' in array");
      }
    }
    if (s.rfind("true", 0) == 0) {
      s.remove_prefix(4);
      out = true;
      return true;
    }
    if (s.rfind("false", 0) == 0) {
      s.remove_prefix(5);
      out = false;
      return true;
    }
    // number
    std::size_t i = 0;
    bool is_float = false;
    while (i < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '+' || s[i] == '-' ||
            s[i] == '.' || s[i] == 'e' || s[i] == 'E' || s[i] == '_')) {
      if (s[i] == '.' || s[i] == 'e' || s[i] == 'E') is_float = true;
      ++i;
    }
    if (i == 0) return fail("unrecognized value");
    std::string digits;
    for (char c : s.substr(0, i)) {
      if (c != '_') digits += c;
    }
    s.remove_prefix(i);
    if (is_float) {
      double v{};
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) return fail("bad float");
      out = v;
    } else {
      std::int64_t v{};
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) return fail("bad integer");
      out = v;
    }
    return true;
  }

  json* descend(json& root, std::span<const std::string> path, bool array_of_tables) {
    json* node = &root;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const std::string& part = path[i];
      const bool last = i + 1 == path.size();
      json& slot = (*node)[part];
      if (last && array_of_tables) {
        if (slot.is_null()) slot = json::array();
        if (!slot.is_array()) return nullptr;
        slot.push_back(json::object());
        node = &slot.back();
        return node;
      }
      if (slot.is_null()) slot = json::object();
      if (slot.is_array()) {
        if (slot.empty()) return nullptr;
        node = &slot.back();
      } else if (slot.is_object()) {
        node = &slot;
      } else {
        return nullptr;
      }
    }
    return node;
  }
};

}  // namespace

Result<json> parse_toml_lite(std::string_view text) {
  TomlParser parser{text};
  json root = json::object();
  json* current = &root;

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    const bool last_line = end == std::string_view::npos;
    if (last_line) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      // keep '#' inside strings; a simple scan tracks quoting
      bool in_string = false;
      for (std::size_t k = 0; k < line.size(); ++k) {
        if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) in_string = !in_string;
        if (line[k] == '#' && !in_string) {
          line = line.substr(0, k);
          break;
        }
      }
    }
    parser.skip_spaces(line);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      ++parser.line;
      if (last_line) break;
      continue;
    }

    if (line.front() == '[') {
      const bool array_of_tables = line.size() >= 2 && line[1] == '[';
      const std::size_t open = array_of_tables ? 2 : 1;
      const std::string_view closer = array_of_tables ? "]]" : "]";
      const auto close = line.find(closer);
      if (close == std::string_view::npos) {
        return Result<json>::failure("line " + std::to_string(parser.line) +
                                     ": unterminated table header");
      }
      std::string_view header = line.substr(open, close - open);
      std::vector<std::string> path;
      if (!parser.parse_key_path(header, path)) return Result<json>::failure(parser.error);
      current = parser.descend(root, path, array_of_tables);
      if (!current) {
        return Result<json>::failure("line " + std::to_string(parser.line) +
                                     ": conflicting table path");
      }
    } else {
      std::vector<std::string> path;
      if (!parser.parse_key_path(line, path)) return Result<json>::failure(parser.error);
      parser.skip_spaces(line);
      if (line.empty() || line.front() != '=') {
        return Result<json>::failure("line " + std::to_string(parser.line) + ": expected '='");
      }
      line.remove_prefix(1);
      json value;
      if (!parser.parse_value(line, value)) return Result<json>::failure(parser.error);
      parser.skip_spaces(line);
      if (!line.empty()) {
        return Result<json>::failure("line " + std::to_string(parser.line) +
                                     ": trailing characters after value");
      }
      json* table = current;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        json& slot = (*table)[path[k]];
        if (slot.is_null()) slot = json::object();
        if (!slot.is_object()) {
          return Result<json>::failure("line " + std::to_string(parser.line) +
                                       ": dotted key conflicts with a value");
        }
        table = &slot;
      }
      (*table)[path.back()] = std::move(value);
    }
    ++parser.line;
    if (last_line) break;
  }
  return Result<json>::success(std::move(root));
}

// --- config <-> json ----------------------------------------------------------

namespace {

Result<ClassVector> class_vector_from_json(const json& j) {
  if (!j.is_array() || j.size() != kClassesPerKind) {
    return Result<ClassVector>::failure("expected an array of 3 probabilities");
  }
  ClassVector v{};
  for (int c = 0; c < kClassesPerKind; ++c) {
    if (!j[std::size_t(c)].is_number()) {
      return Result<ClassVector>::failure("probabilities must be numbers");
    }
    v[std::size_t(c)] = j[std::size_t(c)].get<double>();
  }
  return Result<ClassVector>::success(v);
}

Result<PreferenceMixture> mixture_from_json(const json& j, const PreferenceMixture& base) {
  PreferenceMixture m = base;
  if (j.is_null()) return Result<PreferenceMixture>::success(std::move(m));
  if (!j.is_object()) return Result<PreferenceMixture>::failure("mixture must be an object");
  if (j.contains("base")) {
    auto v = class_vector_from_json(j["base"]);
    if (!v.ok()) return Result<PreferenceMixture>::failure("mixture base: " + v.error);
    m.base = *v;
  }
  if (j.contains("rules")) {
    if (!j["rules"].is_array()) {
      return Result<PreferenceMixture>::failure("mixture rules must be an array");
    }
    m.rules.clear();
    for (const auto& rule_json : j["rules"]) {
      HourRule rule;
      rule.from_hour = rule_json.value("from", 0);
      rule.to_hour = rule_json.value("to", 23);
      if (!rule_json.contains("probs")) {
        return Result<PreferenceMixture>::failure("mixture rule missing probs");
      }
      auto v = class_vector_from_json(rule_json["probs"]);
      if (!v.ok()) return Result<PreferenceMixture>::failure("mixture rule: " + v.error);
      rule.probs = *v;
      m.rules.push_back(rule);
    }
  }
  return Result<PreferenceMixture>::success(std::move(m));
}

Result<ParticipantSpec> participant_from_json(const json& j, const ParticipantSpec& base) {
  ParticipantSpec spec = base;
  if (j.is_null()) return Result<ParticipantSpec>::success(std::move(spec));
  if (!j.is_object()) return Result<ParticipantSpec>::failure("participant spec must be object");

  auto thermal = mixture_from_json(j.contains("thermal_mixture") ? j["thermal_mixture"] : json{},
                                   base.thermal);
  if (!thermal.ok()) return Result<ParticipantSpec>::failure(thermal.error);
  spec.thermal = *thermal;
  auto noise =
      mixture_from_json(j.contains("noise_mixture") ? j["noise_mixture"] : json{}, base.noise);
  if (!noise.ok()) return Result<ParticipantSpec>::failure(noise.error);
  spec.noise = *noise;

  spec.surveys_per_day = j.value("surveys_per_day", base.surveys_per_day);
  if (j.contains("sound") && j["sound"].is_object()) {
    const auto& sound = j["sound"];
    spec.sound.base_dba = sound.value("base_dba", base.sound.base_dba);
    spec.sound.noise_sd = sound.value("noise_sd", base.sound.noise_sd);
    spec.sound.lunch_bump_dba = sound.value("lunch_bump_dba", base.sound.lunch_bump_dba);
  }
  if (j.contains("waypoints")) {
    if (!j["waypoints"].is_array()) {
      return Result<ParticipantSpec>::failure("waypoints must be an array of [lat, lon]");
    }
    spec.waypoints.clear();
    for (const auto& wp : j["waypoints"]) {
      if (!wp.is_array() || wp.size() != 2 || !wp[0].is_number() || !wp[1].is_number()) {
        return Result<ParticipantSpec>::failure("waypoints must be an array of [lat, lon]");
      }
      spec.waypoints.push_back(GeoPoint{wp[0].get<double>(), wp[1].get<double>()});
    }
  }
  return Result<ParticipantSpec>::success(std::move(spec));
}

json mixture_to_json(const PreferenceMixture& m) {
  json j;
  j["base"] = m.base;
  json rules = json::array();
  for (const HourRule& rule : m.rules) {
    rules.push_back(json{{"from", rule.from_hour}, {"to", rule.to_hour}, {"probs", rule.probs}});
  }
  j["rules"] = rules;
  return j;
}

json participant_to_json(const ParticipantSpec& spec) {
  json j;
  j["thermal_mixture"] = mixture_to_json(spec.thermal);
  j["noise_mixture"] = mixture_to_json(spec.noise);
  j["surveys_per_day"] = spec.surveys_per_day;
  j["sound"] = json{{"base_dba", spec.sound.base_dba},
                    {"noise_sd", spec.sound.noise_sd},
                    {"lunch_bump_dba", spec.sound.lunch_bump_dba}};
  json waypoints = json::array();
  for (const GeoPoint& wp : spec.waypoints) waypoints.push_back(json::array({wp.lat, wp.lon}));
  j["waypoints"] = waypoints;
  return j;
}

}  // namespace

Result<CohortSpec> cohort_from_json(const json& doc) {
  auto fail = [](std::string m) { return Result<CohortSpec>::failure(std::move(m)); };
  if (!doc.is_object()) return fail("cohort config must be a JSON/TOML table");
  CohortSpec spec;
  spec.n_participants = doc.value("n_participants", 0);
  if (doc.contains("phase")) {
    auto phase = parse_phase(doc.value("phase", std::string{}));
    if (!phase) return fail("unknown phase (use \"phase1\" or \"phase2\")");
    spec.phase = *phase;
  }
  spec.duration_weekdays = doc.value("duration_weekdays", 20);
  spec.rng_seed = doc.value("rng_seed", std::uint64_t{1});
  if (doc.contains("start_date")) {
    auto day = parse_date(doc.value("start_date", std::string{}));
    if (!day) return fail("bad start_date (expected YYYY-MM-DD)");
    spec.start_day = *day;
  }
  spec.weather_fixture = doc.value("weather", std::string{"diurnal"});

  auto defaults = participant_from_json(doc.contains("defaults") ? doc["defaults"] : json{},
                                        ParticipantSpec{});
  if (!defaults.ok()) return fail("defaults: " + defaults.error);
  spec.defaults = *defaults;

  if (doc.contains("participants")) {
    if (!doc["participants"].is_array()) return fail("participants must be an array");
    for (const auto& p : doc["participants"]) {
      auto parsed = participant_from_json(p, spec.defaults);
      if (!parsed.ok()) return fail("participants: " + parsed.error);
      spec.participant_overrides.push_back(std::move(*parsed));
    }
  }

  auto errors = validate(spec);
  if (!errors.empty()) {
    std::string message = "invalid cohort spec:";
    for (const auto& e : errors) message += " [" + e.field + "] " + e.message + ";";
    return fail(message);
  }
  return Result<CohortSpec>::success(std::move(spec));
}

Result<CohortSpec> load_cohort_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Result<CohortSpec>::failure("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  json doc;
  if (path.extension() == ".toml") {
    auto parsed = parse_toml_lite(text);
    if (!parsed.ok()) return Result<CohortSpec>::failure(path.string() + ": " + parsed.error);
    doc = std::move(*parsed);
  } else {
    doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      return Result<CohortSpec>::failure(path.string() + ": malformed JSON");
    }
  }
  return cohort_from_json(doc);
}

Result<EngineConfig> engine_config_from_json(const json& doc, const CohortSpec& spec) {
  auto fail = [](std::string m) { return Result<EngineConfig>::failure(std::move(m)); };
  EngineConfig config;
  config.phase.phase = spec.phase;
  config.training_seed = derive_seed(spec.rng_seed, "training");

  if (doc.is_object() && doc.contains("trigger")) {
    const auto& t = doc["trigger"];
    if (!t.is_object()) return fail("trigger must be a table");
    config.trigger.temp_threshold_c = t.value("temp_threshold_c", 30.0);
    config.trigger.noise_threshold_dba = t.value("noise_threshold_dba", 70.0);
    config.trigger.daily_budget = t.value("daily_budget", 4);
    config.trigger.window_start_hour = t.value("window_start_hour", 9);
    config.trigger.window_end_hour = t.value("window_end_hour", 19);
    config.trigger.weekdays_only = t.value("weekdays_only", true);
    config.trigger.weather_poll_interval = minutes{t.value("weather_poll_minutes", 5)};
    if (t.contains("timezone")) {
      auto tz = TimeZone::lookup(t.value("timezone", std::string{}));
      if (!tz) return fail("unknown timezone (fixed-offset zones only)");
      config.trigger.timezone = *tz;
    }
  }
  if (doc.is_object() && doc.contains("protocol")) {
    const auto& p = doc["protocol"];
    if (!p.is_object()) return fail("protocol must be a table");
    config.phase.personalization_switch_count = p.value("personalization_switch_count", 50);
    config.phase.survey_quota = p.value("survey_quota", 100);
    config.phase.threshold_start_surveys = p.value("threshold_start_surveys", 0);
  }
  if (doc.is_object() && doc.contains("training_seed")) {
    config.training_seed = doc.value("training_seed", config.training_seed);
  }

  auto trigger_errors = validate(config.trigger);
  auto phase_errors = validate(config.phase);
  trigger_errors.insert(trigger_errors.end(), phase_errors.begin(), phase_errors.end());
  if (!trigger_errors.empty()) {
    std::string message = "invalid engine config:";
    for (const auto& e : trigger_errors) message += " [" + e.field + "] " + e.message + ";";
    return fail(message);
  }
  return Result<EngineConfig>::success(std::move(config));
}

json cohort_to_json(const CohortSpec& spec) {
  json j;
  j["n_participants"] = spec.n_participants;
  j["phase"] = to_string(spec.phase);
  j["duration_weekdays"] = spec.duration_weekdays;
  j["rng_seed"] = spec.rng_seed;
  j["start_date"] = format_date(spec.start_day);
  j["weather"] = spec.weather_fixture;
  j["defaults"] = participant_to_json(spec.defaults);
  json overrides = json::array();
  for (const ParticipantSpec& p : spec.participant_overrides) {
    overrides.push_back(participant_to_json(p));
  }
  j["participants"] = overrides;
  return j;
}

json engine_config_to_json(const EngineConfig& config) {
  json j;
  j["trigger"] = json{{"temp_threshold_c", config.trigger.temp_threshold_c},
                      {"noise_threshold_dba", config.trigger.noise_threshold_dba},
                      {"daily_budget", config.trigger.daily_budget},
                      {"window_start_hour", config.trigger.window_start_hour},
                      {"window_end_hour", config.trigger.window_end_hour},
                      {"weekdays_only", config.trigger.weekdays_only},
                      {"weather_poll_minutes", int(config.trigger.weather_poll_interval.count())},
                      {"timezone", config.trigger.timezone.name()}};
  j["protocol"] = json{
      {"personalization_switch_count", config.phase.personalization_switch_count},
      {"survey_quota", config.phase.survey_quota},
      {"threshold_start_surveys", config.phase.threshold_start_surveys}};
  j["training_seed"] = config.training_seed;
  return j;
}

// --- phase runner -------------------------------------------------------------

Result<std::unique_ptr<RunResult>> run_phase(const CohortSpec& spec,
                                             const EngineConfig& engine_config,
                                             const RunProviders& providers) {
  using Out = Result<std::unique_ptr<RunResult>>;
  {
    auto errors = validate(spec);
    if (!errors.empty()) {
      return Out::failure("invalid cohort spec: [" + errors.front().field + "] " +
                          errors.front().message);
    }
  }

  const TimeZone& tz = engine_config.trigger.timezone;
  const auto span = cohort_span_days(spec);
  if (span.empty()) return Out::failure("cohort span is empty");

  std::shared_ptr<WeatherProvider> provider = providers.weather;
  std::optional<StationRegistry> registry = providers.stations;
  if (provider && !registry) {
    return Out::failure("a live weather provider needs a station registry");
  }
  if (!provider) {
    // weather fixture: builtin scenario or CSV file
    Result<FixtureWeatherProvider> fixture =
        (spec.weather_fixture == "always_hot" || spec.weather_fixture == "never_hot" ||
         spec.weather_fixture == "diurnal")
            ? FixtureWeatherProvider::from_csv_text(make_weather_fixture_csv(
                  spec.weather_fixture, default_stations(), span.front(), span.back(), tz))
            : FixtureWeatherProvider::from_csv_file(spec.weather_fixture);
    if (!fixture.ok()) return Out::failure(fixture.error);
    auto owned = std::make_shared<FixtureWeatherProvider>(std::move(*fixture));
    auto from_fixture = StationRegistry::from_stations(owned->stations());
    if (!from_fixture.ok()) return Out::failure(from_fixture.error);
    registry = std::move(*from_fixture);
    provider = std::move(owned);
  }

  auto result = std::make_unique<RunResult>();
  result->cohort = generate_cohort(spec, tz);
  for (int i = 0; i < spec.n_participants; ++i) result->participants.push_back(participant_id(i));

  PushProvider* push = providers.push ? providers.push : &result->outbox;
  DecisionEngine engine(&result->store, std::move(*registry), provider, push,
                        providers.templates ? *providers.templates
                                            : MessageTemplates::defaults(),
                        engine_config);

  const auto tick_step = engine_config.trigger.weather_poll_interval;
  std::size_t survey_cursor = 0;
  std::size_t sample_cursor = 0;
  const auto& surveys = result->cohort.surveys;
  const auto& samples = result->cohort.sound_samples;

  for (std::int64_t day : span) {
    const UtcTime day_start = tz.local_day_start(day);
    for (minutes m{0}; m < minutes{24 * 60}; m += tick_step) {
      const UtcTime t = day_start + m;
      while (survey_cursor < surveys.size() && surveys[survey_cursor].ended_at <= t) {
        auto ack = result->store.append(Record{surveys[survey_cursor++]});
        if (!ack.ok()) return Out::failure("survey ingest failed: " + ack.error);
      }
      while (sample_cursor < samples.size() && samples[sample_cursor].observed_at <= t) {
        auto ack = result->store.append(Record{samples[sample_cursor++]});
        if (!ack.ok()) return Out::failure("sample ingest failed: " + ack.error);
      }
      auto records = engine.run_tick(t, result->participants);
      result->notifications.insert(result->notifications.end(),
                                   std::make_move_iterator(records.begin()),
                                   std::make_move_iterator(records.end()));
    }
  }
  return Out::success(std::move(result));
}

// --- summaries ----------------------------------------------------------------

std::vector<ParticipantSummary> summarize(std::span<const NotificationRecord> log) {
  std::map<std::string, ParticipantSummary> by_participant;
  for (const NotificationRecord& record : log) {
    ParticipantSummary& row = by_participant[record.event.participant.value];
    row.participant = record.event.participant.value;
    if (record.is_sent()) {
      if (record.event.mechanism == TriggerMechanism::Threshold) {
        ++row.threshold_sent;
      } else {
        ++row.personalized_sent;
      }
      continue;
    }
    switch (*record.suppressed) {
      case SuppressReason::OutsideWindow: ++row.suppressed_outside_window; break;
      case SuppressReason::Weekend: ++row.suppressed_weekend; break;
      case SuppressReason::BudgetExhausted: ++row.suppressed_budget_exhausted; break;
      case SuppressReason::DispatchError: ++row.suppressed_dispatch_error; break;
    }
  }
  std::vector<ParticipantSummary> table;
  table.reserve(by_participant.size());
  for (auto& [_, row] : by_participant) table.push_back(std::move(row));
  return table;
}

std::string summary_csv(std::span<const ParticipantSummary> table) {
  std::string out =
      "id_participant,threshold_sent,personalized_sent,suppressed_outside_window,"
      "suppressed_weekend,suppressed_budget_exhausted,suppressed_dispatch_error\n";
  for (const ParticipantSummary& row : table) {
    out += row.participant;
    out += ',' + std::to_string(row.threshold_sent);
    out += ',' + std::to_string(row.personalized_sent);
    out += ',' + std::to_string(row.suppressed_outside_window);
    out += ',' + std::to_string(row.suppressed_weekend);
    out += ',' + std::to_string(row.suppressed_budget_exhausted);
    out += ',' + std::to_string(row.suppressed_dispatch_error);
    out += '\n';
  }
  return out;
}

Result<std::vector<ParticipantSummary>> summary_from_csv(std::string_view text) {
  using Out = Result<std::vector<ParticipantSummary>>;
  std::vector<ParticipantSummary> table;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        cols.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cols.size() != 7) return Out::failure("summary row must have 7 columns");
    ParticipantSummary row;
    row.participant = cols[0];
    try {
      row.threshold_sent = std::stoi(cols[1]);
      row.personalized_sent = std::stoi(cols[2]);
      row.suppressed_outside_window = std::stoi(cols[3]);
      row.suppressed_weekend = std::stoi(cols[4]);
      row.suppressed_budget_exhausted = std::stoi(cols[5]);
      row.suppressed_dispatch_error = std::stoi(cols[6]);
    } catch (const std::exception&) {
      return Out::failure("summary row has a non-numeric count");
    }
    table.push_back(std::move(row));
  }
  return Out::success(std::move(table));
}

Result<std::vector<NotificationRecord>> notifications_from_csv_file(
    const std::filesystem::path& path) {
  using Out = Result<std::vector<NotificationRecord>>;
  std::ifstream in(path, std::ios::binary);
  if (!in) return Out::failure("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto parsed = csv::parse(text);
  if (!parsed.ok()) return Out::failure(path.string() + ": " + parsed.error);
  std::vector<NotificationRecord> log;
  for (auto& [key, record] : *parsed) {
    if (key.series != Series::Notification) {
      return Out::failure(path.string() + ": contains non-notification rows");
    }
    log.push_back(std::get<NotificationRecord>(std::move(record)));
  }
  return Out::success(std::move(log));
}

Result<std::monostate> write_run_dir(const RunResult& result, const CohortSpec& spec,
                                     const EngineConfig& engine_config,
                                     const std::filesystem::path& dir) {
  using Out = Result<std::monostate>;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return Out::failure("cannot create " + dir.string() + ": " + ec.message());

  {
    json config;
    config["cohort"] = cohort_to_json(spec);
    config["engine"] = engine_config_to_json(engine_config);
    std::ofstream out(dir / "resolved_config.json", std::ios::binary);
    if (!out) return Out::failure("cannot write resolved_config.json");
    out << config.dump(2) << '\n';
  }

  // per-series CSVs; absent series still get a header-only file
  auto keys = result.store.keys();
  for (Series series : {Series::Survey, Series::Sensor, Series::Weather, Series::Notification}) {
    const bool present = std::any_of(keys.begin(), keys.end(),
                                     [series](const StreamKey& k) { return k.series == series; });
    if (!present) keys.push_back(StreamKey{"-", series, SensorKind::SoundLevel});
  }
  auto files = export_csv(result.store, keys, UtcTime::min(), UtcTime::max(), dir);
  if (!files.ok()) return Out::failure(files.error);

  {
    auto table = summarize(result.notifications);
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    if (!out) return Out::failure("cannot write summary.csv");
    out << summary_csv(table);
  }
  {
    auto saved = result.outbox.export_outbox(dir / "outbox.jsonl");
    if (!saved.ok()) return Out::failure(saved.error);
  }
  return save_jsonl(result.store, dir / "store.jsonl");
}

}  // namespace jitai
