#include "jitai/store.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace jitai {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::optional<double> parse_double(std::string_view s) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_int_field(std::string_view s) {
  int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string csv_escape(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(value);
  }
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void append_row(std::string& out, UtcTime t, std::string_view owner, Series series,
                std::string_view field, std::string_view value) {
  out += format_rfc3339(t);
  out += ',';
  out += csv_escape(owner);
  out += ',';
  out += to_string(series);
  out += ',';
  out += field;
  out += ',';
  out += csv_escape(value);
  out += '\n';
}

// RFC 4180 field splitting; quoted fields may contain commas and newlines.
Result<std::vector<std::vector<std::string>>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(row);
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallowed; \r\n handled at \n
    } else if (c == '\n') {
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) {
    return Result<std::vector<std::vector<std::string>>>::failure("unterminated quoted field");
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return Result<std::vector<std::vector<std::string>>>::success(std::move(rows));
}

// Field emission order per series; the first field marks a record boundary.
void emit_survey(std::string& out, const MicroSurveyResponse& s) {
  const UtcTime t = s.ended_at;
  const std::string& owner = s.participant.value;
  append_row(out, t, owner, Series::Survey, "started_at", format_rfc3339(s.started_at));
  append_row(out, t, owner, Series::Survey, "location_acquired_at",
             format_rfc3339(s.location_acquired_at));
  append_row(out, t, owner, Series::Survey, "lat", format_double(s.lat));
  append_row(out, t, owner, Series::Survey, "lon", format_double(s.lon));
  append_row(out, t, owner, Series::Survey, "thermal", s.thermal.text());
  append_row(out, t, owner, Series::Survey, "noise", s.noise.text());
  if (s.sound_source) {
    append_row(out, t, owner, Series::Survey, "sound_source", to_string(*s.sound_source));
  }
}

void emit_sensor(std::string& out, const SensorSample& s) {
  append_row(out, s.observed_at, s.participant.value, Series::Sensor, to_string(s.kind),
             format_double(s.value));
}

void emit_weather(std::string& out, const WeatherObservation& w) {
  const UtcTime t = w.observed_at;
  append_row(out, t, w.station_id, Series::Weather, "station_id", w.station_id);
  append_row(out, t, w.station_id, Series::Weather, "station_lat", format_double(w.station_lat));
  append_row(out, t, w.station_id, Series::Weather, "station_lon", format_double(w.station_lon));
  append_row(out, t, w.station_id, Series::Weather, "air_temperature_c",
             format_double(w.air_temperature_c));
  if (w.rainfall_mm) {
    append_row(out, t, w.station_id, Series::Weather, "rainfall_mm", format_double(*w.rainfall_mm));
  }
}

void emit_notification(std::string& out, const NotificationRecord& n) {
  const UtcTime t = n.event.fired_at;
  const std::string& owner = n.event.participant.value;
  append_row(out, t, owner, Series::Notification, "kind", to_string(n.event.kind));
  append_row(out, t, owner, Series::Notification, "mechanism", to_string(n.event.mechanism));
  append_row(out, t, owner, Series::Notification, "target_label", n.event.target_label.text());
  append_row(out, t, owner, Series::Notification, "cause_kind", to_string(n.event.cause.kind));
  append_row(out, t, owner, Series::Notification, "cause_value",
             format_double(n.event.cause.value));
  append_row(out, t, owner, Series::Notification, "delivery_status",
             n.is_sent() ? "sent" : "suppressed");
  if (n.suppressed) {
    append_row(out, t, owner, Series::Notification, "suppress_reason", to_string(*n.suppressed));
  }
  if (n.sequence_in_day) {
    append_row(out, t, owner, Series::Notification, "sequence_in_day",
               std::to_string(*n.sequence_in_day));
  }
  if (n.event.location) {
    append_row(out, t, owner, Series::Notification, "lat", format_double(n.event.location->lat));
    append_row(out, t, owner, Series::Notification, "lon", format_double(n.event.location->lon));
  }
  if (!n.payload_text.empty()) {
    append_row(out, t, owner, Series::Notification, "payload_text", n.payload_text);
  }
}

using FieldMap = std::vector<std::pair<std::string, std::string>>;

std::optional<std::string> field_value(const FieldMap& fields, std::string_view name) {
  for (const auto& [k, v] : fields) {
    if (k == name) return v;
  }
  return std::nullopt;
}

Result<Record> survey_from_fields(const std::string& owner, UtcTime ended_at,
                                  const FieldMap& fields) {
  auto fail = [](std::string m) { return Result<Record>::failure(std::move(m)); };
  MicroSurveyResponse s;
  s.participant = ParticipantId{owner};
  s.ended_at = ended_at;
  auto started = field_value(fields, "started_at");
  auto acquired = field_value(fields, "location_acquired_at");
  auto lat = field_value(fields, "lat");
  auto lon = field_value(fields, "lon");
  auto thermal = field_value(fields, "thermal");
  auto noise = field_value(fields, "noise");
  if (!started || !acquired || !lat || !lon || !thermal || !noise) {
    return fail("survey record missing required fields");
  }
  auto started_t = parse_rfc3339(*started);
  auto acquired_t = parse_rfc3339(*acquired);
  auto lat_v = parse_double(*lat);
  auto lon_v = parse_double(*lon);
  auto thermal_l = PreferenceLabel::parse(LabelKind::Thermal, *thermal);
  auto noise_l = PreferenceLabel::parse(LabelKind::Noise, *noise);
  if (!started_t || !acquired_t) return fail("survey: bad timestamp");
  if (!lat_v || !lon_v) return fail("survey: bad coordinate");
  if (!thermal_l) return fail("survey: unknown thermal label '" + *thermal + "'");
  if (!noise_l) return fail("survey: unknown noise label '" + *noise + "'");
  s.started_at = *started_t;
  s.location_acquired_at = *acquired_t;
  s.lat = *lat_v;
  s.lon = *lon_v;
  s.thermal = *thermal_l;
  s.noise = *noise_l;
  if (auto src = field_value(fields, "sound_source")) {
    auto parsed = parse_sound_source(*src);
    if (!parsed) return fail("survey: unknown sound_source '" + *src + "'");
    s.sound_source = *parsed;
  }
  return Result<Record>::success(Record{std::move(s)});
}

Result<Record> sensor_from_fields(const std::string& owner, UtcTime observed_at,
                                  const FieldMap& fields) {
  if (fields.size() != 1) {
    return Result<Record>::failure("sensor record must have exactly one field");
  }
  auto kind = parse_sensor_kind(fields[0].first);
  if (!kind) {
    return Result<Record>::failure("sensor: unknown kind '" + fields[0].first + "'");
  }
  auto value = parse_double(fields[0].second);
  if (!value) return Result<Record>::failure("sensor: bad value");
  return Result<Record>::success(
      Record{SensorSample{ParticipantId{owner}, *kind, *value, observed_at}});
}

Result<Record> weather_from_fields(const std::string& owner, UtcTime observed_at,
                                   const FieldMap& fields) {
  auto fail = [](std::string m) { return Result<Record>::failure(std::move(m)); };
  auto id = field_value(fields, "station_id");
  auto lat = field_value(fields, "station_lat");
  auto lon = field_value(fields, "station_lon");
  auto temp = field_value(fields, "air_temperature_c");
  if (!id || !lat || !lon || !temp) return fail("weather record missing required fields");
  auto lat_v = parse_double(*lat);
  auto lon_v = parse_double(*lon);
  auto temp_v = parse_double(*temp);
  if (!lat_v || !lon_v || !temp_v) return fail("weather: bad numeric field");
  WeatherObservation w;
  w.station_id = *id;
  w.station_lat = *lat_v;
  w.station_lon = *lon_v;
  w.air_temperature_c = *temp_v;
  w.observed_at = observed_at;
  if (auto rain = field_value(fields, "rainfall_mm")) {
    auto rain_v = parse_double(*rain);
    if (!rain_v) return fail("weather: bad rainfall");
    w.rainfall_mm = *rain_v;
  }
  (void)owner;
  return Result<Record>::success(Record{std::move(w)});
}

Result<Record> notification_from_fields(const std::string& owner, UtcTime fired_at,
                                        const FieldMap& fields) {
  auto fail = [](std::string m) { return Result<Record>::failure(std::move(m)); };
  auto kind = field_value(fields, "kind");
  auto mechanism = field_value(fields, "mechanism");
  auto target = field_value(fields, "target_label");
  auto cause_kind = field_value(fields, "cause_kind");
  auto cause_value = field_value(fields, "cause_value");
  auto status = field_value(fields, "delivery_status");
  if (!kind || !mechanism || !target || !cause_kind || !cause_value || !status) {
    return fail("notification record missing required fields");
  }
  auto kind_v = parse_label_kind(*kind);
  auto mech_v = parse_mechanism(*mechanism);
  auto ck_v = parse_cause_kind(*cause_kind);
  auto cv_v = parse_double(*cause_value);
  if (!kind_v || !mech_v || !ck_v || !cv_v) return fail("notification: bad enum or value");
  auto target_v = PreferenceLabel::parse(*kind_v, *target);
  if (!target_v) return fail("notification: unknown target_label '" + *target + "'");

  NotificationRecord n;
  n.event.participant = ParticipantId{owner};
  n.event.kind = *kind_v;
  n.event.mechanism = *mech_v;
  n.event.target_label = *target_v;
  n.event.fired_at = fired_at;
  n.event.cause = TriggerCause{*ck_v, *cv_v};
  if (*status == "sent") {
    auto seq = field_value(fields, "sequence_in_day");
    if (!seq) return fail("notification: sent record missing sequence_in_day");
    auto seq_v = parse_int_field(*seq);
    if (!seq_v) return fail("notification: bad sequence_in_day");
    n.sequence_in_day = *seq_v;
  } else if (*status == "suppressed") {
    auto reason = field_value(fields, "suppress_reason");
    if (!reason) return fail("notification: suppressed record missing reason");
    auto reason_v = parse_suppress_reason(*reason);
    if (!reason_v) return fail("notification: unknown suppress_reason '" + *reason + "'");
    n.suppressed = *reason_v;
  } else {
    return fail("notification: unknown delivery_status '" + *status + "'");
  }
  auto lat = field_value(fields, "lat");
  auto lon = field_value(fields, "lon");
  if (lat.has_value() != lon.has_value()) return fail("notification: lat/lon must pair");
  if (lat && lon) {
    auto lat_v = parse_double(*lat);
    auto lon_v = parse_double(*lon);
    if (!lat_v || !lon_v) return fail("notification: bad coordinate");
    n.event.location = GeoPoint{*lat_v, *lon_v};
  }
  if (auto payload = field_value(fields, "payload_text")) n.payload_text = *payload;
  return Result<Record>::success(Record{std::move(n)});
}

Result<Record> record_from_fields(Series series, const std::string& owner, UtcTime t,
                                  const FieldMap& fields) {
  switch (series) {
    case Series::Survey: return survey_from_fields(owner, t, fields);
    case Series::Sensor: return sensor_from_fields(owner, t, fields);
    case Series::Weather: return weather_from_fields(owner, t, fields);
    case Series::Notification: return notification_from_fields(owner, t, fields);
  }
  return Result<Record>::failure("unknown series");
}

std::string_view boundary_field(Series series) {
  switch (series) {
    case Series::Survey: return "started_at";
    case Series::Weather: return "station_id";
    case Series::Notification: return "kind";
    case Series::Sensor: return "";  // every sensor row is its own record
  }
  return "";
}

}  // namespace

namespace csv {

void append_record_rows(std::string& out, const StreamKey& key, const Record& record) {
  (void)key;
  std::visit(
      [&out](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MicroSurveyResponse>) emit_survey(out, r);
        else if constexpr (std::is_same_v<T, SensorSample>) emit_sensor(out, r);
        else if constexpr (std::is_same_v<T, WeatherObservation>) emit_weather(out, r);
        else emit_notification(out, r);
      },
      record);
}

std::string encode_series(const TimeSeriesStore& store, Series series,
                          std::span<const StreamKey> keys, UtcTime t0, UtcTime t1) {
  struct Item {
    UtcTime t;
    std::string owner;
    std::uint64_t sequence;
    const Record* record;
  };
  std::vector<std::vector<StoredRecord>> dumps;
  std::vector<Item> items;
  for (const StreamKey& key : keys) {
    if (key.series != series) continue;
    dumps.push_back(store.dump(key));
    for (const StoredRecord& stored : dumps.back()) {
      const UtcTime t = record_time(stored.record);
      if (t < t0 || t >= t1) continue;
      items.push_back({t, key.owner, stored.sequence, &stored.record});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.t, a.owner, a.sequence) < std::tie(b.t, b.owner, b.sequence);
  });

  std::string out{kHeader};
  out += '\n';
  for (const Item& item : items) {
    append_record_rows(out, StreamKey{}, *item.record);
  }
  return out;
}

Result<std::vector<std::pair<StreamKey, Record>>> parse(std::string_view text) {
  using Out = Result<std::vector<std::pair<StreamKey, Record>>>;
  auto rows = split_csv(text);
  if (!rows.ok()) return Out::failure(rows.error);
  if (rows->empty()) return Out::failure("missing CSV header");

  const auto& header = (*rows)[0];
  if (header.size() != 5 || header[0] != "timestamp" || header[1] != "id_participant" ||
      header[2] != "series" || header[3] != "field" || header[4] != "value") {
    return Out::failure("unexpected CSV header");
  }

  std::vector<std::pair<StreamKey, Record>> records;
  bool building = false;
  Series cur_series{};
  std::string cur_owner;
  UtcTime cur_time{};
  FieldMap fields;

  auto flush = [&]() -> std::optional<std::string> {
    if (!building) return std::nullopt;
    auto built = record_from_fields(cur_series, cur_owner, cur_time, fields);
    if (!built.ok()) return built.error;
    records.emplace_back(key_for(*built), std::move(*built));
    fields.clear();
    building = false;
    return std::nullopt;
  };

  for (std::size_t i = 1; i < rows->size(); ++i) {
    const auto& row = (*rows)[i];
    if (row.size() != 5) {
      return Out::failure("row " + std::to_string(i + 1) + ": expected 5 columns");
    }
    auto t = parse_rfc3339(row[0]);
    if (!t) return Out::failure("row " + std::to_string(i + 1) + ": bad timestamp");
    auto series = parse_series(row[2]);
    if (!series) return Out::failure("row " + std::to_string(i + 1) + ": unknown series");
    const std::string& owner = row[1];
    const std::string& field = row[3];
    const std::string& value = row[4];

    const bool new_record = !building || *series != cur_series || owner != cur_owner ||
                            *t != cur_time || *series == Series::Sensor ||
                            field == boundary_field(*series);
    if (new_record) {
      if (auto err = flush()) return Out::failure(*err);
      building = true;
      cur_series = *series;
      cur_owner = owner;
      cur_time = *t;
    }
    fields.emplace_back(field, value);
    if (*series == Series::Sensor) {
      if (auto err = flush()) return Out::failure(*err);
    }
  }
  if (auto err = flush()) return Out::failure(*err);
  return Out::success(std::move(records));
}

}  // namespace csv

namespace {

std::filesystem::path series_file(Series series) {
  switch (series) {
    case Series::Survey: return "surveys.csv";
    case Series::Sensor: return "sensors.csv";
    case Series::Weather: return "weather.csv";
    case Series::Notification: return "notifications.csv";
  }
  return "records.csv";
}

}  // namespace

Result<std::vector<std::filesystem::path>> export_csv(const TimeSeriesStore& store,
                                                      std::span<const StreamKey> keys,
                                                      UtcTime t0, UtcTime t1,
                                                      const std::filesystem::path& dir) {
  using Out = Result<std::vector<std::filesystem::path>>;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return Out::failure("cannot create " + dir.string() + ": " + ec.message());

  std::vector<Series> present;
  for (const StreamKey& key : keys) {
    if (std::find(present.begin(), present.end(), key.series) == present.end()) {
      present.push_back(key.series);
    }
  }
  std::sort(present.begin(), present.end());

  std::vector<std::filesystem::path> written;
  for (Series series : present) {
    const std::filesystem::path path = dir / series_file(series);
    std::ofstream out(path, std::ios::binary);
    if (!out) return Out::failure("cannot open " + path.string());
    out << csv::encode_series(store, series, keys, t0, t1);
    if (!out.good()) return Out::failure("write failed: " + path.string());
    written.push_back(path);
  }
  return Out::success(std::move(written));
}

Result<std::vector<std::filesystem::path>> export_csv(const TimeSeriesStore& store,
                                                      const std::filesystem::path& dir) {
  auto keys = store.keys();
  return export_csv(store, keys, UtcTime::min(), UtcTime::max(), dir);
}

// --- JSONL -------------------------------------------------------------------

namespace {

json record_to_json(const Record& record) {
  json j;
  std::visit(
      [&j](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MicroSurveyResponse>) {
          j["series"] = "survey";
          j["id_participant"] = r.participant.value;
          j["started_at"] = format_rfc3339(r.started_at);
          j["ended_at"] = format_rfc3339(r.ended_at);
          j["lat"] = r.lat;
          j["lon"] = r.lon;
          j["location_acquired_at"] = format_rfc3339(r.location_acquired_at);
          j["thermal"] = r.thermal.text();
          j["noise"] = r.noise.text();
          if (r.sound_source) j["sound_source"] = to_string(*r.sound_source);
        } else if constexpr (std::is_same_v<T, SensorSample>) {
          j["series"] = "sensor";
          j["id_participant"] = r.participant.value;
          j["kind"] = to_string(r.kind);
          j["value"] = r.value;
          j["observed_at"] = format_rfc3339(r.observed_at);
        } else if constexpr (std::is_same_v<T, WeatherObservation>) {
          j["series"] = "weather";
          j["station_id"] = r.station_id;
          j["station_lat"] = r.station_lat;
          j["station_lon"] = r.station_lon;
          j["air_temperature_c"] = r.air_temperature_c;
          if (r.rainfall_mm) j["rainfall_mm"] = *r.rainfall_mm;
          j["observed_at"] = format_rfc3339(r.observed_at);
        } else {
          j["series"] = "notification";
          j["id_participant"] = r.event.participant.value;
          j["kind"] = to_string(r.event.kind);
          j["mechanism"] = to_string(r.event.mechanism);
          j["target_label"] = r.event.target_label.text();
          j["fired_at"] = format_rfc3339(r.event.fired_at);
          j["cause_kind"] = to_string(r.event.cause.kind);
          j["cause_value"] = r.event.cause.value;
          j["delivery_status"] = r.is_sent() ? "sent" : "suppressed";
          if (r.suppressed) j["suppress_reason"] = to_string(*r.suppressed);
          if (r.sequence_in_day) j["sequence_in_day"] = *r.sequence_in_day;
          if (r.event.location) {
            j["lat"] = r.event.location->lat;
            j["lon"] = r.event.location->lon;
          }
          j["payload_text"] = r.payload_text;
        }
      },
      record);
  return j;
}

std::optional<std::string> get_string(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<double> get_number(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nullopt;
  return it->get<double>();
}

std::optional<UtcTime> get_time(const json& j, std::string_view key) {
  auto s = get_string(j, key);
  if (!s) return std::nullopt;
  return parse_rfc3339(*s);
}

Result<Record> record_from_json(const json& j) {
  auto fail = [](std::string m) { return Result<Record>::failure(std::move(m)); };
  if (!j.is_object()) return fail("line is not a JSON object");
  auto series_s = get_string(j, "series");
  if (!series_s) return fail("missing \"series\" discriminator");
  auto series = parse_series(*series_s);
  if (!series) return fail("unknown series '" + *series_s + "'");

  switch (*series) {
    case Series::Survey: {
      MicroSurveyResponse s;
      auto id = get_string(j, "id_participant");
      auto started = get_time(j, "started_at");
      auto ended = get_time(j, "ended_at");
      auto lat = get_number(j, "lat");
      auto lon = get_number(j, "lon");
      auto acquired = get_time(j, "location_acquired_at");
      auto thermal_s = get_string(j, "thermal");
      auto noise_s = get_string(j, "noise");
      if (!id || !started || !ended || !lat || !lon || !acquired || !thermal_s || !noise_s) {
        return fail("survey: missing or mistyped field");
      }
      auto thermal = PreferenceLabel::parse(LabelKind::Thermal, *thermal_s);
      auto noise = PreferenceLabel::parse(LabelKind::Noise, *noise_s);
      if (!thermal) return fail("survey: unknown thermal label '" + *thermal_s + "'");
      if (!noise) return fail("survey: unknown noise label '" + *noise_s + "'");
      s.participant = ParticipantId{*id};
      s.started_at = *started;
      s.ended_at = *ended;
      s.lat = *lat;
      s.lon = *lon;
      s.location_acquired_at = *acquired;
      s.thermal = *thermal;
      s.noise = *noise;
      if (j.contains("sound_source")) {
        auto src_s = get_string(j, "sound_source");
        if (!src_s) return fail("survey: mistyped sound_source");
        auto src = parse_sound_source(*src_s);
        if (!src) return fail("survey: unknown sound_source '" + *src_s + "'");
        s.sound_source = *src;
      }
      return Result<Record>::success(Record{std::move(s)});
    }
    case Series::Sensor: {
      auto id = get_string(j, "id_participant");
      auto kind_s = get_string(j, "kind");
      auto value = get_number(j, "value");
      auto observed = get_time(j, "observed_at");
      if (!id || !kind_s || !value || !observed) return fail("sensor: missing or mistyped field");
      auto kind = parse_sensor_kind(*kind_s);
      if (!kind) return fail("sensor: unknown kind '" + *kind_s + "'");
      return Result<Record>::success(
          Record{SensorSample{ParticipantId{*id}, *kind, *value, *observed}});
    }
    case Series::Weather: {
      WeatherObservation w;
      auto id = get_string(j, "station_id");
      auto lat = get_number(j, "station_lat");
      auto lon = get_number(j, "station_lon");
      auto temp = get_number(j, "air_temperature_c");
      auto observed = get_time(j, "observed_at");
      if (!id || !lat || !lon || !temp || !observed) {
        return fail("weather: missing or mistyped field");
      }
      w.station_id = *id;
      w.station_lat = *lat;
      w.station_lon = *lon;
      w.air_temperature_c = *temp;
      w.observed_at = *observed;
      if (j.contains("rainfall_mm")) {
        auto rain = get_number(j, "rainfall_mm");
        if (!rain) return fail("weather: mistyped rainfall_mm");
        w.rainfall_mm = *rain;
      }
      return Result<Record>::success(Record{std::move(w)});
    }
    case Series::Notification: {
      NotificationRecord n;
      auto id = get_string(j, "id_participant");
      auto kind_s = get_string(j, "kind");
      auto mech_s = get_string(j, "mechanism");
      auto target_s = get_string(j, "target_label");
      auto fired = get_time(j, "fired_at");
      auto ck_s = get_string(j, "cause_kind");
      auto cv = get_number(j, "cause_value");
      auto status = get_string(j, "delivery_status");
      auto payload = get_string(j, "payload_text");
      if (!id || !kind_s || !mech_s || !target_s || !fired || !ck_s || !cv || !status ||
          !payload) {
        return fail("notification: missing or mistyped field");
      }
      auto kind = parse_label_kind(*kind_s);
      auto mech = parse_mechanism(*mech_s);
      auto ck = parse_cause_kind(*ck_s);
      if (!kind || !mech || !ck) return fail("notification: unknown enum value");
      auto target = PreferenceLabel::parse(*kind, *target_s);
      if (!target) return fail("notification: unknown target_label '" + *target_s + "'");
      n.event.participant = ParticipantId{*id};
      n.event.kind = *kind;
      n.event.mechanism = *mech;
      n.event.target_label = *target;
      n.event.fired_at = *fired;
      n.event.cause = TriggerCause{*ck, *cv};
      n.payload_text = *payload;
      if (*status == "sent") {
        auto it = j.find("sequence_in_day");
        if (it == j.end() || !it->is_number_integer()) {
          return fail("notification: sent record missing sequence_in_day");
        }
        n.sequence_in_day = it->get<int>();
      } else if (*status == "suppressed") {
        auto reason_s = get_string(j, "suppress_reason");
        if (!reason_s) return fail("notification: suppressed record missing reason");
        auto reason = parse_suppress_reason(*reason_s);
        if (!reason) return fail("notification: unknown suppress_reason '" + *reason_s + "'");
        n.suppressed = *reason;
      } else {
        return fail("notification: unknown delivery_status '" + *status + "'");
      }
      const bool has_lat = j.contains("lat"), has_lon = j.contains("lon");
      if (has_lat != has_lon) return fail("notification: lat/lon must pair");
      if (has_lat) {
        auto lat = get_number(j, "lat");
        auto lon = get_number(j, "lon");
        if (!lat || !lon) return fail("notification: mistyped coordinate");
        n.event.location = GeoPoint{*lat, *lon};
      }
      return Result<Record>::success(Record{std::move(n)});
    }
  }
  return fail("unknown series");
}

}  // namespace

std::string record_to_jsonl_line(const Record& record) {
  return record_to_json(record).dump();
}

IngestReport import_jsonl(TimeSeriesStore& store, std::istream& in) {
  IngestReport report;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      report.errors.push_back({line_no, "malformed JSON"});
      continue;
    }
    auto record = record_from_json(j);
    if (!record.ok()) {
      report.errors.push_back({line_no, record.error});
      continue;
    }
    auto ack = store.append(std::move(*record));
    if (!ack.ok()) {
      report.errors.push_back({line_no, ack.error});
      continue;
    }
    ++report.appended;
  }
  return report;
}

IngestReport import_jsonl_text(TimeSeriesStore& store, std::string_view text) {
  std::istringstream in{std::string(text)};
  return import_jsonl(store, in);
}

std::string to_jsonl(const TimeSeriesStore& store) {
  std::string out;
  for (const StoredRecord& stored : store.dump_all()) {
    out += record_to_jsonl_line(stored.record);
    out += '\n';
  }
  return out;
}

Result<std::monostate> save_jsonl(const TimeSeriesStore& store,
                                  const std::filesystem::path& file) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary);
  if (!out) return Result<std::monostate>::failure("cannot open " + file.string());
  out << to_jsonl(store);
  if (!out.good()) return Result<std::monostate>::failure("write failed: " + file.string());
  return Result<std::monostate>::success({});
}

Result<IngestReport> load_jsonl(TimeSeriesStore& store, const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return Result<IngestReport>::failure("cannot open " + file.string());
  return Result<IngestReport>::success(import_jsonl(store, in));
}

}  // namespace jitai
