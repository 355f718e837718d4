#include "jitai/store.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace jitai {

std::string_view to_string(Series series) {
  switch (series) {
    case Series::Survey: return "survey";
    case Series::Sensor: return "sensor";
    case Series::Weather: return "weather";
    case Series::Notification: return "notification";
  }
  return "survey";
}

std::optional<Series> parse_series(std::string_view text) {
  if (text == "survey") return Series::Survey;
  if (text == "sensor") return Series::Sensor;
  if (text == "weather") return Series::Weather;
  if (text == "notification") return Series::Notification;
  return std::nullopt;
}

Series series_of(const Record& record) {
  return std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MicroSurveyResponse>) return Series::Survey;
        if constexpr (std::is_same_v<T, SensorSample>) return Series::Sensor;
        if constexpr (std::is_same_v<T, WeatherObservation>) return Series::Weather;
        if constexpr (std::is_same_v<T, NotificationRecord>) return Series::Notification;
      },
      record);
}

UtcTime record_time(const Record& record) {
  return std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MicroSurveyResponse>) return r.ended_at;
        if constexpr (std::is_same_v<T, SensorSample>) return r.observed_at;
        if constexpr (std::is_same_v<T, WeatherObservation>) return r.observed_at;
        if constexpr (std::is_same_v<T, NotificationRecord>) return r.event.fired_at;
      },
      record);
}

std::vector<ValidationError> validate_record(const Record& record) {
  return std::visit(
      [](const auto& r) -> std::vector<ValidationError> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NotificationRecord>) {
          std::vector<ValidationError> errors;
          if (r.event.participant.empty()) {
            errors.push_back({"participant", "participant id must be non-empty"});
          }
          return errors;
        } else {
          return validate(r);
        }
      },
      record);
}

StreamKey key_for(const Record& record) {
  return std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MicroSurveyResponse>) {
          return StreamKey::surveys(r.participant);
        } else if constexpr (std::is_same_v<T, SensorSample>) {
          return StreamKey::sensor(r.participant, r.kind);
        } else if constexpr (std::is_same_v<T, WeatherObservation>) {
          return StreamKey::weather(r.station_id);
        } else {
          return StreamKey::notifications(r.event.participant);
        }
      },
      record);
}

struct TimeSeriesStore::Stream {
  mutable std::shared_mutex mutex;
  // insertion at upper_bound keeps equal timestamps in arrival order
  std::multimap<UtcTime, StoredRecord> records;
  std::uint64_t next_sequence = 1;
};

TimeSeriesStore::TimeSeriesStore() = default;
TimeSeriesStore::~TimeSeriesStore() = default;

TimeSeriesStore::Stream& TimeSeriesStore::stream_for(const StreamKey& key) {
  {
    std::shared_lock lock(map_mutex_);
    auto it = streams_.find(key);
    if (it != streams_.end()) return *it->second;
  }
  std::unique_lock lock(map_mutex_);
  auto& slot = streams_[key];
  if (!slot) slot = std::make_unique<Stream>();
  return *slot;
}

const TimeSeriesStore::Stream* TimeSeriesStore::find_stream(const StreamKey& key) const {
  std::shared_lock lock(map_mutex_);
  auto it = streams_.find(key);
  return it == streams_.end() ? nullptr : it->second.get();
}

Result<std::uint64_t> TimeSeriesStore::append(const StreamKey& key, Record record) {
  if (key_for(record) != key) {
    return Result<std::uint64_t>::failure("record does not belong to stream " + key.owner +
                                          "/" + std::string(to_string(key.series)));
  }
  auto errors = validate_record(record);
  if (!errors.empty()) {
    std::string message = "validation failed:";
    for (const auto& e : errors) message += " [" + e.field + "] " + e.message + ";";
    return Result<std::uint64_t>::failure(message);
  }

  Stream& stream = stream_for(key);
  const UtcTime t = record_time(record);
  std::unique_lock lock(stream.mutex);
  StoredRecord stored{stream.next_sequence++, arrival_counter_.fetch_add(1) + 1,
                      std::move(record)};
  const std::uint64_t sequence = stored.sequence;
  stream.records.emplace(t, std::move(stored));
  return Result<std::uint64_t>::success(sequence);
}

Result<std::uint64_t> TimeSeriesStore::append(Record record) {
  StreamKey key = key_for(record);
  return append(key, std::move(record));
}

std::vector<Record> TimeSeriesStore::query_range(const StreamKey& key, UtcTime t0,
                                                 UtcTime t1) const {
  std::vector<Record> out;
  if (t0 >= t1) return out;
  const Stream* stream = find_stream(key);
  if (!stream) return out;
  std::shared_lock lock(stream->mutex);
  for (auto it = stream->records.lower_bound(t0); it != stream->records.end() && it->first < t1;
       ++it) {
    out.push_back(it->second.record);
  }
  return out;
}

std::optional<Record> TimeSeriesStore::latest_at_or_before(const StreamKey& key,
                                                           UtcTime t) const {
  const Stream* stream = find_stream(key);
  if (!stream) return std::nullopt;
  std::shared_lock lock(stream->mutex);
  auto it = stream->records.upper_bound(t);
  if (it == stream->records.begin()) return std::nullopt;
  --it;
  return it->second.record;
}

int TimeSeriesStore::count_surveys(const ParticipantId& participant, UtcTime up_to) const {
  const Stream* stream = find_stream(StreamKey::surveys(participant));
  if (!stream) return 0;
  std::shared_lock lock(stream->mutex);
  int count = 0;
  for (auto it = stream->records.begin();
       it != stream->records.end() && it->first <= up_to; ++it) {
    ++count;
  }
  return count;
}

std::size_t TimeSeriesStore::size(const StreamKey& key) const {
  const Stream* stream = find_stream(key);
  if (!stream) return 0;
  std::shared_lock lock(stream->mutex);
  return stream->records.size();
}

std::vector<StreamKey> TimeSeriesStore::keys() const {
  std::shared_lock lock(map_mutex_);
  std::vector<StreamKey> out;
  out.reserve(streams_.size());
  for (const auto& [key, _] : streams_) out.push_back(key);
  return out;
}

std::vector<StoredRecord> TimeSeriesStore::dump(const StreamKey& key) const {
  std::vector<StoredRecord> out;
  const Stream* stream = find_stream(key);
  if (!stream) return out;
  std::shared_lock lock(stream->mutex);
  out.reserve(stream->records.size());
  for (const auto& [_, stored] : stream->records) out.push_back(stored);
  return out;
}

std::vector<StoredRecord> TimeSeriesStore::dump_all() const {
  std::vector<StoredRecord> out;
  for (const StreamKey& key : keys()) {
    auto part = dump(key);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end(),
            [](const StoredRecord& a, const StoredRecord& b) { return a.arrival < b.arrival; });
  return out;
}

}  // namespace jitai
