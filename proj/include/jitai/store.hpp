#pragma once
// Append-only time-series store plus its two codecs (long-format CSV and
// JSONL). One ordered sequence per stream key; records sort by timestamp with
// ties broken by arrival. Nothing is ever mutated or deleted.
//
// Concurrency: appends on one key serialize, appends on distinct keys run in
// parallel, reads never block reads.

#include "jitai/domain.hpp"
#include "jitai/result.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace jitai {

enum class Series : std::uint8_t { Survey, Sensor, Weather, Notification };

std::string_view to_string(Series series);
std::optional<Series> parse_series(std::string_view text);

using Record =
    std::variant<MicroSurveyResponse, SensorSample, WeatherObservation, NotificationRecord>;

Series series_of(const Record& record);
// Canonical event time: ended_at for surveys, observed_at for sensor and
// weather records, fired_at for notifications.
UtcTime record_time(const Record& record);
std::vector<ValidationError> validate_record(const Record& record);

struct StreamKey {
  std::string owner;  // participant id; station id for weather streams
  Series series = Series::Survey;
  SensorKind sensor_kind = SensorKind::SoundLevel;  // meaningful only for Sensor

  static StreamKey surveys(const ParticipantId& participant) {
    return {participant.value, Series::Survey, SensorKind::SoundLevel};
  }
  static StreamKey sensor(const ParticipantId& participant, SensorKind kind) {
    return {participant.value, Series::Sensor, kind};
  }
  static StreamKey weather(std::string station_id) {
    return {std::move(station_id), Series::Weather, SensorKind::SoundLevel};
  }
  static StreamKey notifications(const ParticipantId& participant) {
    return {participant.value, Series::Notification, SensorKind::SoundLevel};
  }

  auto operator<=>(const StreamKey&) const = default;
};

// The stream a record belongs to, derived from the record itself.
StreamKey key_for(const Record& record);

struct StoredRecord {
  std::uint64_t sequence = 0;  // 1-based, per key
  std::uint64_t arrival = 0;   // 1-based, global append order
  Record record;
};

class TimeSeriesStore {
 public:
  TimeSeriesStore();
  ~TimeSeriesStore();
  TimeSeriesStore(const TimeSeriesStore&) = delete;
  TimeSeriesStore& operator=(const TimeSeriesStore&) = delete;

  // Validates, checks the record matches the key's series/kind/owner, then
  // appends. Returns the per-key sequence number.
  Result<std::uint64_t> append(const StreamKey& key, Record record);
  Result<std::uint64_t> append(Record record);  // key derived from the record

  // Records with time in [t0, t1), sorted ascending, ties by arrival.
  std::vector<Record> query_range(const StreamKey& key, UtcTime t0, UtcTime t1) const;
  std::optional<Record> latest_at_or_before(const StreamKey& key, UtcTime t) const;

  // Survey records of the participant with ended_at <= up_to (inclusive).
  int count_surveys(const ParticipantId& participant, UtcTime up_to) const;

  std::size_t size(const StreamKey& key) const;
  std::vector<StreamKey> keys() const;  // sorted
  std::vector<StoredRecord> dump(const StreamKey& key) const;  // time order
  std::vector<StoredRecord> dump_all() const;                  // global arrival order

 private:
  struct Stream;
  Stream& stream_for(const StreamKey& key);
  const Stream* find_stream(const StreamKey& key) const;

  mutable std::shared_mutex map_mutex_;
  std::map<StreamKey, std::unique_ptr<Stream>> streams_;
  std::atomic<std::uint64_t> arrival_counter_{0};
};

// --- long-format CSV codec -------------------------------------------------
//
// Columns: timestamp,id_participant,series,field,value. One row per (record,
// field); a record's rows are consecutive and the first field of each series
// (started_at / sensor kind / station_id / kind) marks a record boundary.

namespace csv {

inline constexpr std::string_view kHeader = "timestamp,id_participant,series,field,value";

void append_record_rows(std::string& out, const StreamKey& key, const Record& record);
// Full file for one series across the given keys, rows ordered by
// (time, owner, sequence). Always includes the header.
std::string encode_series(const TimeSeriesStore& store, Series series,
                          std::span<const StreamKey> keys, UtcTime t0, UtcTime t1);
Result<std::vector<std::pair<StreamKey, Record>>> parse(std::string_view text);

}  // namespace csv

// Writes one file per series present in `keys` (surveys.csv, sensors.csv,
// weather.csv, notifications.csv) under `dir`; header-only when a selected
// series has no records in range. Returns the files written.
Result<std::vector<std::filesystem::path>> export_csv(const TimeSeriesStore& store,
                                                      std::span<const StreamKey> keys,
                                                      UtcTime t0, UtcTime t1,
                                                      const std::filesystem::path& dir);
// All keys, full time range.
Result<std::vector<std::filesystem::path>> export_csv(const TimeSeriesStore& store,
                                                      const std::filesystem::path& dir);

// --- JSONL codec -------------------------------------------------------------

struct IngestReport {
  struct LineError {
    int line = 0;  // 1-based
    std::string message;
  };
  int appended = 0;
  std::vector<LineError> errors;

  bool clean() const { return errors.empty(); }
};

// One JSON object per line with a "series" discriminator. Per line
// all-or-nothing; malformed or invalid lines are collected, not fail-fast.
IngestReport import_jsonl(TimeSeriesStore& store, std::istream& in);
IngestReport import_jsonl_text(TimeSeriesStore& store, std::string_view text);

std::string record_to_jsonl_line(const Record& record);
// Whole store as JSONL in global arrival order; loading it back reproduces
// the store byte-for-byte on the next export.
std::string to_jsonl(const TimeSeriesStore& store);
Result<std::monostate> save_jsonl(const TimeSeriesStore& store, const std::filesystem::path& file);
Result<IngestReport> load_jsonl(TimeSeriesStore& store, const std::filesystem::path& file);

// Shortest round-trip decimal text, used by both codecs.
std::string format_double(double v);

}  // namespace jitai
