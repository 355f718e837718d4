#pragma once
// UTC timestamps, RFC 3339 text, and fixed-offset civil-time conversion.
// Storage is always UTC at seconds resolution; window/weekday decisions are
// made in a configured zone.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace jitai {

using UtcTime = std::chrono::sys_seconds;
using std::chrono::minutes;
using std::chrono::seconds;

// Civil (wall-clock) fields of an instant in some zone.
struct LocalCivil {
  int year = 1970;
  unsigned month = 1;    // 1..12
  unsigned day = 1;      // 1..31
  int hour = 0;          // 0..23
  int minute = 0;
  int second = 0;
  int iso_weekday = 4;   // 1 = Monday .. 7 = Sunday
  std::int64_t local_day = 0;  // local calendar date as days since 1970-01-01

  bool is_weekend() const { return iso_weekday >= 6; }
  int minutes_of_day() const { return hour * 60 + minute; }
};

// Fixed-offset zone. The built-in table covers the zones this engine is
// deployed against; offsets like "UTC+05:30" parse too. Zones with DST are
// not representable and fail lookup.
class TimeZone {
 public:
  TimeZone() = default;

  static TimeZone utc() { return TimeZone{"UTC", minutes{0}}; }
  static TimeZone fixed(std::string name, minutes offset) {
    return TimeZone{std::move(name), offset};
  }
  // "Asia/Singapore", "UTC", "Etc/UTC", "UTC+08:00", "UTC-3", ...
  static std::optional<TimeZone> lookup(std::string_view name);

  const std::string& name() const { return name_; }
  minutes offset() const { return offset_; }

  LocalCivil to_local(UtcTime t) const;
  // Start of the given local calendar day, as a UTC instant.
  UtcTime local_day_start(std::int64_t local_day) const;

  bool operator==(const TimeZone& other) const = default;

 private:
  TimeZone(std::string name, minutes offset)
      : name_(std::move(name)), offset_(offset) {}

  std::string name_ = "UTC";
  minutes offset_{0};
};

// "2022-10-17T01:05:00Z"; always UTC with the Z designator.
std::string format_rfc3339(UtcTime t);
// Accepts Z or a numeric offset; anything else is a parse failure.
std::optional<UtcTime> parse_rfc3339(std::string_view text);

// Local calendar date helpers ("2022-10-17" <-> days since epoch).
std::optional<std::int64_t> parse_date(std::string_view text);
std::string format_date(std::int64_t day);
int iso_weekday_of_day(std::int64_t day);

}  // namespace jitai
