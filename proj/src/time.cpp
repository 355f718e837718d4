#include "jitai/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace jitai {
namespace {

using days = std::chrono::days;

struct ZoneEntry {
  std::string_view name;
  int offset_minutes;
};

// Fixed-offset zones only. The deployment zone (Asia/Singapore) has had a
// constant +08:00 offset since 1982.
constexpr std::array<ZoneEntry, 8> kZones{{
    {"UTC", 0},
    {"Etc/UTC", 0},
    {"Asia/Singapore", 8 * 60},
    {"Singapore", 8 * 60},
    {"Asia/Kuala_Lumpur", 8 * 60},
    {"Asia/Tokyo", 9 * 60},
    {"Asia/Kolkata", 5 * 60 + 30},
    {"Etc/Greenwich", 0},
}};

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// "UTC+08:00", "UTC+8", "UTC-03:30"
std::optional<minutes> parse_utc_offset_name(std::string_view name) {
  if (name.size() < 5 || name.substr(0, 3) != "UTC") return std::nullopt;
  char sign_ch = name[3];
  if (sign_ch != '+' && sign_ch != '-') return std::nullopt;
  int sign = sign_ch == '-' ? -1 : 1;
  std::string_view rest = name.substr(4);
  int hours = 0, mins = 0;
  auto colon = rest.find(':');
  if (colon == std::string_view::npos) {
    if (!parse_int(rest, hours)) return std::nullopt;
  } else {
    if (!parse_int(rest.substr(0, colon), hours)) return std::nullopt;
    if (!parse_int(rest.substr(colon + 1), mins)) return std::nullopt;
  }
  if (hours < 0 || hours > 18 || mins < 0 || mins > 59) return std::nullopt;
  return minutes{sign * (hours * 60 + mins)};
}

}  // namespace

std::optional<TimeZone> TimeZone::lookup(std::string_view name) {
  for (const auto& z : kZones) {
    if (z.name == name) return TimeZone::fixed(std::string(name), minutes{z.offset_minutes});
  }
  if (name.size() == 3 && name == "UTC") return TimeZone::utc();
  if (auto off = parse_utc_offset_name(name)) {
    return TimeZone::fixed(std::string(name), *off);
  }
  return std::nullopt;
}

LocalCivil TimeZone::to_local(UtcTime t) const {
  using namespace std::chrono;
  const seconds shifted = t.time_since_epoch() + offset_;
  const days d = floor<days>(shifted);
  const seconds rem = shifted - d;

  year_month_day ymd{sys_days{d}};
  weekday wd{sys_days{d}};
  LocalCivil out;
  out.year = int(ymd.year());
  out.month = unsigned(ymd.month());
  out.day = unsigned(ymd.day());
  out.hour = int(rem.count() / 3600);
  out.minute = int((rem.count() % 3600) / 60);
  out.second = int(rem.count() % 60);
  out.iso_weekday = int(wd.iso_encoding());
  out.local_day = d.count();
  return out;
}

UtcTime TimeZone::local_day_start(std::int64_t local_day) const {
  using namespace std::chrono;
  return UtcTime{seconds{local_day * 86400} - offset_};
}

std::string format_rfc3339(UtcTime t) {
  using namespace std::chrono;
  const days d = floor<days>(t.time_since_epoch());
  const seconds rem = t.time_since_epoch() - d;
  year_month_day ymd{sys_days{d}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                int(rem.count() / 3600), int((rem.count() % 3600) / 60),
                int(rem.count() % 60));
  return buf;
}

std::optional<UtcTime> parse_rfc3339(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS(Z|±HH:MM)
  if (text.size() < 20) return std::nullopt;
  auto digit = [&](size_t i) { return text[i] >= '0' && text[i] <= '9'; };
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u}) {
    if (!digit(i)) return std::nullopt;
  }
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  auto num = [&](size_t pos, size_t len) {
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) v = v * 10 + (text[i] - '0');
    return v;
  };
  int y = num(0, 4), mo = num(5, 2), da = num(8, 2);
  int h = num(11, 2), mi = num(14, 2), se = num(17, 2);
  if (mo < 1 || mo > 12 || da < 1 || da > 31 || h > 23 || mi > 59 || se > 60) {
    return std::nullopt;
  }

  std::string_view tail = text.substr(19);
  int offset_min = 0;
  if (tail == "Z" || tail == "z") {
    offset_min = 0;
  } else if (tail.size() == 6 && (tail[0] == '+' || tail[0] == '-') && tail[3] == ':') {
    int oh = 0, om = 0;
    if (!parse_int(tail.substr(1, 2), oh) || !parse_int(tail.substr(4, 2), om)) {
      return std::nullopt;
    }
    offset_min = (tail[0] == '-' ? -1 : 1) * (oh * 60 + om);
  } else {
    return std::nullopt;
  }

  using namespace std::chrono;
  year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(da)}};
  if (!ymd.ok()) return std::nullopt;
  seconds total = sys_days{ymd}.time_since_epoch() + hours{h} + minutes{mi} + seconds{se};
  total -= minutes{offset_min};
  return UtcTime{total};
}

std::optional<std::int64_t> parse_date(std::string_view text) {
  auto t = parse_rfc3339(std::string(text) + "T00:00:00Z");
  if (!t) return std::nullopt;
  return t->time_since_epoch().count() / 86400;
}

std::string format_date(std::int64_t day) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int iso_weekday_of_day(std::int64_t day) {
  using namespace std::chrono;
  return int(weekday{sys_days{days{day}}}.iso_encoding());
}

}  // namespace jitai
