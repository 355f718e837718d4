#include "jitai/weather.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace jitai {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = M_PI / 180.0;

std::optional<double> parse_double(std::string_view s) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double dphi = (lat2 - lat1) * kDegToRad;
  const double dlambda = (lon2 - lon1) * kDegToRad;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

Result<StationRegistry> StationRegistry::from_stations(std::vector<Station> stations) {
  if (stations.empty()) {
    return Result<StationRegistry>::failure("registry requires at least one station");
  }
  std::sort(stations.begin(), stations.end(),
            [](const Station& a, const Station& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < stations.size(); ++i) {
    if (stations[i].id == stations[i - 1].id) {
      return Result<StationRegistry>::failure("duplicate station id '" + stations[i].id + "'");
    }
  }
  StationRegistry registry;
  registry.stations_ = std::move(stations);
  return Result<StationRegistry>::success(std::move(registry));
}

const Station* StationRegistry::find(std::string_view id) const {
  auto it = std::lower_bound(stations_.begin(), stations_.end(), id,
                             [](const Station& s, std::string_view v) { return s.id < v; });
  if (it == stations_.end() || it->id != id) return nullptr;
  return &*it;
}

const Station& StationRegistry::nearest(double lat, double lon) const {
  // stations_ is id-sorted, so the first strict improvement wins ties
  const Station* best = &stations_.front();
  double best_d = haversine_m(lat, lon, best->lat, best->lon);
  for (const Station& s : stations_) {
    const double d = haversine_m(lat, lon, s.lat, s.lon);
    if (d < best_d) {
      best = &s;
      best_d = d;
    }
  }
  return *best;
}

Result<FixtureWeatherProvider> FixtureWeatherProvider::from_csv_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return Result<FixtureWeatherProvider>::failure("cannot open fixture " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return from_csv_text(buf.str());
}

Result<FixtureWeatherProvider> FixtureWeatherProvider::from_csv_text(std::string_view text) {
  using Out = Result<FixtureWeatherProvider>;
  FixtureWeatherProvider provider;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("station_id,", 0) == 0) continue;  // header

    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        cols.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cols.size() != 5) {
      return Out::failure("fixture line " + std::to_string(line_no) + ": expected 5 columns");
    }
    auto lat = parse_double(cols[1]);
    auto lon = parse_double(cols[2]);
    auto t = parse_rfc3339(cols[3]);
    auto temp = parse_double(cols[4]);
    if (!lat || !lon || !t || !temp) {
      return Out::failure("fixture line " + std::to_string(line_no) + ": bad value");
    }
    WeatherObservation obs;
    obs.station_id = cols[0];
    obs.station_lat = *lat;
    obs.station_lon = *lon;
    obs.air_temperature_c = *temp;
    obs.observed_at = *t;
    provider.by_station_[cols[0]].emplace(*t, std::move(obs));
  }
  if (provider.by_station_.empty()) return Out::failure("fixture has no readings");
  return Out::success(std::move(provider));
}

std::optional<WeatherObservation> FixtureWeatherProvider::latest(std::string_view station_id,
                                                                 UtcTime t) {
  if (outage_ && t >= outage_->first && t < outage_->second) return std::nullopt;
  auto it = by_station_.find(station_id);
  if (it == by_station_.end()) return std::nullopt;
  auto pos = it->second.upper_bound(t);
  if (pos == it->second.begin()) return std::nullopt;
  --pos;
  return pos->second;
}

std::vector<Station> FixtureWeatherProvider::stations() const {
  std::vector<Station> out;
  for (const auto& [id, readings] : by_station_) {
    const WeatherObservation& first = readings.begin()->second;
    out.push_back(Station{id, first.station_lat, first.station_lon});
  }
  return out;
}

void FixtureWeatherProvider::set_outage(UtcTime from, UtcTime to) {
  outage_ = std::make_pair(from, to);
}

HttpWeatherProvider::HttpWeatherProvider(std::string url) : url_(std::move(url)) {}

void HttpWeatherProvider::refresh(UtcTime t) {
  if (fetched_at_ == t) return;
  fetched_at_ = t;
  cache_.clear();

  auto split = url_.find('/', url_.find("//") + 2);
  const std::string base = split == std::string::npos ? url_ : url_.substr(0, split);
  const std::string path = split == std::string::npos ? "/" : url_.substr(split);
  httplib::Client client(base);
  client.set_connection_timeout(5);
  auto res = client.Get(path);
  if (!res || res->status != 200) return;

  auto body = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (!body.is_array()) return;
  for (const auto& item : body) {
    if (!item.is_object()) continue;
    auto id = item.value("station_id", std::string{});
    auto ts = parse_rfc3339(item.value("timestamp", std::string{}));
    if (id.empty() || !ts || !item.contains("value") || !item["value"].is_number()) continue;
    WeatherObservation obs;
    obs.station_id = id;
    if (item.contains("location") && item["location"].is_object()) {
      obs.station_lat = item["location"].value("latitude", 0.0);
      obs.station_lon = item["location"].value("longitude", 0.0);
    }
    obs.air_temperature_c = item["value"].get<double>();
    obs.observed_at = *ts;
    cache_[id] = std::move(obs);
  }
}

std::optional<WeatherObservation> HttpWeatherProvider::latest(std::string_view station_id,
                                                              UtcTime t) {
  refresh(t);
  auto it = cache_.find(station_id);
  if (it == cache_.end()) return std::nullopt;
  if (it->second.observed_at > t) return std::nullopt;
  return it->second;
}

WeatherPoller::WeatherPoller(std::shared_ptr<WeatherProvider> provider,
                             const StationRegistry* registry, TimeSeriesStore* store,
                             std::function<void(std::string)> log)
    : provider_(std::move(provider)), registry_(registry), store_(store), log_(std::move(log)) {}

void WeatherPoller::poll(UtcTime t, std::span<const ParticipantLocation> locations) {
  std::set<std::string> stations;
  for (const ParticipantLocation& pl : locations) {
    if (registry_->size() == 0) break;
    stations.insert(registry_->nearest(pl.location.lat, pl.location.lon).id);
    ++attempts_[pl.participant.value];
  }

  for (const std::string& station : stations) {
    auto obs = provider_->latest(station, t);
    if (!obs) {
      if (log_) log_("weather poll skipped at " + format_rfc3339(t) + " station " + station);
      continue;
    }
    auto key = StreamKey::weather(station);
    // skip exact duplicates of the stream head (constant fixtures)
    if (auto last = store_->latest_at_or_before(key, t)) {
      const auto& prev = std::get<WeatherObservation>(*last);
      if (prev == *obs) continue;
    }
    auto ack = store_->append(key, Record{*obs});
    if (!ack.ok() && log_) log_("weather append failed: " + ack.error);
  }
}

std::uint64_t WeatherPoller::attempts(const ParticipantId& participant) const {
  auto it = attempts_.find(participant.value);
  return it == attempts_.end() ? 0 : it->second;
}

}  // namespace jitai
