#pragma once
// Weather-station registry, nearest-station lookup, and the polling loop over
// a pluggable observation provider. Tests and simulations use the fixture
// provider; the HTTP client matches a generic "latest readings per station"
// JSON endpoint and never runs unless configured.

#include "jitai/domain.hpp"
#include "jitai/result.hpp"
#include "jitai/store.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace jitai {

struct Station {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const Station&) const = default;
};

// Great-circle distance in meters on the mean-Earth sphere (R = 6371.0088 km).
double haversine_m(double lat1, double lon1, double lat2, double lon2);

class StationRegistry {
 public:
  // fails on duplicate ids or an empty list
  static Result<StationRegistry> from_stations(std::vector<Station> stations);

  std::size_t size() const { return stations_.size(); }
  const std::vector<Station>& stations() const { return stations_; }
  const Station* find(std::string_view id) const;

  // Minimizes haversine distance; ties go to the lexicographically smallest
  // id. Deterministic and independent of construction order.
  const Station& nearest(double lat, double lon) const;

 private:
  std::vector<Station> stations_;  // sorted by id
};

class WeatherProvider {
 public:
  virtual ~WeatherProvider() = default;
  // Latest reading for the station at or before t. nullopt = nothing
  // available (unknown station, outage, or no data yet); the poll is then
  // skipped, never substituted.
  virtual std::optional<WeatherObservation> latest(std::string_view station_id, UtcTime t) = 0;
};

// CSV-backed provider: station_id,lat,lon,timestamp,air_temperature_c
class FixtureWeatherProvider : public WeatherProvider {
 public:
  static Result<FixtureWeatherProvider> from_csv_file(const std::filesystem::path& path);
  static Result<FixtureWeatherProvider> from_csv_text(std::string_view text);

  std::optional<WeatherObservation> latest(std::string_view station_id, UtcTime t) override;

  // Stations mentioned by the fixture, usable to build a registry.
  std::vector<Station> stations() const;

  // Simulated outage window [from, to); latest() returns nothing inside it.
  void set_outage(UtcTime from, UtcTime to);

 private:
  std::map<std::string, std::multimap<UtcTime, WeatherObservation>, std::less<>> by_station_;
  std::optional<std::pair<UtcTime, UtcTime>> outage_;
};

// GET `url` returning a JSON array of
//   {"station_id": "...", "location": {"latitude": .., "longitude": ..},
//    "value": .., "timestamp": "rfc3339"}
// The endpoint URL normally arrives via the WEATHER_API_URL env var.
class HttpWeatherProvider : public WeatherProvider {
 public:
  explicit HttpWeatherProvider(std::string url);

  std::optional<WeatherObservation> latest(std::string_view station_id, UtcTime t) override;

 private:
  void refresh(UtcTime t);

  std::string url_;
  UtcTime fetched_at_ = UtcTime::min();
  std::map<std::string, WeatherObservation, std::less<>> cache_;
};

// Drives provider polls on the configured cadence and appends observations to
// the store's weather streams. One provider call per distinct nearest
// station; exact duplicates of a stream head are not re-appended.
class WeatherPoller {
 public:
  WeatherPoller(std::shared_ptr<WeatherProvider> provider, const StationRegistry* registry,
                TimeSeriesStore* store,
                std::function<void(std::string)> log = {});

  struct ParticipantLocation {
    ParticipantId participant;
    GeoPoint location;
  };

  // One poll round; the caller owns the cadence.
  void poll(UtcTime t, std::span<const ParticipantLocation> locations);

  std::uint64_t attempts(const ParticipantId& participant) const;

 private:
  std::shared_ptr<WeatherProvider> provider_;
  const StationRegistry* registry_;
  TimeSeriesStore* store_;
  std::function<void(std::string)> log_;
  std::map<std::string, std::uint64_t> attempts_;
};

}  // namespace jitai
