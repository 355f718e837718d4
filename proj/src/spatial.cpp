#include "jitai/spatial.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace jitai {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kSqrt3 = 1.7320508075688772;

}  // namespace

PlanarPoint project_local(GeoPoint point, GeoPoint origin) {
  const double x =
      (point.lon - origin.lon) * kDegToRad * kEarthRadiusM * std::cos(origin.lat * kDegToRad);
  const double y = (point.lat - origin.lat) * kDegToRad * kEarthRadiusM;
  return {x, y};
}

GeoPoint unproject_local(PlanarPoint point, GeoPoint origin) {
  GeoPoint out;
  out.lat = origin.lat + (point.y / kEarthRadiusM) / kDegToRad;
  out.lon =
      origin.lon + (point.x / (kEarthRadiusM * std::cos(origin.lat * kDegToRad))) / kDegToRad;
  return out;
}

HexIndex to_hex(double lat, double lon, GeoPoint origin, double edge_m) {
  const PlanarPoint p = project_local({lat, lon}, origin);
  // pointy-top pixel -> fractional axial
  const double qf = (kSqrt3 / 3.0 * p.x - 1.0 / 3.0 * p.y) / edge_m;
  const double rf = (2.0 / 3.0 * p.y) / edge_m;

  // cube rounding
  const double xf = qf, zf = rf, yf = -xf - zf;
  double rx = std::round(xf), ry = std::round(yf), rz = std::round(zf);
  const double dx = std::abs(rx - xf), dy = std::abs(ry - yf), dz = std::abs(rz - zf);
  if (dx > dy && dx > dz) {
    rx = -ry - rz;
  } else if (dy > dz) {
    ry = -rx - rz;
  } else {
    rz = -rx - ry;
  }
  return HexIndex{std::int64_t(rx), std::int64_t(rz)};
}

GeoPoint hex_center(HexIndex index, GeoPoint origin, double edge_m) {
  const double x = edge_m * kSqrt3 * (double(index.q) + double(index.r) / 2.0);
  const double y = edge_m * 1.5 * double(index.r);
  return unproject_local({x, y}, origin);
}

std::array<GeoPoint, 7> hex_polygon(HexIndex index, GeoPoint origin, double edge_m) {
  const double cx = edge_m * kSqrt3 * (double(index.q) + double(index.r) / 2.0);
  const double cy = edge_m * 1.5 * double(index.r);
  std::array<GeoPoint, 7> ring;
  for (int i = 0; i < 6; ++i) {
    const double angle = (60.0 * i - 30.0) * kDegToRad;
    ring[std::size_t(i)] =
        unproject_local({cx + edge_m * std::cos(angle), cy + edge_m * std::sin(angle)}, origin);
  }
  ring[6] = ring[0];
  return ring;
}

BinResult bin(std::span<const NotificationRecord> log, GeoPoint origin, double edge_m) {
  BinResult result;
  result.origin = origin;
  result.edge_m = edge_m;
  std::map<HexIndex, std::uint64_t> counts;
  for (const NotificationRecord& record : log) {
    if (!record.is_sent()) continue;
    if (!record.event.location) {
      ++result.sent_without_location;
      continue;
    }
    ++result.geolocated_sent;
    ++counts[to_hex(record.event.location->lat, record.event.location->lon, origin, edge_m)];
  }
  result.cells.reserve(counts.size());
  for (const auto& [index, count] : counts) {
    result.cells.push_back(HexCell{index, edge_m, count});
  }
  return result;
}

GeoPoint centroid_origin(std::span<const NotificationRecord> log) {
  double lat = 0.0, lon = 0.0;
  std::uint64_t n = 0;
  for (const NotificationRecord& record : log) {
    if (!record.is_sent() || !record.event.location) continue;
    lat += record.event.location->lat;
    lon += record.event.location->lon;
    ++n;
  }
  if (n == 0) return {0.0, 0.0};
  return {lat / double(n), lon / double(n)};
}

std::string to_geojson(const BinResult& result) {
  using nlohmann::json;
  json features = json::array();
  for (const HexCell& cell : result.cells) {
    const auto ring = hex_polygon(cell.index, result.origin, result.edge_m);
    json coordinates = json::array();
    json outer = json::array();
    for (const GeoPoint& p : ring) outer.push_back(json::array({p.lon, p.lat}));
    coordinates.push_back(outer);

    json feature;
    feature["type"] = "Feature";
    feature["geometry"] = json{{"type", "Polygon"}, {"coordinates", coordinates}};
    feature["properties"] = json{{"count", cell.count},
                                 {"q", cell.index.q},
                                 {"r", cell.index.r},
                                 {"edge_m", cell.edge_m}};
    features.push_back(feature);
  }
  json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = features;
  doc["properties"] = json{{"origin_lat", result.origin.lat},
                           {"origin_lon", result.origin.lon},
                           {"edge_m", result.edge_m},
                           {"geolocated_sent", result.geolocated_sent},
                           {"sent_without_location", result.sent_without_location}};
  return doc.dump(2) + "\n";
}

Result<std::monostate> export_geojson(const BinResult& result,
                                      const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) return Result<std::monostate>::failure("cannot open " + file.string());
  out << to_geojson(result);
  if (!out.good()) return Result<std::monostate>::failure("write failed: " + file.string());
  return Result<std::monostate>::success({});
}

Result<BinResult> import_geojson(std::string_view text) {
  using nlohmann::json;
  auto fail = [](std::string m) { return Result<BinResult>::failure(std::move(m)); };
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    return fail("not a FeatureCollection");
  }
  BinResult result;
  if (doc.contains("properties") && doc["properties"].is_object()) {
    const auto& props = doc["properties"];
    result.origin = {props.value("origin_lat", 0.0), props.value("origin_lon", 0.0)};
    result.edge_m = props.value("edge_m", 0.0);
    result.geolocated_sent = props.value("geolocated_sent", std::uint64_t{0});
    result.sent_without_location = props.value("sent_without_location", std::uint64_t{0});
  }
  if (!doc.contains("features") || !doc["features"].is_array()) return fail("missing features");
  for (const auto& feature : doc["features"]) {
    if (!feature.is_object() || !feature.contains("properties")) {
      return fail("malformed feature");
    }
    const auto& props = feature["properties"];
    HexCell cell;
    cell.index.q = props.value("q", std::int64_t{0});
    cell.index.r = props.value("r", std::int64_t{0});
    cell.edge_m = props.value("edge_m", 0.0);
    cell.count = props.value("count", std::uint64_t{0});
    result.cells.push_back(cell);
  }
  std::sort(result.cells.begin(), result.cells.end(),
            [](const HexCell& a, const HexCell& b) { return a.index < b.index; });
  return Result<BinResult>::success(std::move(result));
}

bool point_in_polygon(GeoPoint point, std::span<const GeoPoint> polygon) {
  std::size_t n = polygon.size();
  if (n >= 2 && polygon.front() == polygon.back()) --n;  // ignore closing vertex
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = polygon[i];
    const GeoPoint& b = polygon[j];
    const bool crosses = (a.lat > point.lat) != (b.lat > point.lat);
    if (!crosses) continue;
    const double x_at =
        (b.lon - a.lon) * (point.lat - a.lat) / (b.lat - a.lat) + a.lon;
    if (point.lon < x_at) inside = !inside;
  }
  return inside;
}

double cluster_share(std::span<const NotificationRecord> log,
                     std::span<const GeoPoint> polygon, TriggerMechanism mechanism) {
  std::uint64_t total = 0, inside = 0;
  for (const NotificationRecord& record : log) {
    if (!record.is_sent() || record.event.mechanism != mechanism || !record.event.location) {
      continue;
    }
    ++total;
    if (point_in_polygon(*record.event.location, polygon)) ++inside;
  }
  return total == 0 ? 0.0 : double(inside) / double(total);
}

}  // namespace jitai
