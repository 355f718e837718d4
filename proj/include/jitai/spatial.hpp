#pragma once
// Hexagonal binning of geolocated sent notifications and GeoJSON export.
// Points project to local planar meters (equirectangular about a fixed
// origin), then map to pointy-top axial hex coordinates via cube rounding.

#include "jitai/domain.hpp"
#include "jitai/result.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace jitai {

struct HexIndex {
  std::int64_t q = 0;
  std::int64_t r = 0;

  auto operator<=>(const HexIndex&) const = default;
};

struct HexCell {
  HexIndex index;
  double edge_m = 0.0;
  std::uint64_t count = 0;

  bool operator==(const HexCell&) const = default;
};

// Planar meters relative to origin (x east, y north).
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

PlanarPoint project_local(GeoPoint point, GeoPoint origin);
GeoPoint unproject_local(PlanarPoint point, GeoPoint origin);

HexIndex to_hex(double lat, double lon, GeoPoint origin, double edge_m);
GeoPoint hex_center(HexIndex index, GeoPoint origin, double edge_m);
// Closed ring: 7 coordinates, first == last.
std::array<GeoPoint, 7> hex_polygon(HexIndex index, GeoPoint origin, double edge_m);

struct BinResult {
  std::vector<HexCell> cells;  // sorted by (q, r); counts > 0
  std::uint64_t geolocated_sent = 0;
  std::uint64_t sent_without_location = 0;
  GeoPoint origin;
  double edge_m = 0.0;
};

// Counts Sent records only; suppressed decisions never reach the map. The
// sum of cell counts equals geolocated_sent exactly.
BinResult bin(std::span<const NotificationRecord> log, GeoPoint origin, double edge_m);

// Deterministic default origin for a log: centroid of geolocated Sent
// records (0,0 when there are none).
GeoPoint centroid_origin(std::span<const NotificationRecord> log);

std::string to_geojson(const BinResult& result);
Result<std::monostate> export_geojson(const BinResult& result, const std::filesystem::path& file);
// Reads back a file produced by to_geojson (cells with q/r/edge_m/count).
Result<BinResult> import_geojson(std::string_view text);

// Ray-casting point-in-polygon on lat/lon vertices (closed or open ring).
bool point_in_polygon(GeoPoint point, std::span<const GeoPoint> polygon);

// Share of this mechanism's geolocated Sent records falling inside the
// polygon; 0 when the mechanism has no geolocated records.
double cluster_share(std::span<const NotificationRecord> log,
                     std::span<const GeoPoint> polygon, TriggerMechanism mechanism);

}  // namespace jitai
