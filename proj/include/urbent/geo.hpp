#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace urbent {

/// Mean Earth radius in meters, used by every distance and projection routine.
inline constexpr double kEarthRadiusM = 6371000.0;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// WGS84 coordinate in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Local planar coordinate in meters (x east, y north of a reference).
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

inline bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

/// Axis-aligned lat/lon box. No antimeridian wrap.
struct BoundingBox {
  double min_lat = -90.0;
  double max_lat = 90.0;
  double min_lon = -180.0;
  double max_lon = 180.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline bool is_valid(const BoundingBox& b) {
  return is_valid(GeoPoint{b.min_lat, b.min_lon}) &&
         is_valid(GeoPoint{b.max_lat, b.max_lon}) && b.min_lat <= b.max_lat &&
         b.min_lon <= b.max_lon;
}

/// Boundary inclusive on all four sides.
inline bool bbox_contains(const BoundingBox& b, const GeoPoint& p) {
  return p.lat >= b.min_lat && p.lat <= b.max_lat && p.lon >= b.min_lon &&
         p.lon <= b.max_lon;
}

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
inline double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double sdphi = std::sin(0.5 * (phi2 - phi1));
  const double sdlam = std::sin(0.5 * (b.lon - a.lon) * kDegToRad);
  const double h = sdphi * sdphi + std::cos(phi1) * std::cos(phi2) * sdlam * sdlam;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::min(1.0, h)));
}

/// Maximum latitude offset from the projection origin accepted by project().
inline constexpr double kMaxProjectionLatSpanDeg = 2.0;

/// Equirectangular projection around `origin`:
/// x = R * dlon * cos(origin.lat), y = R * dlat (radians).
/// City scale only; throws std::domain_error when |p.lat - origin.lat| >= 2 deg.
inline PlanarPoint project(const GeoPoint& p, const GeoPoint& origin) {
  if (!(std::abs(p.lat - origin.lat) < kMaxProjectionLatSpanDeg)) {
    throw std::domain_error("project: latitude " + std::to_string(p.lat) +
                            " too far from origin " + std::to_string(origin.lat));
  }
  const double k = std::cos(origin.lat * kDegToRad);
  return {kEarthRadiusM * (p.lon - origin.lon) * kDegToRad * k,
          kEarthRadiusM * (p.lat - origin.lat) * kDegToRad};
}

/// Inverse of project() for the same origin.
inline GeoPoint unproject(const PlanarPoint& p, const GeoPoint& origin) {
  const double k = std::cos(origin.lat * kDegToRad);
  return {origin.lat + p.y / kEarthRadiusM * kRadToDeg,
          origin.lon + p.x / (kEarthRadiusM * k) * kRadToDeg};
}

inline double squared_distance(const PlanarPoint& a, const PlanarPoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const PlanarPoint& a, const PlanarPoint& b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace urbent
