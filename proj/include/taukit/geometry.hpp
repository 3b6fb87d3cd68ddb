#pragma once

// Distance between study locations. Planar coordinates are metric already;
// geographic mode treats (x, y) as (longitude, latitude) in degrees and uses
// great-circle distance on the mean Earth radius, in meters.

#include <cmath>

namespace taukit {

enum class crs_mode { planar, geographic };

inline constexpr double earth_radius_m = 6371008.8;

inline double haversine_m(double lon1, double lat1, double lon2, double lat2) {
    constexpr double deg = 3.14159265358979323846 / 180.0;
    const double phi1 = lat1 * deg, phi2 = lat2 * deg;
    const double dphi = (lat2 - lat1) * deg;
    const double dlam = (lon2 - lon1) * deg;
    const double s1 = std::sin(dphi / 2), s2 = std::sin(dlam / 2);
    const double a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * earth_radius_m * std::asin(std::sqrt(a < 0 ? 0 : (a > 1 ? 1 : a)));
}

inline double distance(double x1, double y1, double x2, double y2, crs_mode mode) {
    if (mode == crs_mode::geographic) return haversine_m(x1, y1, x2, y2);
    const double dx = x2 - x1, dy = y2 - y1;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace taukit
