#pragma once

#include <cmath>

namespace tgad {

// Earth radius used by the haversine metric (clustering) and, in nautical
// miles, by the flat-earth position step (synth). 6371 km == 3440.065 NM.
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthRadiusNm = 3440.065;

inline double deg2rad(double deg) { return deg * M_PI / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / M_PI; }

// Great-circle distance in kilometers.
inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    const double phi1 = deg2rad(lat1);
    const double phi2 = deg2rad(lat2);
    const double dphi = deg2rad(lat2 - lat1);
    const double dlam = deg2rad(lon2 - lon1);
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

// Wrap an angle in degrees into [0, 360).
inline double wrap360(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0) r += 360.0;
    return r;
}

// Signed shortest angular difference b - a, in (-180, 180].
inline double angle_diff_deg(double a, double b) {
    double d = std::fmod(b - a + 540.0, 360.0) - 180.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

} // namespace tgad
