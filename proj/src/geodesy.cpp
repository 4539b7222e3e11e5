#include "coarsemap/geodesy.hpp"

#include <cmath>
#include <limits>

#include "coarsemap/errors.hpp"
#include "coarsemap/geometry.hpp"

namespace coarsemap {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;
constexpr double kMaxExtentDeg = 1.0;
constexpr double kMaxInverseRangeMeters = 200'000.0;
constexpr double kPolarLatitudeDeg = 89.999;

// Wrap a longitude difference into (-180, 180].
double wrap_delta_lon(double dlon) {
    dlon = std::fmod(dlon, 360.0);
    if (dlon <= -180.0) dlon += 360.0;
    if (dlon > 180.0) dlon -= 360.0;
    return dlon;
}

}  // namespace

PlanePoint to_plane(const LocalFrame& frame, const GeoPoint& p) {
    const double dlat = p.lat - frame.origin.lat;
    const double dlon = wrap_delta_lon(p.lon - frame.origin.lon);
    if (!(std::abs(dlat) < kMaxExtentDeg) || !(std::abs(dlon) < kMaxExtentDeg)) {
        throw OutOfExtent("point (" + std::to_string(p.lat) + ", " + std::to_string(p.lon) +
                          ") exceeds the 1 degree scenario extent around (" +
                          std::to_string(frame.origin.lat) + ", " +
                          std::to_string(frame.origin.lon) + ")");
    }
    const double cos_lat0 = std::cos(frame.origin.lat * kDegToRad);
    return {frame.earth_radius * dlon * kDegToRad * cos_lat0,
            frame.earth_radius * dlat * kDegToRad};
}

GeoPoint to_geo(const LocalFrame& frame, const PlanePoint& p) {
    if (std::abs(frame.origin.lat) >= kPolarLatitudeDeg) {
        throw DegenerateLatitude("frame origin latitude " + std::to_string(frame.origin.lat) +
                                 " is too close to a pole to recover longitude");
    }
    if (!(norm(p) <= kMaxInverseRangeMeters)) {
        throw OutOfExtent("plane point " + std::to_string(norm(p)) +
                          " m from origin exceeds the 200 km inverse range");
    }
    const double cos_lat0 = std::cos(frame.origin.lat * kDegToRad);
    const double lat = frame.origin.lat + (p.y / frame.earth_radius) * kRadToDeg;
    double lon = frame.origin.lon + (p.x / (frame.earth_radius * cos_lat0)) * kRadToDeg;
    lon = wrap_delta_lon(lon);
    return {lat, lon};
}

std::pair<GeoPoint, GeoPoint> track_bbox(const LocalFrame& frame,
                                         const std::vector<std::vector<PlanePoint>>& tracks,
                                         double pad) {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& track : tracks) {
        for (const auto& p : track) {
            min_x = std::min(min_x, p.x);
            min_y = std::min(min_y, p.y);
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
            any = true;
        }
    }
    if (!any) throw EmptyTracks("track_bbox needs at least one nonempty track");
    const GeoPoint sw = to_geo(frame, {min_x - pad, min_y - pad});
    const GeoPoint ne = to_geo(frame, {max_x + pad, max_y + pad});
    return {sw, ne};
}

}  // namespace coarsemap
