#ifndef COARSEMAP_GEODESY_HPP
#define COARSEMAP_GEODESY_HPP

#include <utility>
#include <vector>

namespace coarsemap {

/// WGS84 geographic coordinate, degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const GeoPoint&) const = default;
};

/// Point in a local metric frame: meters east (x) / north (y) of the origin.
struct PlanePoint {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const PlanePoint&) const = default;
};

/// Local tangent frame anchored at a scenario origin. Uses a spherical
/// earth with the WGS84 semi-major axis; at scenario scale (a few km)
/// the distortion of the azimuthal equirectangular mapping is far below
/// the 1.5 m map granularity.
struct LocalFrame {
    GeoPoint origin;
    double earth_radius = kEarthRadiusMeters;

    static constexpr double kEarthRadiusMeters = 6378137.0;
};

/// Geographic -> plane. x = R*dlon*cos(lat0), y = R*dlat, with dlon
/// wrapped to (-180, 180]. Throws OutOfExtent when |dlat| or |dlon|
/// reaches 1 degree; the frame is for scenario-scale extents only.
PlanePoint to_plane(const LocalFrame& frame, const GeoPoint& p);

/// Plane -> geographic, the exact algebraic inverse of to_plane.
/// Throws DegenerateLatitude when |origin.lat| >= 89.999 (longitude is
/// unrecoverable as cos(lat0) -> 0) and OutOfExtent beyond 200 km.
GeoPoint to_geo(const LocalFrame& frame, const PlanePoint& p);

/// South-west / north-east geographic corners of the axis-aligned box
/// covering every point of every track, padded by `pad` meters on all
/// sides. Throws EmptyTracks when no point is given.
std::pair<GeoPoint, GeoPoint> track_bbox(const LocalFrame& frame,
                                         const std::vector<std::vector<PlanePoint>>& tracks,
                                         double pad);

}  // namespace coarsemap

#endif
