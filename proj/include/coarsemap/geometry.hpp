#ifndef COARSEMAP_GEOMETRY_HPP
#define COARSEMAP_GEOMETRY_HPP

#include <algorithm>
#include <cmath>

#include "coarsemap/geodesy.hpp"

namespace coarsemap {

inline PlanePoint operator+(const PlanePoint& a, const PlanePoint& b) {
    return {a.x + b.x, a.y + b.y};
}
inline PlanePoint operator-(const PlanePoint& a, const PlanePoint& b) {
    return {a.x - b.x, a.y - b.y};
}
inline PlanePoint operator*(double s, const PlanePoint& p) { return {s * p.x, s * p.y}; }

inline double dot(const PlanePoint& a, const PlanePoint& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const PlanePoint& p) { return std::hypot(p.x, p.y); }
inline double squared_norm(const PlanePoint& p) { return p.x * p.x + p.y * p.y; }
inline double distance(const PlanePoint& a, const PlanePoint& b) { return norm(b - a); }
inline double squared_distance(const PlanePoint& a, const PlanePoint& b) {
    return squared_norm(b - a);
}

/// Rotate by `angle` radians, counter-clockwise.
inline PlanePoint rotate(const PlanePoint& p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

/// Distance from `p` to the segment [a, b].
inline double point_segment_distance(const PlanePoint& p, const PlanePoint& a,
                                     const PlanePoint& b) {
    const PlanePoint ab = b - a;
    const double len2 = squared_norm(ab);
    if (len2 == 0.0) return distance(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

}  // namespace coarsemap

#endif
