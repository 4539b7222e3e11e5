#ifndef COARSEMAP_TESTS_SUPPORT_HPP
#define COARSEMAP_TESTS_SUPPORT_HPP

// Shared helpers for the test binaries: naive reference implementations
// (kept deliberately simple and independent of the library's internals),
// a temp-directory guard, and small file utilities.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coarsemap/geodesy.hpp"
#include "coarsemap/geometry.hpp"
#include "coarsemap/vector_map.hpp"

namespace testsupport {

using coarsemap::GeoPoint;
using coarsemap::MapSegment;
using coarsemap::PlanePoint;

// --- reference geometry ---------------------------------------------------

inline double dist(PlanePoint a, PlanePoint b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double polyline_length(const std::vector<PlanePoint>& pts) {
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) total += dist(pts[i - 1], pts[i]);
    return total;
}

/// Position at arc length `s` along the polyline, by plain segment walk.
inline PlanePoint point_at_arc(const std::vector<PlanePoint>& pts, double s) {
    if (s <= 0.0) return pts.front();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double len = dist(pts[i - 1], pts[i]);
        if (s <= len) {
            const double r = s / len;
            return {pts[i - 1].x + r * (pts[i].x - pts[i - 1].x),
                    pts[i - 1].y + r * (pts[i].y - pts[i - 1].y)};
        }
        s -= len;
    }
    return pts.back();
}

inline double point_segment_dist(PlanePoint p, PlanePoint a, PlanePoint b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    if (len2 == 0.0) return dist(p, a);
    double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    t = std::max(0.0, std::min(1.0, t));
    return dist(p, {a.x + t * vx, a.y + t * vy});
}

/// Distance from a point to the nearest point of a polyline.
inline double distance_to_polyline(const std::vector<PlanePoint>& pts, PlanePoint p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i)
        best = std::min(best, point_segment_dist(p, pts[i - 1], pts[i]));
    return best;
}

/// Great-circle distance on a sphere of the same radius the projection uses.
inline double haversine(GeoPoint a, GeoPoint b, double radius = 6378137.0) {
    const double deg = std::acos(-1.0) / 180.0;
    const double dlat = (b.lat - a.lat) * deg;
    const double dlon = (b.lon - a.lon) * deg;
    const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.lat * deg) * std::cos(b.lat * deg) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2.0 * radius * std::asin(std::sqrt(s));
}

// --- reference map queries ------------------------------------------------

inline PlanePoint midpoint(const MapSegment& s) {
    return {(s.start.x + s.end.x) / 2.0, (s.start.y + s.end.y) / 2.0};
}

/// Linear-scan radius query over segment midpoints (closed ball).
inline std::vector<std::uint32_t> scan_radius(const std::vector<MapSegment>& segments,
                                              PlanePoint center, double radius) {
    std::vector<std::uint32_t> hits;
    for (std::size_t i = 0; i < segments.size(); ++i)
        if (dist(midpoint(segments[i]), center) <= radius)
            hits.push_back(static_cast<std::uint32_t>(i));
    return hits;
}

/// All-pairs node flagging (closed ball).
inline std::vector<bool> scan_flags(const std::vector<PlanePoint>& nodes,
                                    const std::vector<PlanePoint>& markers, double radius) {
    std::vector<bool> flags(nodes.size(), false);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (const PlanePoint& m : markers)
            if (dist(nodes[i], m) <= radius) {
                flags[i] = true;
                break;
            }
    return flags;
}

// --- filesystem helpers ----------------------------------------------------

/// Self-deleting unique directory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "coarsemap-test") {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / (tag + "-" + std::to_string(rd()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

inline std::string data_file(const std::string& name) {
    return std::string(COARSEMAP_TEST_DATA_DIR) + "/" + name;
}

}  // namespace testsupport

#endif
