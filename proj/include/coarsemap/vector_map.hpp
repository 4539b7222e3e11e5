#ifndef COARSEMAP_VECTOR_MAP_HPP
#define COARSEMAP_VECTOR_MAP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coarsemap/diagnostics.hpp"
#include "coarsemap/geodesy.hpp"
#include "coarsemap/osm.hpp"

namespace coarsemap {

struct MapNode {
    PlanePoint position;
    bool is_intersection = false;
    std::int64_t source_way = 0;
};

/// The unit consumed by receptive-field extraction: one interpolated
/// piece of a road, at most the interpolation spacing long.
struct MapSegment {
    PlanePoint start;
    PlanePoint end;
    bool is_intersection = false;  // true iff either endpoint node is flagged
    std::int64_t source_way = 0;

    PlanePoint midpoint() const { return {0.5 * (start.x + end.x), 0.5 * (start.y + end.y)}; }
};

/// Resample a polyline to uniform arc-length spacing. With L the total
/// arc length and n = ceil(L / spacing), returns n+1 points at arc
/// positions k*L/n; endpoints are preserved exactly and every returned
/// point lies on the input polyline. Throws DegeneratePolyline on zero
/// total length.
std::vector<PlanePoint> interpolate_way(const std::vector<PlanePoint>& polyline, double spacing);

/// Set is_intersection on every node whose distance to the closest
/// marker is <= radius (closed ball). Other fields are unchanged.
std::vector<MapNode> flag_intersections(std::vector<MapNode> nodes,
                                        const std::vector<PlanePoint>& markers,
                                        double radius = 10.0);

/// Uniform grid over segment midpoints. Cell size is a fixed 25 m,
/// independent of the query radius; queries are exact (identical to a
/// brute-force scan over midpoints).
class SegmentGrid {
public:
    static constexpr double kCellSize = 25.0;

    void build(const std::vector<MapSegment>& segments);

    /// Indices of segments whose midpoint lies within the closed ball,
    /// ascending.
    std::vector<std::uint32_t> query(const PlanePoint& center, double radius) const;

private:
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
    std::vector<PlanePoint> midpoints_;
};

/// A contiguous run of interpolated points from one source way, used for
/// walking road connectivity.
struct WayChain {
    std::int64_t way_id = 0;
    std::uint32_t first_segment = 0;  // index into VectorMap::segments()
    std::vector<PlanePoint> points;
};

/// Forecasting-ready map: projected, uniformly interpolated,
/// intersection-flagged segments with a spatial index. Immutable after
/// construction; all queries are safe to run concurrently.
class VectorMap {
public:
    VectorMap() = default;

    /// Assemble from prebuilt segments (import path and tests). Segments
    /// are stable-sorted by source way id; within a way the given order
    /// is kept.
    static VectorMap from_segments(std::vector<MapSegment> segments, GeoPoint origin,
                                   double spacing);

    const std::vector<MapSegment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }
    GeoPoint origin() const { return origin_; }
    double spacing() const { return spacing_; }

    /// Indices of segments whose midpoint is within the closed ball,
    /// ascending (= sorted by source way id, then position along way).
    std::vector<std::uint32_t> radius_indices(const PlanePoint& center, double radius) const {
        return grid_.query(center, radius);
    }

    /// Nearest segment by point-to-segment distance, or nullopt when none
    /// is within max_distance. Ties break to the lower segment index,
    /// i.e. lower way id, then earlier position along the way.
    std::optional<std::uint32_t> nearest_segment(const PlanePoint& p, double max_distance) const;

    /// Contiguous per-way point chains (consecutive segments sharing an
    /// endpoint bit-exactly), for connectivity walks.
    const std::vector<WayChain>& chains() const { return chains_; }

private:
    std::vector<MapSegment> segments_;
    GeoPoint origin_;
    double spacing_ = 1.5;
    SegmentGrid grid_;
    std::vector<WayChain> chains_;

    void finalize();
};

/// Project a road-filtered graph into the frame, interpolate every way
/// at `spacing`, flag interpolated nodes within `intersection_radius` of
/// a marker node, and index the resulting segments. Ways that fail to
/// project or degenerate are dropped with a warning.
VectorMap build_vector_map(const OsmGraph& graph, const LocalFrame& frame, double spacing = 1.5,
                           double intersection_radius = 10.0, WarningLog* log = nullptr);

/// All segments whose midpoint lies within the closed ball around
/// `center`, sorted by source way id then position along the way.
std::vector<MapSegment> extract_receptive_field(const VectorMap& map, const PlanePoint& center,
                                                double radius);

/// Map segments re-expressed in an agent-centric frame: translated to
/// the anchor and rotated so the anchor heading faces +x.
struct RelativeScene {
    struct Segment {
        PlanePoint start;
        PlanePoint end;
        bool is_intersection = false;
    };

    std::vector<Segment> segments;
    PlanePoint anchor_position;
    double anchor_heading = 0.0;

    /// Undo the anchor transform (recovers absolute coordinates).
    std::vector<Segment> to_absolute() const;
};

RelativeScene to_relative(const std::vector<MapSegment>& segments,
                          const PlanePoint& anchor_position, double anchor_heading);

/// Column-oriented text format, one segment per line:
///   start_x start_y end_x end_y is_intersection way_id
/// Coordinates carry exactly 9 fractional digits; the header line pins
/// the interpolation spacing and the frame origin.
std::string to_segment_text(const VectorMap& map);
VectorMap from_segment_text(std::string_view text);
void save_segment_file(const VectorMap& map, const std::string& path);
VectorMap load_segment_file(const std::string& path);

}  // namespace coarsemap

#endif
