#include "coarsemap/vector_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coarsemap/errors.hpp"
#include "coarsemap/geometry.hpp"

namespace coarsemap {

namespace {

std::uint64_t cell_key(std::int32_t cx, std::int32_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
}

std::int32_t cell_of(double v, double cell) {
    return static_cast<std::int32_t>(std::floor(v / cell));
}

void append_fixed9(std::string& out, double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    out += buf;
}

}  // namespace

std::vector<PlanePoint> interpolate_way(const std::vector<PlanePoint>& polyline, double spacing) {
    if (polyline.size() < 2) {
        throw DegeneratePolyline("polyline needs at least 2 points");
    }
    if (!(spacing > 0.0)) {
        throw DegeneratePolyline("interpolation spacing must be positive");
    }

    std::vector<double> cumulative(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        cumulative[i] = cumulative[i - 1] + distance(polyline[i - 1], polyline[i]);
    }
    const double total = cumulative.back();
    if (!(total > 0.0)) {
        throw DegeneratePolyline("polyline has zero total length");
    }

    const auto n = static_cast<std::size_t>(std::ceil(total / spacing));
    std::vector<PlanePoint> points;
    points.reserve(n + 1);
    points.push_back(polyline.front());

    std::size_t seg = 0;
    for (std::size_t k = 1; k < n; ++k) {
        const double s = total * static_cast<double>(k) / static_cast<double>(n);
        while (seg + 2 < polyline.size() && cumulative[seg + 1] < s) ++seg;
        const double seg_len = cumulative[seg + 1] - cumulative[seg];
        const double t = seg_len > 0.0 ? (s - cumulative[seg]) / seg_len : 0.0;
        points.push_back(polyline[seg] + t * (polyline[seg + 1] - polyline[seg]));
    }
    points.push_back(polyline.back());
    return points;
}

std::vector<MapNode> flag_intersections(std::vector<MapNode> nodes,
                                        const std::vector<PlanePoint>& markers, double radius) {
    if (markers.empty()) return nodes;

    // Bucket markers on a grid with cell == radius so each node only
    // inspects its 3x3 neighborhood.
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    for (std::uint32_t i = 0; i < markers.size(); ++i) {
        buckets[cell_key(cell_of(markers[i].x, radius), cell_of(markers[i].y, radius))]
            .push_back(i);
    }

    const double r2 = radius * radius;
    for (MapNode& node : nodes) {
        const std::int32_t cx = cell_of(node.position.x, radius);
        const std::int32_t cy = cell_of(node.position.y, radius);
        bool hit = false;
        for (std::int32_t dx = -1; dx <= 1 && !hit; ++dx) {
            for (std::int32_t dy = -1; dy <= 1 && !hit; ++dy) {
                auto it = buckets.find(cell_key(cx + dx, cy + dy));
                if (it == buckets.end()) continue;
                for (std::uint32_t mi : it->second) {
                    if (squared_distance(node.position, markers[mi]) <= r2) {
                        hit = true;
                        break;
                    }
                }
            }
        }
        if (hit) node.is_intersection = true;
    }
    return nodes;
}

void SegmentGrid::build(const std::vector<MapSegment>& segments) {
    cells_.clear();
    midpoints_.clear();
    midpoints_.reserve(segments.size());
    for (std::uint32_t i = 0; i < segments.size(); ++i) {
        const PlanePoint mid = segments[i].midpoint();
        midpoints_.push_back(mid);
        cells_[cell_key(cell_of(mid.x, kCellSize), cell_of(mid.y, kCellSize))].push_back(i);
    }
}

std::vector<std::uint32_t> SegmentGrid::query(const PlanePoint& center, double radius) const {
    std::vector<std::uint32_t> result;
    if (midpoints_.empty()) return result;
    const double r2 = radius * radius;
    const std::int32_t cx0 = cell_of(center.x - radius, kCellSize);
    const std::int32_t cx1 = cell_of(center.x + radius, kCellSize);
    const std::int32_t cy0 = cell_of(center.y - radius, kCellSize);
    const std::int32_t cy1 = cell_of(center.y + radius, kCellSize);
    for (std::int32_t cx = cx0; cx <= cx1; ++cx) {
        for (std::int32_t cy = cy0; cy <= cy1; ++cy) {
            auto it = cells_.find(cell_key(cx, cy));
            if (it == cells_.end()) continue;
            for (std::uint32_t idx : it->second) {
                if (squared_distance(midpoints_[idx], center) <= r2) result.push_back(idx);
            }
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

VectorMap VectorMap::from_segments(std::vector<MapSegment> segments, GeoPoint origin,
                                   double spacing) {
    VectorMap map;
    std::stable_sort(segments.begin(), segments.end(),
                     [](const MapSegment& a, const MapSegment& b) {
                         return a.source_way < b.source_way;
                     });
    map.segments_ = std::move(segments);
    map.origin_ = origin;
    map.spacing_ = spacing;
    map.finalize();
    return map;
}

void VectorMap::finalize() {
    grid_.build(segments_);
    chains_.clear();
    for (std::uint32_t i = 0; i < segments_.size(); ++i) {
        const MapSegment& seg = segments_[i];
        const bool continues = !chains_.empty() && chains_.back().way_id == seg.source_way &&
                               chains_.back().points.back() == seg.start &&
                               chains_.back().first_segment + chains_.back().points.size() - 1 == i;
        if (continues) {
            chains_.back().points.push_back(seg.end);
        } else {
            chains_.push_back({seg.source_way, i, {seg.start, seg.end}});
        }
    }
}

std::optional<std::uint32_t> VectorMap::nearest_segment(const PlanePoint& p,
                                                        double max_distance) const {
    if (segments_.empty()) return std::nullopt;
    // Midpoint query radius padded by the spacing: a segment is at most
    // spacing long, so its midpoint is within max_distance + spacing/2 of
    // any point within max_distance of the segment.
    const auto candidates = grid_.query(p, max_distance + spacing_);
    std::optional<std::uint32_t> best;
    double best_dist = 0.0;
    for (std::uint32_t idx : candidates) {  // ascending, so ties keep the lower index
        const MapSegment& seg = segments_[idx];
        const double d = point_segment_distance(p, seg.start, seg.end);
        if (d > max_distance) continue;
        if (!best || d < best_dist) {
            best = idx;
            best_dist = d;
        }
    }
    return best;
}

VectorMap build_vector_map(const OsmGraph& graph, const LocalFrame& frame, double spacing,
                           double intersection_radius, WarningLog* log) {
    std::vector<PlanePoint> markers;
    for (const auto& [id, node] : graph.nodes) {
        if (!node.has_marker()) continue;
        try {
            markers.push_back(to_plane(frame, {node.lat, node.lon}));
        } catch (const OutOfExtent&) {
            if (log != nullptr) log->add("node", id, "marker outside frame extent, ignored");
        }
    }

    std::vector<MapSegment> segments;
    for (const auto& [way_id, way] : graph.ways) {
        std::vector<PlanePoint> polyline;
        polyline.reserve(way.node_refs.size());
        bool projected = true;
        for (std::int64_t ref : way.node_refs) {
            auto it = graph.nodes.find(ref);
            if (it == graph.nodes.end()) {
                projected = false;
                if (log != nullptr) log->add("way", way_id, "unresolved node ref, way dropped");
                break;
            }
            try {
                PlanePoint p = to_plane(frame, {it->second.lat, it->second.lon});
                if (polyline.empty() || !(polyline.back() == p)) polyline.push_back(p);
            } catch (const OutOfExtent& e) {
                projected = false;
                if (log != nullptr) log->add("way", way_id, std::string(e.what()) + ", way dropped");
                break;
            }
        }
        if (!projected) continue;

        std::vector<PlanePoint> points;
        try {
            points = interpolate_way(polyline, spacing);
        } catch (const DegeneratePolyline& e) {
            if (log != nullptr) log->add("way", way_id, std::string(e.what()) + ", way dropped");
            continue;
        }

        std::vector<MapNode> nodes;
        nodes.reserve(points.size());
        for (const PlanePoint& p : points) nodes.push_back({p, false, way_id});
        nodes = flag_intersections(std::move(nodes), markers, intersection_radius);

        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            segments.push_back({nodes[i].position, nodes[i + 1].position,
                                nodes[i].is_intersection || nodes[i + 1].is_intersection,
                                way_id});
        }
    }

    return VectorMap::from_segments(std::move(segments), frame.origin, spacing);
}

std::vector<MapSegment> extract_receptive_field(const VectorMap& map, const PlanePoint& center,
                                                double radius) {
    std::vector<MapSegment> result;
    for (std::uint32_t idx : map.radius_indices(center, radius)) {
        result.push_back(map.segments()[idx]);
    }
    return result;
}

RelativeScene to_relative(const std::vector<MapSegment>& segments,
                          const PlanePoint& anchor_position, double anchor_heading) {
    RelativeScene scene;
    scene.anchor_position = anchor_position;
    scene.anchor_heading = anchor_heading;
    scene.segments.reserve(segments.size());
    for (const MapSegment& seg : segments) {
        scene.segments.push_back({rotate(seg.start - anchor_position, -anchor_heading),
                                  rotate(seg.end - anchor_position, -anchor_heading),
                                  seg.is_intersection});
    }
    return scene;
}

std::vector<RelativeScene::Segment> RelativeScene::to_absolute() const {
    std::vector<Segment> result;
    result.reserve(segments.size());
    for (const Segment& seg : segments) {
        result.push_back({anchor_position + rotate(seg.start, anchor_heading),
                          anchor_position + rotate(seg.end, anchor_heading),
                          seg.is_intersection});
    }
    return result;
}

std::string to_segment_text(const VectorMap& map) {
    std::string out = "coarsemap-segments v1 spacing=";
    append_fixed9(out, map.spacing());
    out += " origin_lat=";
    append_fixed9(out, map.origin().lat);
    out += " origin_lon=";
    append_fixed9(out, map.origin().lon);
    out += "\n";
    for (const MapSegment& seg : map.segments()) {
        append_fixed9(out, seg.start.x);
        out += ' ';
        append_fixed9(out, seg.start.y);
        out += ' ';
        append_fixed9(out, seg.end.x);
        out += ' ';
        append_fixed9(out, seg.end.y);
        out += ' ';
        out += seg.is_intersection ? '1' : '0';
        out += ' ';
        out += std::to_string(seg.source_way);
        out += '\n';
    }
    return out;
}

namespace {

double parse_header_value(std::string_view line, std::string_view key, std::size_t line_no) {
    const auto pos = line.find(key);
    if (pos == std::string_view::npos) {
        throw Error("segment text line " + std::to_string(line_no) + ": missing " +
                    std::string(key));
    }
    const char* begin = line.data() + pos + key.size();
    const char* end = line.data() + line.size();
    double value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) {
        throw Error("segment text line " + std::to_string(line_no) + ": bad " + std::string(key));
    }
    return value;
}

}  // namespace

VectorMap from_segment_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("coarsemap-segments v1 ", 0) != 0) {
        throw Error("segment text: missing 'coarsemap-segments v1' header");
    }
    const double spacing = parse_header_value(line, "spacing=", 1);
    GeoPoint origin{parse_header_value(line, "origin_lat=", 1),
                    parse_header_value(line, "origin_lon=", 1)};

    std::vector<MapSegment> segments;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        MapSegment seg;
        int flag = 0;
        long long way = 0;
        if (std::sscanf(line.c_str(), "%lf %lf %lf %lf %d %lld", &seg.start.x, &seg.start.y,
                        &seg.end.x, &seg.end.y, &flag, &way) != 6) {
            throw Error("segment text line " + std::to_string(line_no) + ": expected 6 columns");
        }
        seg.is_intersection = flag != 0;
        seg.source_way = way;
        segments.push_back(seg);
    }
    return VectorMap::from_segments(std::move(segments), origin, spacing);
}

void save_segment_file(const VectorMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write segment file: " + path);
    out << to_segment_text(map);
}

VectorMap load_segment_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open segment file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_segment_text(buffer.str());
}

}  // namespace coarsemap
