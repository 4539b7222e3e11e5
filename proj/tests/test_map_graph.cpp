#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coarsemap/detail/rng.hpp"
#include "coarsemap/errors.hpp"
#include "coarsemap/osm.hpp"
#include "coarsemap/vector_map.hpp"
#include "support.hpp"

using namespace coarsemap;
using testsupport::dist;
using testsupport::distance_to_polyline;
using testsupport::point_at_arc;
using testsupport::polyline_length;
using testsupport::scan_flags;
using testsupport::scan_radius;

namespace {

std::vector<PlanePoint> random_polyline(detail::Rng& rng) {
    const int n = static_cast<int>(rng.uniform_int(2, 12));
    std::vector<PlanePoint> pts{{rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0)}};
    for (int i = 1; i < n; ++i) {
        const double angle = rng.uniform(0.0, 6.283185307179586);
        const double step = rng.uniform(0.5, 60.0);
        pts.push_back({pts.back().x + step * std::cos(angle),
                       pts.back().y + step * std::sin(angle)});
    }
    return pts;
}

std::vector<MapSegment> random_segments(detail::Rng& rng, std::size_t count) {
    std::vector<MapSegment> segments;
    for (std::size_t i = 0; i < count; ++i) {
        const PlanePoint a{rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0)};
        const PlanePoint b{a.x + rng.uniform(-1.5, 1.5), a.y + rng.uniform(-1.5, 1.5)};
        if (dist(a, b) < 1e-3) continue;
        segments.push_back({a, b, rng.uniform() < 0.2, static_cast<std::int64_t>(i % 7 + 1)});
    }
    return segments;
}

OsmGraph straight_road_graph(const LocalFrame& frame, PlanePoint from, PlanePoint to,
                             std::vector<PlanePoint> marker_positions = {}) {
    OsmGraph g;
    const GeoPoint ga = to_geo(frame, from);
    const GeoPoint gb = to_geo(frame, to);
    g.nodes.emplace(1, OsmNode{1, ga.lat, ga.lon, 0});
    g.nodes.emplace(2, OsmNode{2, gb.lat, gb.lon, 0});
    OsmWay way;
    way.id = 10;
    way.node_refs = {1, 2};
    way.is_road = true;
    g.ways.emplace(10, way);
    std::int64_t next = 100;
    for (const PlanePoint& m : marker_positions) {
        const GeoPoint gm = to_geo(frame, m);
        g.nodes.emplace(next, OsmNode{next, gm.lat, gm.lon,
                                      static_cast<unsigned>(Marker::TrafficSignal)});
        ++next;
    }
    return g;
}

}  // namespace

// --- interpolate_way --------------------------------------------------------

TEST_CASE("interpolation splits a 3 m segment into two equal pieces") {
    const auto pts = interpolate_way({{0, 0}, {3, 0}}, 1.5);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0] == PlanePoint{0, 0});
    CHECK(pts[1] == PlanePoint{1.5, 0});
    CHECK(pts[2] == PlanePoint{3, 0});
}

TEST_CASE("interpolation divides by ceil(L/spacing) equal gaps") {
    const auto pts = interpolate_way({{0, 0}, {4, 0}}, 1.5);
    REQUIRE(pts.size() == 4);  // n = ceil(4/1.5) = 3
    CHECK(pts[1].x == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(pts[2].x == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(pts[3].x == 4.0);
}

TEST_CASE("interpolation keeps vertices that fall on the sample lattice") {
    const auto pts = interpolate_way({{0, 0}, {1.5, 0}, {1.5, 1.5}}, 1.5);
    REQUIRE(pts.size() == 3);
    CHECK(pts[1] == PlanePoint{1.5, 0});
    CHECK(pts[2] == PlanePoint{1.5, 1.5});
}

TEST_CASE("interpolation rejects degenerate input") {
    CHECK_THROWS_AS((void)interpolate_way({{1, 1}}, 1.5), DegeneratePolyline);
    CHECK_THROWS_AS((void)interpolate_way({}, 1.5), DegeneratePolyline);
    CHECK_THROWS_AS((void)interpolate_way({{1, 1}, {1, 1}}, 1.5), DegeneratePolyline);
    CHECK_THROWS_AS((void)interpolate_way({{0, 0}, {1, 0}}, 0.0), DegeneratePolyline);
}

TEST_CASE("interpolation properties on random polylines") {
    detail::Rng rng(101);
    for (int iter = 0; iter < 300; ++iter) {
        const auto input = random_polyline(rng);
        const double spacing = rng.uniform(0.4, 5.0);
        const double length = polyline_length(input);
        const auto pts = interpolate_way(input, spacing);

        const auto n = static_cast<std::size_t>(std::ceil(length / spacing));
        REQUIRE(pts.size() == n + 1);
        CHECK(pts.front() == input.front());
        CHECK(pts.back() == input.back());

        // Uniformity is in arc length: sample k sits at arc position
        // k*L/n along the input, so consecutive samples are separated by
        // the same share of road. Chords between samples can only be
        // shorter (they cut corners), never longer than the gap.
        const double gap = length / static_cast<double>(n);
        CHECK(gap <= spacing + 1e-12);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            CHECK(distance_to_polyline(input, pts[k]) < 1e-9);
            const PlanePoint want = point_at_arc(input, static_cast<double>(k) * gap);
            CHECK(dist(pts[k], want) < 1e-9);
        }
        for (std::size_t i = 1; i < pts.size(); ++i)
            CHECK(dist(pts[i - 1], pts[i]) <= gap + 1e-9);
    }
}

TEST_CASE("interpolating a straight line preserves arc length within 1e-9") {
    detail::Rng rng(103);
    for (int iter = 0; iter < 200; ++iter) {
        const PlanePoint a{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
        const PlanePoint b{a.x + rng.uniform(-80.0, 80.0), a.y + rng.uniform(-80.0, 80.0)};
        if (dist(a, b) < 0.1) continue;
        const auto pts = interpolate_way({a, b}, rng.uniform(0.5, 3.0));
        CHECK(std::abs(polyline_length(pts) - dist(a, b)) < 1e-9);
    }
}

// --- flag_intersections ------------------------------------------------------

TEST_CASE("flagging uses a closed 10 m ball") {
    std::vector<MapNode> nodes = {{{9.9, 0}, false, 1},
                                  {{10.0, 0}, false, 1},
                                  {{10.1, 0}, false, 1}};
    const auto flagged = flag_intersections(nodes, {{0, 0}});
    CHECK(flagged[0].is_intersection);
    CHECK(flagged[1].is_intersection);  // boundary belongs to the ball
    CHECK_FALSE(flagged[2].is_intersection);
}

TEST_CASE("flagging leaves other fields untouched and never unflags") {
    std::vector<MapNode> nodes = {{{1, 2}, true, 42}, {{100, 100}, false, 7}};
    const auto flagged = flag_intersections(nodes, {}, 10.0);
    CHECK(flagged[0].is_intersection);  // already set stays set
    CHECK(flagged[0].source_way == 42);
    CHECK(flagged[0].position == PlanePoint{1, 2});
    CHECK_FALSE(flagged[1].is_intersection);
}

TEST_CASE("flags equal the all-pairs scan on random instances") {
    detail::Rng rng(107);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<MapNode> nodes;
        std::vector<PlanePoint> positions;
        for (int i = 0; i < 200; ++i) {
            const PlanePoint p{rng.uniform(-60.0, 60.0), rng.uniform(-60.0, 60.0)};
            nodes.push_back({p, false, 1});
            positions.push_back(p);
        }
        std::vector<PlanePoint> markers;
        for (int i = 0; i < 10; ++i)
            markers.push_back({rng.uniform(-60.0, 60.0), rng.uniform(-60.0, 60.0)});

        const auto flagged = flag_intersections(nodes, markers, 10.0);
        const auto want = scan_flags(positions, markers, 10.0);
        for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(flagged[i].is_intersection == want[i]);
    }
}

TEST_CASE("flagging is monotone in radius and in the marker set") {
    detail::Rng rng(109);
    std::vector<MapNode> nodes;
    for (int i = 0; i < 150; ++i)
        nodes.push_back({{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)}, false, 1});
    std::vector<PlanePoint> markers = {{0, 0}, {20, 10}};

    const auto small = flag_intersections(nodes, markers, 8.0);
    const auto large = flag_intersections(nodes, markers, 12.0);
    std::vector<PlanePoint> more_markers = markers;
    more_markers.push_back({-15, -15});
    const auto more = flag_intersections(nodes, more_markers, 8.0);

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (small[i].is_intersection) {
            CHECK(large[i].is_intersection);
            CHECK(more[i].is_intersection);
        }
    }
}

// --- the spatial index -------------------------------------------------------

TEST_CASE("radius queries equal the midpoint scan on random maps") {
    detail::Rng rng(113);
    for (int iter = 0; iter < 10; ++iter) {
        const auto segments = random_segments(rng, 400);
        const VectorMap map = VectorMap::from_segments(segments, {0, 0}, 1.5);
        for (int q = 0; q < 100; ++q) {
            const PlanePoint center{rng.uniform(-350.0, 350.0), rng.uniform(-350.0, 350.0)};
            const double radius = rng.uniform(0.5, 160.0);
            const auto got = map.radius_indices(center, radius);
            const auto want = scan_radius(map.segments(), center, radius);
            CHECK(got == want);
            CHECK(std::is_sorted(got.begin(), got.end()));
        }
    }
}

TEST_CASE("radius query boundary is closed") {
    // Midpoint at (3,4): distance from the origin is exactly 5.
    const std::vector<MapSegment> segments = {{{2.5, 4}, {3.5, 4}, false, 1}};
    const VectorMap map = VectorMap::from_segments(segments, {0, 0}, 1.5);
    CHECK(map.radius_indices({0, 0}, 5.0).size() == 1);
    CHECK(map.radius_indices({0, 0}, 4.999999).empty());
}

TEST_CASE("nearest_segment picks the closest, breaking ties downward") {
    // Two parallel segments straddling the query point.
    const std::vector<MapSegment> segments = {
        {{0, 1}, {1, 1}, false, 1},   // distance 1 above
        {{0, -1}, {1, -1}, false, 2}, // distance 1 below (tie)
        {{0, 5}, {1, 5}, false, 3},
    };
    const VectorMap map = VectorMap::from_segments(segments, {0, 0}, 1.5);
    const auto hit = map.nearest_segment({0.5, 0.0}, 10.0);
    REQUIRE(hit.has_value());
    CHECK(*hit == 0);

    const auto near_top = map.nearest_segment({0.5, 4.8}, 10.0);
    REQUIRE(near_top.has_value());
    CHECK(*near_top == 2);

    CHECK_FALSE(map.nearest_segment({0.5, 100.0}, 10.0).has_value());
}

TEST_CASE("nearest_segment measures distance to the segment, not its midpoint") {
    // A long segment whose midpoint is 39 m away but whose body passes
    // 0.5 m from the query must beat a short segment 30+ m away.
    const std::vector<MapSegment> segments = {
        {{-40, 0.5}, {40, 0.5}, false, 1},
        {{6, 3}, {7, 3}, false, 2},
    };
    const VectorMap map = VectorMap::from_segments(segments, {0, 0}, 80.0);
    const auto far_end = map.nearest_segment({39.0, 1.0}, 50.0);
    REQUIRE(far_end.has_value());
    CHECK(*far_end == 0);

    // And the short segment wins when its body really is closer.
    const auto near_short = map.nearest_segment({6.5, 2.8}, 50.0);
    REQUIRE(near_short.has_value());
    CHECK(*near_short == 1);
}

// --- build_vector_map ---------------------------------------------------------

// Road lengths below sit strictly between multiples of the spacing so
// the sub-nanometer wobble of the geographic round trip cannot move
// ceil(L/spacing) across a boundary.

TEST_CASE("a 2.9 m road becomes two unflagged segments") {
    const LocalFrame frame{{37.77, -122.42}};
    const OsmGraph g = straight_road_graph(frame, {0, 0}, {2.9, 0});
    const VectorMap map = build_vector_map(g, frame);
    REQUIRE(map.segments().size() == 2);
    for (const MapSegment& s : map.segments()) {
        CHECK_FALSE(s.is_intersection);
        CHECK(s.source_way == 10);
        CHECK(dist(s.start, s.end) == doctest::Approx(1.45).epsilon(1e-6));
    }
    CHECK(map.origin() == frame.origin);
    CHECK(map.spacing() == 1.5);
}

TEST_CASE("a marker near the midpoint flags both segments of a short road") {
    const LocalFrame frame{{37.77, -122.42}};
    const OsmGraph g = straight_road_graph(frame, {0, 0}, {2.9, 0}, {{1.45, 5.0}});
    const VectorMap map = build_vector_map(g, frame);
    REQUIRE(map.segments().size() == 2);
    CHECK(map.segments()[0].is_intersection);
    CHECK(map.segments()[1].is_intersection);
}

TEST_CASE("a marker flags only segments with an endpoint in reach") {
    const LocalFrame frame{{37.77, -122.42}};
    // ~60 m road; marker 5 m off the start. Segments near the start are
    // flagged, segments near the end are not.
    const OsmGraph g = straight_road_graph(frame, {0, 0}, {59.9, 0}, {{0.0, 5.0}});
    const VectorMap map = build_vector_map(g, frame);
    REQUIRE(map.segments().size() == 40);
    CHECK(map.segments().front().is_intersection);
    CHECK_FALSE(map.segments().back().is_intersection);
}

TEST_CASE("fixture segment counts match the per-way arc-length computation") {
    const LocalFrame frame{{37.7749, -122.4194}};
    WarningLog log;
    const OsmGraph g = filter_roads(parse_osm_file(testsupport::data_file("sample.osm"), &log));
    const VectorMap map = build_vector_map(g, frame, 1.5, 10.0, &log);
    CHECK(log.empty());

    std::size_t want_total = 0;
    for (const auto& [way_id, way] : g.ways) {
        std::vector<PlanePoint> polyline;
        for (const std::int64_t ref : way.node_refs) {
            const OsmNode& n = g.nodes.at(ref);
            polyline.push_back(to_plane(frame, {n.lat, n.lon}));
        }
        const double length = polyline_length(polyline);
        const auto n_segments = static_cast<std::size_t>(std::ceil(length / 1.5));
        want_total += n_segments;

        std::size_t got = 0;
        for (const MapSegment& s : map.segments()) got += s.source_way == way_id ? 1 : 0;
        CHECK(got == n_segments);
    }
    CHECK(map.segments().size() == want_total);
}

TEST_CASE("ways that cannot be projected or interpolated are dropped with warnings") {
    const LocalFrame frame{{37.77, -122.42}};
    OsmGraph g = straight_road_graph(frame, {0, 0}, {2.9, 0});
    // A second way whose nodes coincide -> zero length.
    g.nodes.emplace(3, OsmNode{3, 37.77, -122.42, 0});
    OsmWay degenerate;
    degenerate.id = 11;
    degenerate.node_refs = {3, 3};
    degenerate.is_road = true;
    g.ways.emplace(11, degenerate);
    // A third way with a node far outside the frame extent.
    g.nodes.emplace(4, OsmNode{4, 39.9, -122.42, 0});
    OsmWay far;
    far.id = 12;
    far.node_refs = {1, 4};
    far.is_road = true;
    g.ways.emplace(12, far);

    WarningLog log;
    const VectorMap map = build_vector_map(g, frame, 1.5, 10.0, &log);
    CHECK(map.segments().size() == 2);  // only the short straight way survives
    CHECK(log.size() == 2);
}

TEST_CASE("straight ways divide into equal-length segments") {
    detail::Rng rng(149);
    const LocalFrame frame{{37.7749, -122.4194}};
    for (int iter = 0; iter < 50; ++iter) {
        const PlanePoint a{rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0)};
        const double angle = rng.uniform(0.0, 6.283185307179586);
        const double len = rng.uniform(5.0, 400.0);
        const PlanePoint b{a.x + len * std::cos(angle), a.y + len * std::sin(angle)};
        const OsmGraph g = straight_road_graph(frame, a, b);
        const VectorMap map = build_vector_map(g, frame);
        REQUIRE(!map.empty());
        const double first = dist(map.segments()[0].start, map.segments()[0].end);
        for (const MapSegment& s : map.segments()) {
            const double l = dist(s.start, s.end);
            CHECK(std::abs(l - first) < 1e-9);
            CHECK(l > 0.0);
            CHECK(l <= 1.5 + 1e-9);
        }
    }
}

TEST_CASE("fixture segments never exceed the spacing") {
    const LocalFrame frame{{37.7749, -122.4194}};
    const OsmGraph g = filter_roads(parse_osm_file(testsupport::data_file("sample.osm")));
    const VectorMap map = build_vector_map(g, frame);
    for (const MapSegment& s : map.segments()) {
        const double len = dist(s.start, s.end);
        CHECK(len > 0.0);
        CHECK(len <= 1.5 + 1e-9);
    }
}

// --- extract_receptive_field ---------------------------------------------------

TEST_CASE("extraction equals the midpoint filter and keeps map order") {
    detail::Rng rng(127);
    for (int iter = 0; iter < 10; ++iter) {
        const VectorMap map = VectorMap::from_segments(random_segments(rng, 300), {0, 0}, 1.5);
        const PlanePoint center{rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0)};
        const double radius = rng.uniform(10.0, 120.0);

        const auto got = extract_receptive_field(map, center, radius);
        const auto want_idx = scan_radius(map.segments(), center, radius);
        REQUIRE(got.size() == want_idx.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            const MapSegment& w = map.segments()[want_idx[i]];
            CHECK(got[i].start == w.start);
            CHECK(got[i].end == w.end);
            CHECK(got[i].is_intersection == w.is_intersection);
            CHECK(got[i].source_way == w.source_way);
        }
    }
}

TEST_CASE("a field never shrinks when the radius grows") {
    detail::Rng rng(131);
    const VectorMap map = VectorMap::from_segments(random_segments(rng, 500), {0, 0}, 1.5);
    const auto key = [](const MapSegment& s) {
        return std::tuple(s.start.x, s.start.y, s.end.x, s.end.y);
    };
    for (int q = 0; q < 50; ++q) {
        const PlanePoint center{rng.uniform(-250.0, 250.0), rng.uniform(-250.0, 250.0)};
        const auto narrow = extract_receptive_field(map, center, 100.0);
        const auto wide = extract_receptive_field(map, center, 125.0);
        CHECK(narrow.size() <= wide.size());
        std::set<std::tuple<double, double, double, double>> wide_keys;
        for (const MapSegment& s : wide) wide_keys.insert(key(s));
        for (const MapSegment& s : narrow) CHECK(wide_keys.count(key(s)) == 1);
    }
}

TEST_CASE("extraction just beyond the nearest midpoint is empty") {
    const std::vector<MapSegment> segments = {{{100.5, 0}, {101.5, 0}, false, 1}};
    const VectorMap map = VectorMap::from_segments(segments, {0, 0}, 1.5);
    CHECK(extract_receptive_field(map, {0, 0}, 100.0).empty());
    CHECK(extract_receptive_field(map, {0, 0}, 101.0).size() == 1);
}

// --- to_relative ---------------------------------------------------------------

TEST_CASE("identity anchor keeps coordinates") {
    const std::vector<MapSegment> segments = {{{1, 2}, {3, 4}, true, 1}};
    const RelativeScene scene = to_relative(segments, {0, 0}, 0.0);
    REQUIRE(scene.segments.size() == 1);
    CHECK(scene.segments[0].start == PlanePoint{1, 2});
    CHECK(scene.segments[0].end == PlanePoint{3, 4});
    CHECK(scene.segments[0].is_intersection);
}

TEST_CASE("anchor facing +y maps north to +x") {
    const std::vector<MapSegment> segments = {{{1, 0}, {2, 0}, false, 1}};
    const double half_pi = std::acos(0.0);
    const RelativeScene scene = to_relative(segments, {1, 0}, half_pi);
    REQUIRE(scene.segments.size() == 1);
    CHECK(dist(scene.segments[0].start, {0, 0}) < 1e-12);
    CHECK(dist(scene.segments[0].end, {0, -1}) < 1e-12);
}

TEST_CASE("to_absolute undoes the anchor transform within 1e-9") {
    detail::Rng rng(137);
    const auto segments = random_segments(rng, 100);
    const PlanePoint anchor{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    const double heading = rng.uniform(-3.0, 3.0);
    const RelativeScene scene = to_relative(segments, anchor, heading);
    const auto absolute = scene.to_absolute();
    REQUIRE(absolute.size() == segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        CHECK(dist(absolute[i].start, segments[i].start) < 1e-9);
        CHECK(dist(absolute[i].end, segments[i].end) < 1e-9);
        CHECK(absolute[i].is_intersection == segments[i].is_intersection);
    }
}

TEST_CASE("the relative transform is an isometry") {
    detail::Rng rng(139);
    const auto segments = random_segments(rng, 60);
    const RelativeScene scene = to_relative(segments, {13.0, -4.0}, 2.1);
    std::vector<PlanePoint> before, after;
    for (const MapSegment& s : segments) {
        before.push_back(s.start);
        before.push_back(s.end);
    }
    for (const auto& s : scene.segments) {
        after.push_back(s.start);
        after.push_back(s.end);
    }
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = i + 1; j < before.size(); j += 7)
            CHECK(std::abs(dist(before[i], before[j]) - dist(after[i], after[j])) < 1e-9);
}

// --- segment text round trips -----------------------------------------------------

TEST_CASE("text export/import round-trips the map") {
    const LocalFrame frame{{37.7749, -122.4194}};
    const OsmGraph g = filter_roads(parse_osm_file(testsupport::data_file("sample.osm")));
    const VectorMap map = build_vector_map(g, frame);

    const std::string text = to_segment_text(map);
    const VectorMap back = from_segment_text(text);
    REQUIRE(back.segments().size() == map.segments().size());
    CHECK(back.spacing() == map.spacing());
    CHECK(std::abs(back.origin().lat - map.origin().lat) < 1e-9);
    CHECK(std::abs(back.origin().lon - map.origin().lon) < 1e-9);
    for (std::size_t i = 0; i < map.segments().size(); ++i) {
        // 9 fractional digits in the file bound the coordinate error.
        CHECK(dist(back.segments()[i].start, map.segments()[i].start) < 1e-8);
        CHECK(dist(back.segments()[i].end, map.segments()[i].end) < 1e-8);
        CHECK(back.segments()[i].is_intersection == map.segments()[i].is_intersection);
        CHECK(back.segments()[i].source_way == map.segments()[i].source_way);
    }

    // Text -> map -> text is byte-identical (the fixed-point format).
    CHECK(to_segment_text(back) == text);
}

TEST_CASE("segment files round-trip through disk") {
    const LocalFrame frame{{37.7749, -122.4194}};
    const OsmGraph g = filter_roads(parse_osm_file(testsupport::data_file("sample.osm")));
    const VectorMap map = build_vector_map(g, frame);

    testsupport::TempDir dir;
    const std::string path = (dir / "map.segments").string();
    save_segment_file(map, path);
    const VectorMap back = load_segment_file(path);
    CHECK(to_segment_text(back) == to_segment_text(map));
}

TEST_CASE("mangled segment text is rejected") {
    CHECK_THROWS_AS((void)from_segment_text("bogus\n"), Error);
    CHECK_THROWS_AS((void)from_segment_text(""), Error);
    const std::string good = "coarsemap-segments v1 spacing=1.5 origin_lat=1 origin_lon=2\n";
    CHECK_NOTHROW((void)from_segment_text(good));
    CHECK_THROWS_AS((void)from_segment_text(good + "1 2 3\n"), Error);
}

TEST_CASE("an empty road set still yields a valid header-only file") {
    const VectorMap map = VectorMap::from_segments({}, {37.0, -122.0}, 1.5);
    const std::string text = to_segment_text(map);
    const VectorMap back = from_segment_text(text);
    CHECK(back.empty());
    CHECK(back.spacing() == 1.5);
    CHECK(to_segment_text(back) == text);
}

// --- chains ---------------------------------------------------------------------

TEST_CASE("chains reassemble the segment list per way") {
    const LocalFrame frame{{37.7749, -122.4194}};
    const OsmGraph g = filter_roads(parse_osm_file(testsupport::data_file("sample.osm")));
    const VectorMap map = build_vector_map(g, frame);

    std::size_t total_segments = 0;
    for (const WayChain& chain : map.chains()) {
        REQUIRE(chain.points.size() >= 2);
        const std::size_t n = chain.points.size() - 1;
        for (std::size_t i = 0; i < n; ++i) {
            const MapSegment& s = map.segments()[chain.first_segment + i];
            CHECK(s.start == chain.points[i]);
            CHECK(s.end == chain.points[i + 1]);
            CHECK(s.source_way == chain.way_id);
        }
        total_segments += n;
    }
    CHECK(total_segments == map.segments().size());
}
