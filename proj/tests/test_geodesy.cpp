#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coarsemap/detail/rng.hpp"
#include "coarsemap/errors.hpp"
#include "coarsemap/geodesy.hpp"
#include "support.hpp"

using namespace coarsemap;
using testsupport::haversine;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMeterPerDegree = 111319.490793;  // 6378137 * pi / 180
}  // namespace

TEST_CASE("to_plane maps the origin to (0,0)") {
    const LocalFrame frame{{37.7749, -122.4194}};
    const PlanePoint p = to_plane(frame, frame.origin);
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
}

TEST_CASE("one degree of longitude at the equator") {
    const LocalFrame frame{{0.0, 0.0}};
    const PlanePoint p = to_plane(frame, {0.0, 0.999999999});
    // 6378137 * pi / 180, evaluated independently.
    CHECK(std::abs(p.x - kMeterPerDegree) < 1e-3);
    CHECK(std::abs(p.y) < 1e-9);
}

TEST_CASE("longitude arc shrinks with cos(latitude)") {
    const LocalFrame frame{{60.0, 0.0}};
    const PlanePoint p = to_plane(frame, {60.0, 0.999999999});
    CHECK(std::abs(p.x - kMeterPerDegree * std::cos(60.0 * kPi / 180.0)) < 1e-3);
}

TEST_CASE("one degree of latitude is the same arc at any latitude") {
    for (const double lat0 : {0.0, 35.0, -47.5, 70.0}) {
        const LocalFrame frame{{lat0, 10.0}};
        const PlanePoint p = to_plane(frame, {lat0 + 0.999999999, 10.0});
        CHECK(std::abs(p.y - kMeterPerDegree) < 1e-3);
        CHECK(std::abs(p.x) < 1e-9);
    }
}

TEST_CASE("to_geo inverts to_plane within 1e-9 degrees") {
    detail::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const LocalFrame frame{{rng.uniform(-80.0, 80.0), rng.uniform(-179.0, 179.0)}};
        const GeoPoint p{frame.origin.lat + rng.uniform(-0.99, 0.99),
                         frame.origin.lon + rng.uniform(-0.99, 0.99)};
        const GeoPoint back = to_geo(frame, to_plane(frame, p));
        CHECK(std::abs(back.lat - p.lat) < 1e-9);
        CHECK(std::abs(back.lon - p.lon) < 1e-9);
    }
}

TEST_CASE("to_geo of the frame origin") {
    const LocalFrame frame{{-33.8688, 151.2093}};
    const GeoPoint g = to_geo(frame, {0.0, 0.0});
    CHECK(g.lat == doctest::Approx(-33.8688).epsilon(1e-12));
    CHECK(g.lon == doctest::Approx(151.2093).epsilon(1e-12));
}

TEST_CASE("to_geo recovers the closed-form longitude arc") {
    const LocalFrame frame{{0.0, 0.0}};
    const GeoPoint g = to_geo(frame, {kMeterPerDegree, 0.0});
    CHECK(std::abs(g.lon - 1.0) < 1e-8);
    CHECK(std::abs(g.lat) < 1e-12);
}

TEST_CASE("planar distance tracks the great circle at small scale") {
    detail::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const LocalFrame frame{{rng.uniform(-70.0, 70.0), rng.uniform(-179.0, 179.0)}};
        const PlanePoint a{rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0)};
        const PlanePoint b{a.x + rng.uniform(-500.0, 500.0), a.y + rng.uniform(-500.0, 500.0)};
        const double planar = testsupport::dist(a, b);
        if (planar < 1.0) continue;
        const double arc = haversine(to_geo(frame, a), to_geo(frame, b));
        CHECK(std::abs(planar - arc) / planar < 0.002);
    }
}

TEST_CASE("longitude wraps across the antimeridian") {
    const LocalFrame frame{{0.0, 179.9}};
    // 0.2 degrees east of the origin, expressed west of the antimeridian.
    const PlanePoint p = to_plane(frame, {0.0, -179.9});
    CHECK(p.x == doctest::Approx(0.2 * kMeterPerDegree).epsilon(1e-9));
    const GeoPoint back = to_geo(frame, p);
    CHECK(back.lon == doctest::Approx(-179.9).epsilon(1e-12));
}

TEST_CASE("to_plane rejects scenario-scale violations") {
    const LocalFrame frame{{10.0, 10.0}};
    CHECK_THROWS_AS((void)to_plane(frame, {11.0, 10.0}), OutOfExtent);
    CHECK_THROWS_AS((void)to_plane(frame, {10.0, 11.5}), OutOfExtent);
    CHECK_NOTHROW((void)to_plane(frame, {10.999, 10.0}));
}

TEST_CASE("to_geo rejects far points and polar frames") {
    const LocalFrame frame{{10.0, 10.0}};
    CHECK_THROWS_AS((void)to_geo(frame, {250000.0, 0.0}), OutOfExtent);
    CHECK_NOTHROW((void)to_geo(frame, {100000.0, 0.0}));
    const LocalFrame polar{{89.9995, 0.0}};
    CHECK_THROWS_AS((void)to_geo(polar, {1.0, 1.0}), DegenerateLatitude);
}

TEST_CASE("track_bbox covers single point with zero pad") {
    const LocalFrame frame{{48.8566, 2.3522}};
    const auto [sw, ne] = track_bbox(frame, {{{0.0, 0.0}}}, 0.0);
    CHECK(sw.lat == doctest::Approx(frame.origin.lat).epsilon(1e-12));
    CHECK(sw.lon == doctest::Approx(frame.origin.lon).epsilon(1e-12));
    CHECK(ne.lat == doctest::Approx(frame.origin.lat).epsilon(1e-12));
    CHECK(ne.lon == doctest::Approx(frame.origin.lon).epsilon(1e-12));
}

TEST_CASE("track_bbox pads the plane box before converting") {
    const LocalFrame frame{{48.8566, 2.3522}};
    const auto [sw, ne] = track_bbox(frame, {{{0.0, 0.0}, {10.0, 20.0}}}, 5.0);
    const GeoPoint want_sw = to_geo(frame, {-5.0, -5.0});
    const GeoPoint want_ne = to_geo(frame, {15.0, 25.0});
    CHECK(sw.lat == doctest::Approx(want_sw.lat).epsilon(1e-12));
    CHECK(sw.lon == doctest::Approx(want_sw.lon).epsilon(1e-12));
    CHECK(ne.lat == doctest::Approx(want_ne.lat).epsilon(1e-12));
    CHECK(ne.lon == doctest::Approx(want_ne.lon).epsilon(1e-12));
}

TEST_CASE("track_bbox contains every point with the requested margin") {
    detail::Rng rng(23);
    const LocalFrame frame{{37.0, -122.0}};
    std::vector<std::vector<PlanePoint>> tracks(4);
    for (auto& track : tracks)
        for (int i = 0; i < 25; ++i)
            track.push_back({rng.uniform(-800.0, 800.0), rng.uniform(-800.0, 800.0)});

    const double pad = 125.0;
    const auto [sw, ne] = track_bbox(frame, tracks, pad);
    const PlanePoint lo = to_plane(frame, sw);
    const PlanePoint hi = to_plane(frame, ne);
    for (const auto& track : tracks)
        for (const PlanePoint& p : track) {
            CHECK(p.x - lo.x >= pad - 1e-6);
            CHECK(p.y - lo.y >= pad - 1e-6);
            CHECK(hi.x - p.x >= pad - 1e-6);
            CHECK(hi.y - p.y >= pad - 1e-6);
        }
}

TEST_CASE("track_bbox ignores point order") {
    const LocalFrame frame{{37.0, -122.0}};
    const std::vector<std::vector<PlanePoint>> a = {{{1, 2}, {-3, 4}, {5, -6}}};
    const std::vector<std::vector<PlanePoint>> b = {{{5, -6}, {1, 2}, {-3, 4}}};
    const auto boxa = track_bbox(frame, a, 7.0);
    const auto boxb = track_bbox(frame, b, 7.0);
    CHECK(boxa.first == boxb.first);
    CHECK(boxa.second == boxb.second);
}

TEST_CASE("track_bbox requires at least one point") {
    const LocalFrame frame{{0.0, 0.0}};
    CHECK_THROWS_AS((void)track_bbox(frame, {}, 0.0), EmptyTracks);
    CHECK_THROWS_AS((void)track_bbox(frame, {{}, {}}, 0.0), EmptyTracks);
}
