#include "coarsemap/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "coarsemap/detail/rng.hpp"
#include "coarsemap/errors.hpp"
#include "coarsemap/geometry.hpp"

namespace coarsemap {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr std::string_view kClassNames[kAgentClassCount] = {
    "vehicle",      "pedestrian", "motorcyclist", "cyclist",           "bus",
    "static",       "background", "construction", "riderless_bicycle", "unknown",
};

}  // namespace

std::string_view to_string(AgentClass cls) {
    return kClassNames[static_cast<int>(cls)];
}

std::optional<AgentClass> agent_class_from_string(std::string_view name) {
    for (int i = 0; i < kAgentClassCount; ++i) {
        if (kClassNames[i] == name) return static_cast<AgentClass>(i);
    }
    return std::nullopt;
}

std::string_view to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::Straight: return "straight";
        case SyntheticKind::Curved: return "curved";
        case SyntheticKind::Intersection: return "intersection";
    }
    return "straight";
}

std::optional<SyntheticKind> synthetic_kind_from_string(std::string_view name) {
    if (name == "straight") return SyntheticKind::Straight;
    if (name == "curved") return SyntheticKind::Curved;
    if (name == "intersection") return SyntheticKind::Intersection;
    return std::nullopt;
}

std::optional<int> AgentTrack::last_observed_before(int frame_end) const {
    const int end = std::min<int>(frame_end, static_cast<int>(states.size()));
    for (int f = end - 1; f >= 0; --f) {
        if (states[static_cast<std::size_t>(f)].has_value()) return f;
    }
    return std::nullopt;
}

int AgentTrack::observed_count_before(int frame_end) const {
    const int end = std::min<int>(frame_end, static_cast<int>(states.size()));
    int n = 0;
    for (int f = 0; f < end; ++f) {
        if (states[static_cast<std::size_t>(f)].has_value()) ++n;
    }
    return n;
}

const AgentTrack& Scenario::focal_track() const {
    for (const AgentTrack& track : tracks) {
        if (track.focal) return track;
    }
    throw NoFocalAgent("scenario '" + scenario_id + "' has no focal agent");
}

// --- JSON I/O ---------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw SchemaViolation(path + ": " + what);
}

const json& require_field(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) schema_fail(path + "." + key, "missing required field");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require_field(obj, key, path);
    if (!v.is_string()) schema_fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& path) {
    const json& v = require_field(obj, key, path);
    if (!v.is_number()) schema_fail(path + "." + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) schema_fail(path + "." + key, "expected a finite number");
    return d;
}

std::string index_path(const std::string& base, const char* key, std::size_t i) {
    return base + "." + key + "[" + std::to_string(i) + "]";
}

}  // namespace

Scenario load_scenario(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw SchemaViolation(std::string("root: invalid JSON: ") + err.what());
    }
    if (!doc.is_object()) schema_fail("root", "expected an object");

    Scenario sc;
    sc.scenario_id = require_string(doc, "scenario_id", "root");

    const json& origin = require_field(doc, "origin", "root");
    if (!origin.is_object()) schema_fail("root.origin", "expected an object");
    sc.frame.origin.lat = require_number(origin, "lat", "root.origin");
    sc.frame.origin.lon = require_number(origin, "lon", "root.origin");
    if (sc.frame.origin.lat < -90.0 || sc.frame.origin.lat > 90.0)
        schema_fail("root.origin.lat", "latitude out of range [-90, 90]");
    if (sc.frame.origin.lon < -180.0 || sc.frame.origin.lon > 180.0)
        schema_fail("root.origin.lon", "longitude out of range [-180, 180]");

    const double timestep = require_number(doc, "timestep_s", "root");
    if (timestep <= 0.0) schema_fail("root.timestep_s", "must be positive");
    sc.spec.timestep = timestep;

    const json& agents = require_field(doc, "agents", "root");
    if (!agents.is_array()) schema_fail("root.agents", "expected an array");
    if (agents.empty()) schema_fail("root.agents", "must not be empty");

    const int total = sc.spec.total_frames();
    int focal_count = 0;
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string apath = index_path("root", "agents", i);
        const json& ja = agents[i];
        if (!ja.is_object()) schema_fail(apath, "expected an object");

        AgentTrack track;
        track.agent_id = require_string(ja, "agent_id", apath);
        if (track.agent_id.empty()) schema_fail(apath + ".agent_id", "must not be empty");
        if (!seen_ids.insert(track.agent_id).second)
            schema_fail(apath + ".agent_id", "duplicate agent id '" + track.agent_id + "'");

        const std::string cls_name = require_string(ja, "class", apath);
        const auto cls = agent_class_from_string(cls_name);
        if (!cls) schema_fail(apath + ".class", "unknown agent class '" + cls_name + "'");
        track.cls = *cls;

        if (const auto it = ja.find("focal"); it != ja.end()) {
            if (!it->is_boolean()) schema_fail(apath + ".focal", "expected a boolean");
            track.focal = it->get<bool>();
        }
        if (track.focal) ++focal_count;

        const json& states = require_field(ja, "states", apath);
        if (!states.is_array()) schema_fail(apath + ".states", "expected an array");
        track.states.assign(static_cast<std::size_t>(total), std::nullopt);
        for (std::size_t j = 0; j < states.size(); ++j) {
            const std::string spath = index_path(apath, "states", j);
            const json& js = states[j];
            if (!js.is_object()) schema_fail(spath, "expected an object");
            const json& jt = require_field(js, "t", spath);
            if (!jt.is_number_integer() && !jt.is_number_unsigned())
                schema_fail(spath + ".t", "expected an integer frame index");
            const auto t = jt.get<std::int64_t>();
            if (t < 0 || t >= total)
                schema_fail(spath + ".t",
                            "frame index out of range [0, " + std::to_string(total - 1) + "]");
            if (track.states[static_cast<std::size_t>(t)].has_value())
                schema_fail(spath + ".t", "duplicate frame index " + std::to_string(t));

            AgentState state;
            state.position.x = require_number(js, "x", spath);
            state.position.y = require_number(js, "y", spath);
            state.heading = require_number(js, "heading", spath);
            if (!(state.heading > -kPi && state.heading <= kPi))
                schema_fail(spath + ".heading", "must lie in (-pi, pi]");
            track.states[static_cast<std::size_t>(t)] = state;
        }

        if (track.focal) {
            for (int f = 0; f < total; ++f) {
                if (!track.states[static_cast<std::size_t>(f)].has_value())
                    schema_fail(apath + ".states",
                                "focal agent is missing frame " + std::to_string(f));
            }
        }
        sc.tracks.push_back(std::move(track));
    }

    if (focal_count == 0)
        throw NoFocalAgent("scenario '" + sc.scenario_id + "' declares no focal agent");
    if (focal_count > 1)
        throw DuplicateFocal("scenario '" + sc.scenario_id + "' declares " +
                             std::to_string(focal_count) + " focal agents");
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scenario file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::string save_scenario(const Scenario& scenario) {
    json agents = json::array();
    for (const AgentTrack& track : scenario.tracks) {
        json states = json::array();
        for (std::size_t f = 0; f < track.states.size(); ++f) {
            const auto& st = track.states[f];
            if (!st) continue;
            states.push_back({{"t", f},
                              {"x", st->position.x},
                              {"y", st->position.y},
                              {"heading", st->heading}});
        }
        agents.push_back({{"agent_id", track.agent_id},
                          {"class", std::string(to_string(track.cls))},
                          {"focal", track.focal},
                          {"states", std::move(states)}});
    }
    const json doc = {{"scenario_id", scenario.scenario_id},
                      {"origin", {{"lat", scenario.frame.origin.lat}, {"lon", scenario.frame.origin.lon}}},
                      {"timestep_s", scenario.spec.timestep},
                      {"agents", std::move(agents)}};
    return doc.dump(2) + "\n";
}

void save_scenario_file(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open scenario file for writing: " + path.string());
    out << save_scenario(scenario);
    if (!out) throw Error("failed writing scenario file: " + path.string());
}

// --- Synthesis --------------------------------------------------------

namespace {

using detail::Rng;

PlanePoint direction(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Piecewise-linear path with arc-length lookup.
struct PathSampler {
    std::vector<PlanePoint> pts;
    std::vector<double> cum;  // cum[i] = arc length up to pts[i]

    explicit PathSampler(std::vector<PlanePoint> points) : pts(std::move(points)) {
        cum.resize(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i)
            cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
    }

    double total() const { return cum.back(); }

    // Index of the segment containing arc position s (clamped).
    std::size_t segment_of(double s) const {
        const auto it = std::upper_bound(cum.begin(), cum.end(), s);
        auto idx = static_cast<std::size_t>(it - cum.begin());
        if (idx == 0) idx = 1;
        if (idx >= pts.size()) idx = pts.size() - 1;
        return idx - 1;
    }

    PlanePoint at(double s) const {
        s = std::clamp(s, 0.0, total());
        const std::size_t i = segment_of(s);
        const double seg_len = cum[i + 1] - cum[i];
        const double t = seg_len > 0.0 ? (s - cum[i]) / seg_len : 0.0;
        return pts[i] + t * (pts[i + 1] - pts[i]);
    }

    double heading_at(double s) const {
        s = std::clamp(s, 0.0, total());
        const std::size_t i = segment_of(s);
        const PlanePoint d = pts[i + 1] - pts[i];
        return std::atan2(d.y, d.x);
    }
};

/// Shared scaffolding for the three scene generators.
struct SceneBuilder {
    Rng rng;
    Scenario sc;
    OsmGraph graph;
    std::map<std::string, std::vector<PlanePoint>> gt;
    std::int64_t next_node_id = 1;
    std::int64_t next_way_id = 1;
    int next_agent = 0;

    SceneBuilder(SyntheticKind kind, std::uint64_t seed)
        : rng(seed ^ ((static_cast<std::uint64_t>(kind) + 1) << 62)) {
        sc.scenario_id = std::string(to_string(kind)) + "-" + std::to_string(seed);
        sc.frame.origin.lat = 37.7749 + rng.uniform(-1e-3, 1e-3);
        sc.frame.origin.lon = -122.4194 + rng.uniform(-1e-3, 1e-3);
    }

    std::int64_t add_node(PlanePoint p, unsigned markers = 0) {
        const GeoPoint g = to_geo(sc.frame, p);
        const std::int64_t id = next_node_id++;
        graph.nodes.emplace(id, OsmNode{id, g.lat, g.lon, markers});
        return id;
    }

    /// Adds a road way through the given plane points, inserting
    /// intermediate nodes so consecutive nodes are at most ~40 m apart.
    /// `shared` maps indices into `pts` onto existing node ids (used to
    /// share a junction node between ways).
    std::int64_t add_road(const std::vector<PlanePoint>& pts,
                          const std::map<std::size_t, std::int64_t>& shared = {}) {
        OsmWay way;
        way.id = next_way_id++;
        way.is_road = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0) {
                const PlanePoint a = pts[i - 1];
                const PlanePoint b = pts[i];
                const double len = distance(a, b);
                const int pieces = std::max(1, static_cast<int>(std::ceil(len / 40.0)));
                for (int k = 1; k < pieces; ++k) {
                    const double t = static_cast<double>(k) / pieces;
                    way.node_refs.push_back(add_node(a + t * (b - a)));
                }
            }
            const auto it = shared.find(i);
            way.node_refs.push_back(it != shared.end() ? it->second : add_node(pts[i]));
        }
        const std::int64_t id = way.id;
        graph.ways.emplace(id, std::move(way));
        return id;
    }

    std::string next_agent_id() {
        char buf[16];
        std::snprintf(buf, sizeof buf, "agent-%03d", next_agent++);
        return buf;
    }

    /// Adds an agent that moves along `path` at constant speed, located
    /// at arc position `arc0 + speed * timestep * frame`. Frames before
    /// `first_frame` are left unobserved. Future positions are recorded
    /// as ground truth.
    void add_path_agent(AgentClass cls, bool focal, const PathSampler& path, double arc0,
                        double speed, int first_frame = 0) {
        const ScenarioSpec& spec = sc.spec;
        AgentTrack track;
        track.agent_id = next_agent_id();
        track.cls = cls;
        track.focal = focal;
        track.states.assign(static_cast<std::size_t>(spec.total_frames()), std::nullopt);
        std::vector<PlanePoint> future;
        for (int f = 0; f < spec.total_frames(); ++f) {
            const double s = arc0 + speed * spec.timestep * f;
            const PlanePoint p = path.at(s);
            if (f >= first_frame)
                track.states[static_cast<std::size_t>(f)] =
                    AgentState{p, wrap_angle(path.heading_at(s))};
            if (f >= spec.history_len) future.push_back(p);
        }
        gt.emplace(track.agent_id, std::move(future));
        sc.tracks.push_back(std::move(track));
    }

    /// Adds an agent that never moves.
    void add_static_agent(AgentClass cls, PlanePoint pos, double heading) {
        const ScenarioSpec& spec = sc.spec;
        AgentTrack track;
        track.agent_id = next_agent_id();
        track.cls = cls;
        track.states.assign(static_cast<std::size_t>(spec.total_frames()),
                            AgentState{pos, wrap_angle(heading)});
        gt.emplace(track.agent_id,
                   std::vector<PlanePoint>(static_cast<std::size_t>(spec.future_len), pos));
        sc.tracks.push_back(std::move(track));
    }

    SyntheticScenario finish() && {
        return SyntheticScenario{std::move(sc), std::move(graph), std::move(gt)};
    }
};

SyntheticScenario make_straight(std::uint64_t seed) {
    SceneBuilder b(SyntheticKind::Straight, seed);
    Rng& rng = b.rng;

    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const PlanePoint u = direction(theta);
    const PlanePoint n = direction(theta + kPi / 2.0);
    const double speed = rng.uniform(5.0, 15.0);
    const double dt = b.sc.spec.timestep;
    const int total = b.sc.spec.total_frames();

    // Road long enough to cover every trajectory (including the fastest
    // background vehicle) plus prediction look-ahead past the last frame.
    const double track_len = speed * dt * (total - 1);
    const PlanePoint start = -0.5 * track_len * u;
    const double margin = 220.0;
    b.add_road({start - margin * u, start + (track_len + margin) * u});

    const PathSampler lane({start - margin * u, start + (track_len + margin) * u});
    b.add_path_agent(AgentClass::Vehicle, true, lane, margin, speed);

    const int extras = rng.uniform_int(1, 3);
    for (int i = 0; i < extras; ++i) {
        const int pick = rng.uniform_int(0, 5);
        const double arc_offset = rng.uniform(-40.0, 40.0);
        const double lateral = rng.uniform(-6.0, 6.0);
        const int first_frame = (i == 0) ? rng.uniform_int(10, 45) : 0;
        const PlanePoint shift = lateral * n;

        std::vector<PlanePoint> shifted;
        shifted.reserve(lane.pts.size());
        for (const PlanePoint& p : lane.pts) shifted.push_back(p + shift);
        const PathSampler side(shifted);

        switch (pick) {
            case 0:
            case 1:
                b.add_path_agent(AgentClass::Vehicle, false, side, margin + arc_offset,
                                 rng.uniform(4.0, 13.0), first_frame);
                break;
            case 2:
                b.add_path_agent(AgentClass::Bus, false, side, margin + arc_offset,
                                 rng.uniform(4.0, 11.0), first_frame);
                break;
            case 3:
                b.add_path_agent(AgentClass::Cyclist, false, side, margin + arc_offset,
                                 rng.uniform(3.0, 6.0), first_frame);
                break;
            case 4:
                b.add_path_agent(AgentClass::Pedestrian, false, side, margin + arc_offset,
                                 rng.uniform(0.8, 1.5), first_frame);
                break;
            default:
                b.add_static_agent(AgentClass::Static, start + arc_offset * u + shift,
                                   rng.uniform(-kPi, kPi));
                break;
        }
    }
    return std::move(b).finish();
}

SyntheticScenario make_curved(std::uint64_t seed) {
    SceneBuilder b(SyntheticKind::Curved, seed);
    Rng& rng = b.rng;

    const double radius = rng.uniform(30.0, 80.0);
    const double sign = rng.uniform_int(0, 1) == 0 ? 1.0 : -1.0;
    const double phi0 = rng.uniform(0.0, 2.0 * kPi);
    const double dt = b.sc.spec.timestep;
    const int total = b.sc.spec.total_frames();

    // The focal heading sweeps exactly 90 degrees over the track.
    const double dphi = (kPi / 2.0) / (total - 1);
    const double speed = radius * dphi / dt;

    // Sample the arc as a polyline with ~8 m chords, extended behind the
    // start and past the end so prediction look-ahead stays on the road.
    const double margin_behind = 30.0;
    const double margin_ahead = speed * 6.0 + 40.0;
    const double arc_start = phi0 - sign * margin_behind / radius;
    const double arc_total = margin_behind + radius * (kPi / 2.0) + margin_ahead;
    const int samples = std::max(2, static_cast<int>(std::ceil(arc_total / 8.0)) + 1);
    std::vector<PlanePoint> road;
    road.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double arc = arc_total * i / (samples - 1);
        road.push_back(radius * direction(arc_start + sign * arc / radius));
    }
    b.add_road(road);

    // The focal agent follows the exact circle rather than the chordal
    // road polyline; the two stay within a few decimeters of each other.
    const ScenarioSpec& spec = b.sc.spec;
    AgentTrack focal;
    focal.agent_id = b.next_agent_id();
    focal.cls = AgentClass::Vehicle;
    focal.focal = true;
    focal.states.assign(static_cast<std::size_t>(total), std::nullopt);
    std::vector<PlanePoint> future;
    for (int f = 0; f < total; ++f) {
        const double phi = phi0 + sign * dphi * f;
        const PlanePoint p = radius * direction(phi);
        focal.states[static_cast<std::size_t>(f)] =
            AgentState{p, wrap_angle(phi + sign * kPi / 2.0)};
        if (f >= spec.history_len) future.push_back(p);
    }
    b.gt.emplace(focal.agent_id, std::move(future));
    b.sc.tracks.push_back(std::move(focal));

    // A trailing vehicle on the same arc.
    const double trail_arc = rng.uniform(15.0, 30.0);
    const double trail_speed = speed * rng.uniform(0.85, 1.0);
    AgentTrack trail;
    trail.agent_id = b.next_agent_id();
    trail.cls = AgentClass::Vehicle;
    trail.states.assign(static_cast<std::size_t>(total), std::nullopt);
    std::vector<PlanePoint> trail_future;
    for (int f = 0; f < total; ++f) {
        const double phi = phi0 + sign * (trail_speed * dt * f - trail_arc) / radius;
        const PlanePoint p = radius * direction(phi);
        trail.states[static_cast<std::size_t>(f)] =
            AgentState{p, wrap_angle(phi + sign * kPi / 2.0)};
        if (f >= spec.history_len) trail_future.push_back(p);
    }
    b.gt.emplace(trail.agent_id, std::move(trail_future));
    b.sc.tracks.push_back(std::move(trail));

    if (rng.uniform_int(0, 1) == 1) {
        const double off_phi = phi0 + sign * rng.uniform(0.2, 0.9);
        b.add_static_agent(AgentClass::Pedestrian, (radius + 8.0) * direction(off_phi),
                           rng.uniform(-kPi, kPi));
    }
    return std::move(b).finish();
}

SyntheticScenario make_intersection(std::uint64_t seed) {
    SceneBuilder b(SyntheticKind::Intersection, seed);
    Rng& rng = b.rng;

    const PlanePoint junction{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const PlanePoint u = direction(theta);
    const PlanePoint n = direction(theta + kPi / 2.0);

    const double approach_len = 160.0;
    const double branch_len = 150.0;
    const double azimuths[3] = {
        theta + rng.uniform(-0.05, 0.05),              // straight on
        theta + kPi / 2.0 + rng.uniform(-0.12, 0.12),  // left turn
        theta - kPi / 2.0 + rng.uniform(-0.12, 0.12),  // right turn
    };

    // One approach way ending at the junction node, three branch ways
    // starting from it. All four share the stop-controlled node.
    const PlanePoint approach_start = junction - approach_len * u;
    const std::int64_t junction_node =
        b.add_node(junction, static_cast<unsigned>(Marker::StopSign));
    b.add_road({approach_start, junction}, {{1, junction_node}});
    std::vector<PlanePoint> branch_ends;
    for (const double az : azimuths) {
        const PlanePoint end = junction + branch_len * direction(az);
        branch_ends.push_back(end);
        b.add_road({junction, end}, {{0, junction_node}});
    }

    const double dt = b.sc.spec.timestep;
    const double speed = rng.uniform(6.0, 10.0);
    const double arrival_s = rng.uniform(5.5, 6.3);  // junction crossed mid-future
    const double arc0 = approach_len - speed * arrival_s;
    const int focal_branch = rng.uniform_int(0, 2);

    const PathSampler focal_path(
        {approach_start, junction, branch_ends[static_cast<std::size_t>(focal_branch)]});
    b.add_path_agent(AgentClass::Vehicle, true, focal_path, arc0, speed);

    // A second vehicle trails the focal agent and picks its own branch.
    const int trail_branch = rng.uniform_int(0, 2);
    const PathSampler trail_path(
        {approach_start, junction, branch_ends[static_cast<std::size_t>(trail_branch)]});
    b.add_path_agent(AgentClass::Vehicle, false, trail_path, arc0 - rng.uniform(18.0, 35.0),
                     speed * rng.uniform(0.8, 1.0));

    // A pedestrian walking near the junction, parallel to the cross road.
    const double side = rng.uniform_int(0, 1) == 0 ? 1.0 : -1.0;
    const PlanePoint walk_dir = side * n;
    const PlanePoint walk_start = junction - 8.0 * u - side * 12.0 * n;
    const double walk_speed = rng.uniform(0.8, 1.4);
    const PathSampler walk_path({walk_start, walk_start + 40.0 * walk_dir});
    b.add_path_agent(AgentClass::Pedestrian, false, walk_path, 0.0, walk_speed);

    return std::move(b).finish();
}

}  // namespace

SyntheticScenario synthesize_scenario(SyntheticKind kind, std::uint64_t seed) {
    switch (kind) {
        case SyntheticKind::Straight: return make_straight(seed);
        case SyntheticKind::Curved: return make_curved(seed);
        case SyntheticKind::Intersection: return make_intersection(seed);
    }
    throw Error("unknown synthetic scenario kind");
}

}  // namespace coarsemap
