#include "coarsemap/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "coarsemap/errors.hpp"
#include "coarsemap/geometry.hpp"

namespace coarsemap {

namespace {

struct ObservedState {
    int frame = 0;
    AgentState state;
};

/// Last `count` observed states within the history window, oldest first.
std::vector<ObservedState> history_tail(const AgentTrack& track, const ScenarioSpec& spec,
                                        int count) {
    std::vector<ObservedState> tail;
    const int end = std::min<int>(spec.history_len, static_cast<int>(track.states.size()));
    for (int f = end - 1; f >= 0 && static_cast<int>(tail.size()) < count; --f) {
        const auto& st = track.states[static_cast<std::size_t>(f)];
        if (st) tail.push_back({f, *st});
    }
    if (static_cast<int>(tail.size()) < count)
        throw InsufficientHistory("agent '" + track.agent_id + "' has " +
                                  std::to_string(tail.size()) + " observed history frames, needs " +
                                  std::to_string(count));
    std::reverse(tail.begin(), tail.end());
    return tail;
}

PredictionSet constant_velocity_core(const AgentTrack& track, const ScenarioSpec& spec) {
    const auto tail = history_tail(track, spec, 2);
    const ObservedState& a = tail[0];
    const ObservedState& b = tail[1];
    const double span = (b.frame - a.frame) * spec.timestep;
    const PlanePoint velocity = (1.0 / span) * (b.state.position - a.state.position);

    Prediction mode;
    mode.confidence = 1.0;
    mode.trajectory.reserve(static_cast<std::size_t>(spec.future_len));
    for (int g = spec.history_len; g < spec.total_frames(); ++g) {
        const double tau = (g - b.frame) * spec.timestep;
        mode.trajectory.push_back(b.state.position + tau * velocity);
    }
    return PredictionSet{track.agent_id, {std::move(mode)}};
}

// --- Road-network walk -------------------------------------------------

constexpr double kNodeMergeTolerance = 1e-6;  // meters

/// Assigns shared ids to chain points that coincide within the merge
/// tolerance, so ways that meet at a node become traversable junctions.
class NodeUnifier {
public:
    std::uint32_t find_or_add(PlanePoint p) {
        const auto bx = static_cast<std::int64_t>(std::floor(p.x / kCell));
        const auto by = static_cast<std::int64_t>(std::floor(p.y / kCell));
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = buckets_.find(key_of(bx + dx, by + dy));
                if (it == buckets_.end()) continue;
                for (const std::uint32_t id : it->second) {
                    if (distance(reps_[id], p) <= kNodeMergeTolerance) return id;
                }
            }
        }
        const auto id = static_cast<std::uint32_t>(reps_.size());
        reps_.push_back(p);
        buckets_[key_of(bx, by)].push_back(id);
        return id;
    }

    std::size_t size() const { return reps_.size(); }

private:
    static constexpr double kCell = 2.0 * kNodeMergeTolerance;

    static std::uint64_t key_of(std::int64_t bx, std::int64_t by) {
        return static_cast<std::uint64_t>(bx) * 0x9e3779b97f4a7c15ull +
               static_cast<std::uint64_t>(by) * 0xc2b2ae3d27d4eb4full;
    }

    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
    std::vector<PlanePoint> reps_;
};

struct NodeGraph {
    // point_node[chain][point] = unified node id.
    std::vector<std::vector<std::uint32_t>> point_node;
    // occurrences[node] = every (chain, point index) carrying that node.
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> occurrences;

    explicit NodeGraph(const std::vector<WayChain>& chains) {
        NodeUnifier unifier;
        point_node.resize(chains.size());
        for (std::size_t c = 0; c < chains.size(); ++c) {
            point_node[c].reserve(chains[c].points.size());
            for (std::size_t i = 0; i < chains[c].points.size(); ++i) {
                const std::uint32_t id = unifier.find_or_add(chains[c].points[i]);
                point_node[c].push_back(id);
                if (occurrences.size() <= id) occurrences.resize(id + 1);
                occurrences[id].push_back({static_cast<std::uint32_t>(c),
                                           static_cast<std::uint32_t>(i)});
            }
        }
    }
};

/// A traversal of chain edge `edge` (between points edge and edge+1),
/// in the given direction (+1 toward edge+1, -1 toward edge).
struct DirEdge {
    std::uint32_t chain = 0;
    std::uint32_t edge = 0;
    int dir = 1;

    bool operator==(const DirEdge&) const = default;
    auto operator<=>(const DirEdge&) const = default;
};

struct WalkEntry {
    double arc = 0.0;
    std::uint64_t seq = 0;  // insertion order; tie-break for determinism
    DirEdge last;
    std::vector<PlanePoint> points;
};

struct WalkEntryLater {
    bool operator()(const WalkEntry& a, const WalkEntry& b) const {
        if (a.arc != b.arc) return a.arc > b.arc;
        return a.seq > b.seq;
    }
};

/// Enumerates forward paths through the road network starting at the
/// snap point, breadth-first by arc length. A path completes once it
/// covers `target_arc` meters or hits a dead end. Returns at most
/// `max_paths` point sequences, each beginning at the snap point.
std::vector<std::vector<PlanePoint>> walk_paths(const VectorMap& map, const NodeGraph& graph,
                                                std::uint32_t chain, std::uint32_t edge,
                                                PlanePoint snap, int dir, double target_arc,
                                                int max_paths) {
    const std::vector<WayChain>& chains = map.chains();
    std::priority_queue<WalkEntry, std::vector<WalkEntry>, WalkEntryLater> frontier;
    std::uint64_t seq = 0;

    {
        WalkEntry first;
        const PlanePoint dest =
            chains[chain].points[dir > 0 ? edge + 1 : edge];
        first.arc = distance(snap, dest);
        first.seq = seq++;
        first.last = DirEdge{chain, edge, dir};
        first.points = {snap, dest};
        frontier.push(std::move(first));
    }

    std::vector<std::vector<PlanePoint>> paths;
    std::uint64_t expansions = 0;
    constexpr std::uint64_t kMaxExpansions = 1u << 20;

    while (!frontier.empty() && static_cast<int>(paths.size()) < max_paths &&
           expansions < kMaxExpansions) {
        ++expansions;
        WalkEntry entry = frontier.top();
        frontier.pop();

        if (entry.arc >= target_arc) {
            paths.push_back(std::move(entry.points));
            continue;
        }

        // Arrival point and its unified node.
        const std::uint32_t pi = entry.last.dir > 0 ? entry.last.edge + 1 : entry.last.edge;
        const std::uint32_t node = graph.point_node[entry.last.chain][pi];

        // All outgoing directed edges except the U-turn back along the
        // edge just traversed.
        const DirEdge reverse{entry.last.chain, entry.last.edge, -entry.last.dir};
        std::vector<DirEdge> next;
        for (const auto& [c2, j] : graph.occurrences[node]) {
            if (j + 1 < chains[c2].points.size()) {
                const DirEdge cand{c2, j, 1};
                if (cand != reverse) next.push_back(cand);
            }
            if (j >= 1) {
                const DirEdge cand{c2, j - 1, -1};
                if (cand != reverse) next.push_back(cand);
            }
        }
        std::sort(next.begin(), next.end());

        if (next.empty()) {
            paths.push_back(std::move(entry.points));  // dead end
            continue;
        }
        for (const DirEdge& cand : next) {
            const PlanePoint from = chains[cand.chain].points[cand.dir > 0 ? cand.edge
                                                                           : cand.edge + 1];
            const PlanePoint to = chains[cand.chain].points[cand.dir > 0 ? cand.edge + 1
                                                                         : cand.edge];
            WalkEntry child;
            child.arc = entry.arc + distance(from, to);
            child.seq = seq++;
            child.last = cand;
            child.points = entry.points;
            child.points.push_back(to);
            frontier.push(std::move(child));
        }
    }
    return paths;
}

/// Positions along a path at arc distances v * tau per future frame;
/// past the end of the path, continues straight along its final
/// direction (or `fallback_dir` if the path is degenerate).
std::vector<PlanePoint> sample_along(const std::vector<PlanePoint>& pts, double speed,
                                     int last_frame, const ScenarioSpec& spec,
                                     PlanePoint fallback_dir) {
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
    const double total = cum.back();

    PlanePoint ext = fallback_dir;
    for (std::size_t i = pts.size(); i-- > 1;) {
        const PlanePoint d = pts[i] - pts[i - 1];
        const double len = norm(d);
        if (len > 0.0) {
            ext = (1.0 / len) * d;
            break;
        }
    }

    std::vector<PlanePoint> out;
    out.reserve(static_cast<std::size_t>(spec.future_len));
    std::size_t seg = 1;
    for (int g = spec.history_len; g < spec.total_frames(); ++g) {
        const double s = speed * (g - last_frame) * spec.timestep;
        if (s >= total) {
            out.push_back(pts.back() + (s - total) * ext);
            continue;
        }
        while (seg + 1 < cum.size() && cum[seg] < s) ++seg;
        const double seg_len = cum[seg] - cum[seg - 1];
        const double t = seg_len > 0.0 ? (s - cum[seg - 1]) / seg_len : 0.0;
        out.push_back(pts[seg - 1] + t * (pts[seg] - pts[seg - 1]));
    }
    return out;
}

/// Chain index owning segment `seg` (chains partition the segment list).
std::size_t chain_of_segment(const std::vector<WayChain>& chains, std::uint32_t seg) {
    std::size_t lo = 0;
    std::size_t hi = chains.size();
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (chains[mid].first_segment <= seg) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

PredictionSet predict_constant_velocity(const AgentTrack& track, const ScenarioSpec& spec) {
    return constant_velocity_core(track, spec);
}

PredictionSet predict_constant_turn(const AgentTrack& track, const ScenarioSpec& spec) {
    const auto tail = history_tail(track, spec, 3);
    const PlanePoint p0 = tail[0].state.position;
    const PlanePoint p1 = tail[1].state.position;
    const PlanePoint p2 = tail[2].state.position;
    const PlanePoint chord1 = p1 - p0;
    const PlanePoint chord2 = p2 - p1;

    if (norm(chord1) == 0.0 || norm(chord2) == 0.0) return constant_velocity_core(track, spec);

    // Chord headings are tangent headings at the chord midpoints, so the
    // yaw rate is their difference over half the total frame span.
    const double h1 = std::atan2(chord1.y, chord1.x);
    const double h2 = std::atan2(chord2.y, chord2.x);
    const double mid_span = 0.5 * (tail[2].frame - tail[0].frame) * spec.timestep;
    const double omega = wrap_angle(h2 - h1) / mid_span;

    if (std::abs(omega) * spec.timestep < 1e-4) return constant_velocity_core(track, spec);

    // Chord length under-measures arc length on a turn; correct it, and
    // advance the mid-chord tangent heading to the last state.
    const double span2 = (tail[2].frame - tail[1].frame) * spec.timestep;
    const double half_turn = 0.5 * omega * span2;
    const double speed = (norm(chord2) / span2) * (half_turn / std::sin(half_turn));
    const double heading = h2 + half_turn;

    Prediction mode;
    mode.confidence = 1.0;
    mode.trajectory.reserve(static_cast<std::size_t>(spec.future_len));
    for (int g = spec.history_len; g < spec.total_frames(); ++g) {
        const double tau = (g - tail[2].frame) * spec.timestep;
        const double turned = heading + omega * tau;
        mode.trajectory.push_back(
            {p2.x + (speed / omega) * (std::sin(turned) - std::sin(heading)),
             p2.y - (speed / omega) * (std::cos(turned) - std::cos(heading))});
    }
    return PredictionSet{track.agent_id, {std::move(mode)}};
}

PredictionSet predict_map_following(const AgentTrack& track, const VectorMap& map,
                                    const ScenarioSpec& spec, int max_modes) {
    const auto tail = history_tail(track, spec, 2);
    const ObservedState& last = tail[1];
    const double span = (tail[1].frame - tail[0].frame) * spec.timestep;
    const double speed = distance(tail[1].state.position, tail[0].state.position) / span;

    const auto seg_idx = map.nearest_segment(last.state.position, kSnapDistanceMeters);
    if (!seg_idx) return constant_velocity_core(track, spec);

    const MapSegment& seg = map.segments()[*seg_idx];
    const PlanePoint axis = seg.end - seg.start;
    const double len2 = squared_norm(axis);
    const double t = len2 > 0.0
                         ? std::clamp(dot(last.state.position - seg.start, axis) / len2, 0.0, 1.0)
                         : 0.0;
    const PlanePoint snap = seg.start + t * axis;

    const PlanePoint head_dir{std::cos(last.state.heading), std::sin(last.state.heading)};
    const int dir = dot(head_dir, axis) >= 0.0 ? 1 : -1;

    const std::size_t chain = chain_of_segment(map.chains(), *seg_idx);
    const auto edge = static_cast<std::uint32_t>(*seg_idx - map.chains()[chain].first_segment);

    const NodeGraph graph(map.chains());
    const double target_arc = speed * spec.future_len * spec.timestep;
    const auto paths = walk_paths(map, graph, static_cast<std::uint32_t>(chain), edge, snap, dir,
                                  target_arc, max_modes);
    if (paths.empty()) return constant_velocity_core(track, spec);

    PredictionSet out;
    out.agent_id = track.agent_id;
    const double confidence = 1.0 / static_cast<double>(paths.size());
    for (const auto& path : paths) {
        Prediction mode;
        mode.confidence = confidence;
        mode.trajectory = sample_along(path, speed, last.frame, spec, head_dir);
        out.modes.push_back(std::move(mode));
    }
    return out;
}

// --- JSON round-trip ----------------------------------------------------

namespace {

using nlohmann::json;

json set_to_json(const PredictionSet& set) {
    json modes = json::array();
    for (const Prediction& mode : set.modes) {
        json points = json::array();
        for (const PlanePoint& p : mode.trajectory) points.push_back({{"x", p.x}, {"y", p.y}});
        modes.push_back({{"confidence", mode.confidence}, {"points", std::move(points)}});
    }
    return {{"agent_id", set.agent_id}, {"modes", std::move(modes)}};
}

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
    throw SchemaViolation(path + ": " + what);
}

PredictionSet set_from_json(const json& js, const std::string& path) {
    if (!js.is_object()) bad_field(path, "expected an object");
    PredictionSet set;
    const auto id = js.find("agent_id");
    if (id == js.end() || !id->is_string()) bad_field(path + ".agent_id", "expected a string");
    set.agent_id = id->get<std::string>();

    const auto modes = js.find("modes");
    if (modes == js.end() || !modes->is_array()) bad_field(path + ".modes", "expected an array");
    for (std::size_t m = 0; m < modes->size(); ++m) {
        const std::string mpath = path + ".modes[" + std::to_string(m) + "]";
        const json& jm = (*modes)[m];
        if (!jm.is_object()) bad_field(mpath, "expected an object");
        Prediction mode;
        const auto conf = jm.find("confidence");
        if (conf == jm.end() || !conf->is_number())
            bad_field(mpath + ".confidence", "expected a number");
        mode.confidence = conf->get<double>();
        const auto points = jm.find("points");
        if (points == jm.end() || !points->is_array())
            bad_field(mpath + ".points", "expected an array");
        for (std::size_t i = 0; i < points->size(); ++i) {
            const std::string ppath = mpath + ".points[" + std::to_string(i) + "]";
            const json& jp = (*points)[i];
            if (!jp.is_object() || !jp.contains("x") || !jp.contains("y") ||
                !jp["x"].is_number() || !jp["y"].is_number())
                bad_field(ppath, "expected an object with numeric x and y");
            mode.trajectory.push_back({jp["x"].get<double>(), jp["y"].get<double>()});
        }
        set.modes.push_back(std::move(mode));
    }
    return set;
}

}  // namespace

std::string to_prediction_json(const ScenarioPredictions& predictions) {
    json sets = json::array();
    for (const PredictionSet& set : predictions.sets) sets.push_back(set_to_json(set));
    const json doc = {{"scenario_id", predictions.scenario_id},
                      {"predictor", predictions.predictor},
                      {"sets", std::move(sets)}};
    return doc.dump(2) + "\n";
}

PredictionSet prediction_set_from_json(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw SchemaViolation(std::string("root: invalid JSON: ") + err.what());
    }
    return set_from_json(doc, "root");
}

ScenarioPredictions from_prediction_json(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw SchemaViolation(std::string("root: invalid JSON: ") + err.what());
    }
    if (!doc.is_object()) bad_field("root", "expected an object");
    ScenarioPredictions out;
    const auto id = doc.find("scenario_id");
    if (id == doc.end() || !id->is_string()) bad_field("root.scenario_id", "expected a string");
    out.scenario_id = id->get<std::string>();
    const auto pred = doc.find("predictor");
    if (pred == doc.end() || !pred->is_string()) bad_field("root.predictor", "expected a string");
    out.predictor = pred->get<std::string>();
    const auto sets = doc.find("sets");
    if (sets == doc.end() || !sets->is_array()) bad_field("root.sets", "expected an array");
    for (std::size_t i = 0; i < sets->size(); ++i)
        out.sets.push_back(set_from_json((*sets)[i], "root.sets[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace coarsemap
