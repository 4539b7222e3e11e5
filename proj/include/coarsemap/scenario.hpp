#ifndef COARSEMAP_SCENARIO_HPP
#define COARSEMAP_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coarsemap/geodesy.hpp"
#include "coarsemap/osm.hpp"

namespace coarsemap {

/// Fixed temporal layout of a scene: 11 seconds sampled at 10 Hz, split
/// into 5 s of observed history and 6 s of future to predict.
struct ScenarioSpec {
    double timestep = 0.1;  // seconds between frames
    int history_len = 50;   // observed frames (indices 0..49)
    int future_len = 60;    // frames to predict (indices 50..109)
    int max_modes = 6;      // largest allowed prediction multi-modality

    int total_frames() const { return history_len + future_len; }

    bool operator==(const ScenarioSpec&) const = default;
};

enum class AgentClass {
    Vehicle,
    Pedestrian,
    Motorcyclist,
    Cyclist,
    Bus,
    Static,
    Background,
    Construction,
    RiderlessBicycle,
    Unknown,
};

inline constexpr int kAgentClassCount = 10;

/// Canonical lower-case identifier used in scene files and reports.
std::string_view to_string(AgentClass cls);

/// Inverse of to_string; empty optional for unrecognized names.
std::optional<AgentClass> agent_class_from_string(std::string_view name);

/// Pose of one agent in one frame, in local plane coordinates.
struct AgentState {
    PlanePoint position;
    double heading = 0.0;  // radians in (-pi, pi], CCW from +x

    bool operator==(const AgentState&) const = default;
};

/// One agent's track across all frames. `states` always has
/// spec.total_frames() slots; frames where the agent was not observed
/// hold nullopt.
struct AgentTrack {
    std::string agent_id;
    AgentClass cls = AgentClass::Unknown;
    bool focal = false;
    std::vector<std::optional<AgentState>> states;

    /// Index of the last observed frame strictly before `frame_end`.
    std::optional<int> last_observed_before(int frame_end) const;

    /// Number of observed frames in [0, frame_end).
    int observed_count_before(int frame_end) const;
};

/// A fully loaded scene: local projection frame plus agent tracks.
/// Exactly one track has focal == true.
struct Scenario {
    std::string scenario_id;
    LocalFrame frame;
    ScenarioSpec spec;
    std::vector<AgentTrack> tracks;

    const AgentTrack& focal_track() const;
};

/// Parses a scene from its JSON representation.
///
/// Throws SchemaViolation (message names the offending field path) on
/// structural problems, NoFocalAgent / DuplicateFocal when the focal
/// marker count is not exactly one.
Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Serializes a scene to JSON. load_scenario(save_scenario(s)) holds
/// the same poses bit-for-bit.
std::string save_scenario(const Scenario& scenario);
void save_scenario_file(const Scenario& scenario, const std::filesystem::path& path);

enum class SyntheticKind { Straight, Curved, Intersection };

std::string_view to_string(SyntheticKind kind);
std::optional<SyntheticKind> synthetic_kind_from_string(std::string_view name);

/// A generated scene bundled with the road network it was built on and
/// the exact future positions each agent will take (frames
/// history_len..total_frames-1, in order).
struct SyntheticScenario {
    Scenario scenario;
    OsmGraph graph;
    std::map<std::string, std::vector<PlanePoint>> ground_truth;
};

/// Deterministically generates a scene of the requested shape. The same
/// (kind, seed) pair always yields byte-identical output; different
/// seeds vary geometry, speeds, and agent mix.
///
/// - Straight: agents drive a straight road at constant speed.
/// - Curved: the focal agent follows a circular arc, turning 90 degrees
///   in total over the track.
/// - Intersection: three branches meet at a stop-controlled junction
///   node; the focal agent crosses it during the future horizon.
SyntheticScenario synthesize_scenario(SyntheticKind kind, std::uint64_t seed);

}  // namespace coarsemap

#endif
