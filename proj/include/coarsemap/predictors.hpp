#ifndef COARSEMAP_PREDICTORS_HPP
#define COARSEMAP_PREDICTORS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "coarsemap/geodesy.hpp"
#include "coarsemap/scenario.hpp"
#include "coarsemap/vector_map.hpp"

namespace coarsemap {

/// One candidate future: a position per future frame, in order, plus the
/// probability mass assigned to this mode.
struct Prediction {
    std::vector<PlanePoint> trajectory;
    double confidence = 1.0;
};

/// All modes predicted for one agent. Confidences sum to 1.
struct PredictionSet {
    std::string agent_id;
    std::vector<Prediction> modes;
};

/// Extrapolates the velocity between the agent's last two observed
/// history states. Single mode. Throws InsufficientHistory when fewer
/// than two history frames are observed.
PredictionSet predict_constant_velocity(const AgentTrack& track, const ScenarioSpec& spec);

/// Constant turn rate and speed: estimates yaw rate and speed from the
/// last three observed history states and rolls the turn forward. Falls
/// back to the constant-velocity extrapolation when the estimated yaw
/// rate is below 1e-4 rad per frame. Single mode. Throws
/// InsufficientHistory when fewer than three history frames are observed.
PredictionSet predict_constant_turn(const AgentTrack& track, const ScenarioSpec& spec);

/// Snaps the agent to the nearest map segment (within 25 m) and walks
/// the road network forward at the agent's recent arc speed,
/// enumerating one mode per reachable path, breadth-first by arc
/// length, up to max_modes. Paths end once they cover 6 s of travel
/// (dead ends are extended linearly). Modes share uniform confidence.
/// Falls back to the constant-velocity extrapolation when no segment
/// lies within 25 m. Throws InsufficientHistory when fewer than two
/// history frames are observed.
PredictionSet predict_map_following(const AgentTrack& track, const VectorMap& map,
                                    const ScenarioSpec& spec, int max_modes = 6);

/// Maximum snap distance from agent to road for map-following (meters).
inline constexpr double kSnapDistanceMeters = 25.0;

/// Predictions for every evaluated agent of one scenario, as stored on
/// disk by the prediction stage.
struct ScenarioPredictions {
    std::string scenario_id;
    std::string predictor;
    std::vector<PredictionSet> sets;
};

/// JSON round-trip for a scenario's predictions ({"scenario_id",
/// "predictor", "sets": [{"agent_id", "modes": [{"confidence",
/// "points": [{"x","y"}...]}...]}...]}).
std::string to_prediction_json(const ScenarioPredictions& predictions);
PredictionSet prediction_set_from_json(std::string_view json_text);
ScenarioPredictions from_prediction_json(std::string_view json_text);

}  // namespace coarsemap

#endif
