#ifndef COARSEMAP_METRICS_HPP
#define COARSEMAP_METRICS_HPP

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "coarsemap/predictors.hpp"
#include "coarsemap/scenario.hpp"
#include "coarsemap/vector_map.hpp"

namespace coarsemap {

/// A prediction misses when its best-mode final displacement exceeds
/// this distance.
inline constexpr double kMissThresholdMeters = 2.0;

/// Multi-modal displacement metrics for one agent.
struct MetricResult {
    double min_ade = 0.0;  // best mode's mean per-frame displacement
    double min_fde = 0.0;  // best mode's final-frame displacement
    bool missed = false;   // min_fde > kMissThresholdMeters
    // Per-frame displacement of the mode with the lowest ADE.
    std::vector<double> per_frame_de;
};

/// Compares every mode to the ground-truth future and keeps the best.
/// minADE and minFDE are minimized independently; per_frame_de follows
/// the mode that wins on ADE (ties: lowest mode index).
///
/// Throws EmptyResults when there are no modes or no ground-truth
/// points, LengthMismatch when a mode's length differs from the
/// ground truth's.
MetricResult evaluate_agent(const PredictionSet& prediction,
                            const std::vector<PlanePoint>& ground_truth);

/// Road geometry the agent actually drove through, used to slice
/// metrics by situation difficulty.
enum class RoadContext { Straight, Curved, Intersection };

inline constexpr int kRoadContextCount = 3;

std::string_view to_string(RoadContext context);
std::optional<RoadContext> road_context_from_string(std::string_view name);

/// Classifies the ground-truth future against the map:
/// - Intersection: any point within `intersection_distance` of a
///   flagged segment midpoint.
/// - Straight: otherwise, when net displacement is under
///   `stationary_threshold` (heading noise would dominate).
/// - Curved: otherwise, when accumulated direction change exceeds
///   `curve_threshold_deg`.
/// - Straight: everything else.
RoadContext classify_context(const std::vector<PlanePoint>& ground_truth, const VectorMap& map,
                             double intersection_distance = 10.0,
                             double curve_threshold_deg = 15.0,
                             double stationary_threshold = 1.0);

/// One evaluated agent, tagged for the breakdowns.
struct EvaluatedAgent {
    AgentClass cls = AgentClass::Unknown;
    RoadContext context = RoadContext::Straight;
    MetricResult result;
};

/// Mean metrics over a group of agents.
struct GroupStats {
    std::size_t count = 0;
    double min_ade = 0.0;
    double min_fde = 0.0;
    double miss_rate = 0.0;
};

/// Full evaluation summary: overall means, per-frame error curve, and
/// per-class / per-context breakdowns.
struct EvaluationReport {
    GroupStats overall;
    std::vector<double> per_frame;
    std::map<AgentClass, GroupStats> per_class;
    std::map<RoadContext, GroupStats> per_context;
};

/// Averages agent results into a report. Sums are accumulated in sorted
/// order, so the report is bit-identical under any permutation of the
/// input. Throws EmptyResults on empty input and LengthMismatch when
/// per-frame vectors disagree in length.
EvaluationReport aggregate(const std::vector<EvaluatedAgent>& agents);

}  // namespace coarsemap

#endif
