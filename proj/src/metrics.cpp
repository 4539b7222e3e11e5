#include "coarsemap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coarsemap/errors.hpp"
#include "coarsemap/geometry.hpp"

namespace coarsemap {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Permutation-invariant mean: summing in sorted order makes the result
/// bit-identical regardless of input order.
double stable_mean(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

MetricResult evaluate_agent(const PredictionSet& prediction,
                            const std::vector<PlanePoint>& ground_truth) {
    if (prediction.modes.empty())
        throw EmptyResults("agent '" + prediction.agent_id + "' has no prediction modes");
    if (ground_truth.empty())
        throw EmptyResults("agent '" + prediction.agent_id + "' has no ground-truth points");

    const std::size_t frames = ground_truth.size();
    MetricResult best;
    bool have_best = false;
    double best_fde = std::numeric_limits<double>::infinity();
    for (const Prediction& mode : prediction.modes) {
        if (mode.trajectory.size() != frames)
            throw LengthMismatch("agent '" + prediction.agent_id + "': mode has " +
                                 std::to_string(mode.trajectory.size()) +
                                 " points but ground truth has " + std::to_string(frames));
        std::vector<double> de(frames);
        double sum = 0.0;
        for (std::size_t i = 0; i < frames; ++i) {
            de[i] = distance(mode.trajectory[i], ground_truth[i]);
            sum += de[i];
        }
        const double ade = sum / static_cast<double>(frames);
        best_fde = std::min(best_fde, de.back());
        if (!have_best || ade < best.min_ade) {
            best.min_ade = ade;
            best.per_frame_de = std::move(de);
            have_best = true;
        }
    }
    best.min_fde = best_fde;
    best.missed = best.min_fde > kMissThresholdMeters;
    return best;
}

std::string_view to_string(RoadContext context) {
    switch (context) {
        case RoadContext::Straight: return "straight";
        case RoadContext::Curved: return "curved";
        case RoadContext::Intersection: return "intersection";
    }
    return "straight";
}

std::optional<RoadContext> road_context_from_string(std::string_view name) {
    if (name == "straight") return RoadContext::Straight;
    if (name == "curved") return RoadContext::Curved;
    if (name == "intersection") return RoadContext::Intersection;
    return std::nullopt;
}

RoadContext classify_context(const std::vector<PlanePoint>& ground_truth, const VectorMap& map,
                             double intersection_distance, double curve_threshold_deg,
                             double stationary_threshold) {
    if (ground_truth.empty())
        throw EmptyResults("cannot classify an empty ground-truth trajectory");

    for (const PlanePoint& p : ground_truth) {
        for (const std::uint32_t idx : map.radius_indices(p, intersection_distance)) {
            if (map.segments()[idx].is_intersection) return RoadContext::Intersection;
        }
    }

    if (distance(ground_truth.front(), ground_truth.back()) < stationary_threshold)
        return RoadContext::Straight;

    double accumulated = 0.0;
    bool have_prev = false;
    double prev_heading = 0.0;
    for (std::size_t i = 1; i < ground_truth.size(); ++i) {
        const PlanePoint step = ground_truth[i] - ground_truth[i - 1];
        if (norm(step) == 0.0) continue;
        const double heading = std::atan2(step.y, step.x);
        if (have_prev) accumulated += std::abs(wrap_angle(heading - prev_heading));
        prev_heading = heading;
        have_prev = true;
    }
    if (accumulated > curve_threshold_deg * kPi / 180.0) return RoadContext::Curved;
    return RoadContext::Straight;
}

namespace {

struct GroupAccumulator {
    std::vector<double> ades;
    std::vector<double> fdes;
    std::size_t missed = 0;

    void add(const MetricResult& r) {
        ades.push_back(r.min_ade);
        fdes.push_back(r.min_fde);
        if (r.missed) ++missed;
    }

    GroupStats stats() const {
        GroupStats s;
        s.count = ades.size();
        s.min_ade = stable_mean(ades);
        s.min_fde = stable_mean(fdes);
        s.miss_rate = static_cast<double>(missed) / static_cast<double>(ades.size());
        return s;
    }
};

}  // namespace

EvaluationReport aggregate(const std::vector<EvaluatedAgent>& agents) {
    if (agents.empty()) throw EmptyResults("no agent results to aggregate");

    const std::size_t frames = agents.front().result.per_frame_de.size();
    GroupAccumulator overall;
    std::map<AgentClass, GroupAccumulator> per_class;
    std::map<RoadContext, GroupAccumulator> per_context;
    for (const EvaluatedAgent& agent : agents) {
        if (agent.result.per_frame_de.size() != frames)
            throw LengthMismatch("per-frame error vectors disagree: " +
                                 std::to_string(agent.result.per_frame_de.size()) + " vs " +
                                 std::to_string(frames));
        overall.add(agent.result);
        per_class[agent.cls].add(agent.result);
        per_context[agent.context].add(agent.result);
    }

    EvaluationReport report;
    report.overall = overall.stats();
    for (const auto& [cls, acc] : per_class) report.per_class.emplace(cls, acc.stats());
    for (const auto& [ctx, acc] : per_context) report.per_context.emplace(ctx, acc.stats());

    report.per_frame.resize(frames);
    std::vector<double> column(agents.size());
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t i = 0; i < agents.size(); ++i)
            column[i] = agents[i].result.per_frame_de[f];
        report.per_frame[f] = stable_mean(column);
    }
    return report;
}

}  // namespace coarsemap
