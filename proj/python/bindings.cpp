#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "coarsemap/errors.hpp"
#include "coarsemap/fetch.hpp"
#include "coarsemap/geodesy.hpp"
#include "coarsemap/geometry.hpp"
#include "coarsemap/metrics.hpp"
#include "coarsemap/osm.hpp"
#include "coarsemap/pipeline.hpp"
#include "coarsemap/predictors.hpp"
#include "coarsemap/report.hpp"
#include "coarsemap/scenario.hpp"
#include "coarsemap/vector_map.hpp"

namespace py = pybind11;
using namespace coarsemap;

namespace {

std::string repr_point(const PlanePoint& p) {
    std::ostringstream os;
    os << "PlanePoint(x=" << p.x << ", y=" << p.y << ")";
    return os.str();
}

std::string repr_geo(const GeoPoint& g) {
    std::ostringstream os;
    os << "GeoPoint(lat=" << g.lat << ", lon=" << g.lon << ")";
    return os.str();
}

template <typename Fn>
py::tuple run_command(Fn fn, const RunConfig& config) {
    std::ostringstream os;
    const int rc = fn(config, os);
    return py::make_tuple(rc, os.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Vectorized OSM road scenes and trajectory predictor evaluation";
    m.attr("__version__") = "0.1.0";

    // Exceptions: the base is registered first so derived classes
    // (registered afterwards) are matched before it.
    const auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<MalformedXml>(m, "MalformedXml", error);
    py::register_exception<MissingCoordinate>(m, "MissingCoordinate", error);
    py::register_exception<OutOfExtent>(m, "OutOfExtent", error);
    py::register_exception<DegenerateLatitude>(m, "DegenerateLatitude", error);
    py::register_exception<EmptyTracks>(m, "EmptyTracks", error);
    py::register_exception<DegeneratePolyline>(m, "DegeneratePolyline", error);
    py::register_exception<SchemaViolation>(m, "SchemaViolation", error);
    py::register_exception<NoFocalAgent>(m, "NoFocalAgent", error);
    py::register_exception<DuplicateFocal>(m, "DuplicateFocal", error);
    py::register_exception<NetworkFailure>(m, "NetworkFailure", error);
    py::register_exception<ServerError>(m, "ServerError", error);
    py::register_exception<InsufficientHistory>(m, "InsufficientHistory", error);
    py::register_exception<LengthMismatch>(m, "LengthMismatch", error);
    py::register_exception<EmptyResults>(m, "EmptyResults", error);

    // --- geodesy ---------------------------------------------------------
    py::class_<GeoPoint>(m, "GeoPoint")
        .def(py::init<>())
        .def(py::init([](double lat, double lon) { return GeoPoint{lat, lon}; }),
             py::arg("lat"), py::arg("lon"))
        .def_readwrite("lat", &GeoPoint::lat)
        .def_readwrite("lon", &GeoPoint::lon)
        .def("__repr__", &repr_geo);

    py::class_<PlanePoint>(m, "PlanePoint")
        .def(py::init<>())
        .def(py::init([](double x, double y) { return PlanePoint{x, y}; }), py::arg("x"),
             py::arg("y"))
        .def_readwrite("x", &PlanePoint::x)
        .def_readwrite("y", &PlanePoint::y)
        .def("__repr__", &repr_point);

    py::class_<LocalFrame>(m, "LocalFrame")
        .def(py::init<>())
        .def(py::init([](GeoPoint origin) {
                 LocalFrame f;
                 f.origin = origin;
                 return f;
             }),
             py::arg("origin"))
        .def_readwrite("origin", &LocalFrame::origin)
        .def_readwrite("earth_radius", &LocalFrame::earth_radius);

    m.def("to_plane", &to_plane, py::arg("frame"), py::arg("point"),
          "Project a geographic point into the local plane.");
    m.def("to_geo", &to_geo, py::arg("frame"), py::arg("point"),
          "Invert the local-plane projection.");
    m.def("track_bbox", &track_bbox, py::arg("frame"), py::arg("tracks"), py::arg("pad"),
          "Padded geographic bounding box around plane-space tracks.");

    // --- OSM ---------------------------------------------------------------
    py::enum_<Marker>(m, "Marker")
        .value("StopSign", Marker::StopSign)
        .value("TrafficSignal", Marker::TrafficSignal);

    py::class_<OsmNode>(m, "OsmNode")
        .def(py::init<>())
        .def_readwrite("id", &OsmNode::id)
        .def_readwrite("lat", &OsmNode::lat)
        .def_readwrite("lon", &OsmNode::lon)
        .def_readwrite("markers", &OsmNode::markers)
        .def("has_marker", &OsmNode::has_marker);

    py::class_<OsmWay>(m, "OsmWay")
        .def(py::init<>())
        .def_readwrite("id", &OsmWay::id)
        .def_readwrite("node_refs", &OsmWay::node_refs)
        .def_readwrite("is_road", &OsmWay::is_road);

    py::class_<OsmGraph>(m, "OsmGraph")
        .def(py::init<>())
        .def_readwrite("nodes", &OsmGraph::nodes)
        .def_readwrite("ways", &OsmGraph::ways);

    m.def(
        "parse_osm_xml", [](std::string_view xml) { return parse_osm_xml(xml, nullptr); },
        py::arg("xml"), "Parse OSM XML into a graph (dropping broken references).");
    m.def(
        "parse_osm_file",
        [](const std::filesystem::path& path) { return parse_osm_file(path, nullptr); },
        py::arg("path"));
    m.def("serialize_osm_xml", &serialize_osm_xml, py::arg("graph"));
    m.def("filter_roads", &filter_roads, py::arg("graph"),
          "Keep road ways, their nodes, and marker nodes.");

    // --- vector map ---------------------------------------------------------
    py::class_<MapSegment>(m, "MapSegment")
        .def(py::init<>())
        .def_readwrite("start", &MapSegment::start)
        .def_readwrite("end", &MapSegment::end)
        .def_readwrite("is_intersection", &MapSegment::is_intersection)
        .def_readwrite("source_way", &MapSegment::source_way)
        .def("midpoint", &MapSegment::midpoint);

    py::class_<VectorMap>(m, "VectorMap")
        .def(py::init<>())
        .def_static("from_segments", &VectorMap::from_segments, py::arg("segments"),
                    py::arg("origin"), py::arg("spacing"))
        .def_property_readonly("segments", [](const VectorMap& v) { return v.segments(); })
        .def("empty", &VectorMap::empty)
        .def_property_readonly("origin", &VectorMap::origin)
        .def_property_readonly("spacing", &VectorMap::spacing)
        .def("radius_indices", &VectorMap::radius_indices, py::arg("center"), py::arg("radius"))
        .def("nearest_segment", &VectorMap::nearest_segment, py::arg("point"),
             py::arg("max_distance"))
        .def("__len__", [](const VectorMap& v) { return v.segments().size(); });

    m.def("interpolate_way", &interpolate_way, py::arg("polyline"), py::arg("spacing"),
          "Resample a polyline into uniform arc-length gaps.");
    m.def(
        "build_vector_map",
        [](const OsmGraph& graph, const LocalFrame& frame, double spacing,
           double intersection_radius) {
            return build_vector_map(graph, frame, spacing, intersection_radius, nullptr);
        },
        py::arg("graph"), py::arg("frame"), py::arg("spacing") = 1.5,
        py::arg("intersection_radius") = 10.0);
    m.def("extract_receptive_field", &extract_receptive_field, py::arg("map"),
          py::arg("center"), py::arg("radius"));

    py::class_<RelativeScene::Segment>(m, "RelativeSegment")
        .def_readwrite("start", &RelativeScene::Segment::start)
        .def_readwrite("end", &RelativeScene::Segment::end)
        .def_readwrite("is_intersection", &RelativeScene::Segment::is_intersection);

    py::class_<RelativeScene>(m, "RelativeScene")
        .def_readwrite("segments", &RelativeScene::segments)
        .def_readwrite("anchor_position", &RelativeScene::anchor_position)
        .def_readwrite("anchor_heading", &RelativeScene::anchor_heading)
        .def("to_absolute", &RelativeScene::to_absolute);

    m.def("to_relative", &to_relative, py::arg("segments"), py::arg("anchor_position"),
          py::arg("anchor_heading"));

    m.def("to_segment_text", &to_segment_text, py::arg("map"));
    m.def("from_segment_text", &from_segment_text, py::arg("text"));
    m.def("save_segment_file", &save_segment_file, py::arg("map"), py::arg("path"));
    m.def("load_segment_file", &load_segment_file, py::arg("path"));

    // --- scenarios ---------------------------------------------------------
    py::enum_<AgentClass>(m, "AgentClass")
        .value("Vehicle", AgentClass::Vehicle)
        .value("Pedestrian", AgentClass::Pedestrian)
        .value("Motorcyclist", AgentClass::Motorcyclist)
        .value("Cyclist", AgentClass::Cyclist)
        .value("Bus", AgentClass::Bus)
        .value("Static", AgentClass::Static)
        .value("Background", AgentClass::Background)
        .value("Construction", AgentClass::Construction)
        .value("RiderlessBicycle", AgentClass::RiderlessBicycle)
        .value("Unknown", AgentClass::Unknown);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("timestep", &ScenarioSpec::timestep)
        .def_readwrite("history_len", &ScenarioSpec::history_len)
        .def_readwrite("future_len", &ScenarioSpec::future_len)
        .def_readwrite("max_modes", &ScenarioSpec::max_modes)
        .def("total_frames", &ScenarioSpec::total_frames);

    py::class_<AgentState>(m, "AgentState")
        .def(py::init<>())
        .def(py::init([](PlanePoint pos, double heading) {
                 return AgentState{pos, heading};
             }),
             py::arg("position"), py::arg("heading"))
        .def_readwrite("position", &AgentState::position)
        .def_readwrite("heading", &AgentState::heading);

    py::class_<AgentTrack>(m, "AgentTrack")
        .def(py::init<>())
        .def_readwrite("agent_id", &AgentTrack::agent_id)
        .def_readwrite("cls", &AgentTrack::cls)
        .def_readwrite("focal", &AgentTrack::focal)
        .def_readwrite("states", &AgentTrack::states)
        .def("last_observed_before", &AgentTrack::last_observed_before)
        .def("observed_count_before", &AgentTrack::observed_count_before);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("scenario_id", &Scenario::scenario_id)
        .def_readwrite("frame", &Scenario::frame)
        .def_readwrite("spec", &Scenario::spec)
        .def_readwrite("tracks", &Scenario::tracks)
        .def("focal_track", &Scenario::focal_track, py::return_value_policy::copy);

    m.def("load_scenario", &load_scenario, py::arg("json_text"));
    m.def("load_scenario_file", &load_scenario_file, py::arg("path"));
    m.def("save_scenario", &save_scenario, py::arg("scenario"));
    m.def("save_scenario_file", &save_scenario_file, py::arg("scenario"), py::arg("path"));

    py::enum_<SyntheticKind>(m, "SyntheticKind")
        .value("Straight", SyntheticKind::Straight)
        .value("Curved", SyntheticKind::Curved)
        .value("Intersection", SyntheticKind::Intersection);

    py::class_<SyntheticScenario>(m, "SyntheticScenario")
        .def_readwrite("scenario", &SyntheticScenario::scenario)
        .def_readwrite("graph", &SyntheticScenario::graph)
        .def_readwrite("ground_truth", &SyntheticScenario::ground_truth);

    m.def("synthesize_scenario", &synthesize_scenario, py::arg("kind"), py::arg("seed"),
          "Deterministically generate a scene, its road graph, and ground truth.");

    // --- predictors ---------------------------------------------------------
    py::class_<Prediction>(m, "Prediction")
        .def(py::init<>())
        .def_readwrite("trajectory", &Prediction::trajectory)
        .def_readwrite("confidence", &Prediction::confidence);

    py::class_<PredictionSet>(m, "PredictionSet")
        .def(py::init<>())
        .def_readwrite("agent_id", &PredictionSet::agent_id)
        .def_readwrite("modes", &PredictionSet::modes);

    py::class_<ScenarioPredictions>(m, "ScenarioPredictions")
        .def(py::init<>())
        .def_readwrite("scenario_id", &ScenarioPredictions::scenario_id)
        .def_readwrite("predictor", &ScenarioPredictions::predictor)
        .def_readwrite("sets", &ScenarioPredictions::sets);

    m.def("predict_constant_velocity", &predict_constant_velocity, py::arg("track"),
          py::arg("spec"));
    m.def("predict_constant_turn", &predict_constant_turn, py::arg("track"), py::arg("spec"));
    m.def("predict_map_following", &predict_map_following, py::arg("track"), py::arg("map"),
          py::arg("spec"), py::arg("max_modes") = 6);
    m.def("to_prediction_json", &to_prediction_json, py::arg("predictions"));
    m.def("from_prediction_json", &from_prediction_json, py::arg("json_text"));

    // --- metrics -------------------------------------------------------------
    py::class_<MetricResult>(m, "MetricResult")
        .def(py::init<>())
        .def_readwrite("min_ade", &MetricResult::min_ade)
        .def_readwrite("min_fde", &MetricResult::min_fde)
        .def_readwrite("missed", &MetricResult::missed)
        .def_readwrite("per_frame_de", &MetricResult::per_frame_de);

    py::enum_<RoadContext>(m, "RoadContext")
        .value("Straight", RoadContext::Straight)
        .value("Curved", RoadContext::Curved)
        .value("Intersection", RoadContext::Intersection);

    py::class_<EvaluatedAgent>(m, "EvaluatedAgent")
        .def(py::init<>())
        .def_readwrite("cls", &EvaluatedAgent::cls)
        .def_readwrite("context", &EvaluatedAgent::context)
        .def_readwrite("result", &EvaluatedAgent::result);

    py::class_<GroupStats>(m, "GroupStats")
        .def(py::init<>())
        .def_readwrite("count", &GroupStats::count)
        .def_readwrite("min_ade", &GroupStats::min_ade)
        .def_readwrite("min_fde", &GroupStats::min_fde)
        .def_readwrite("miss_rate", &GroupStats::miss_rate);

    py::class_<EvaluationReport>(m, "EvaluationReport")
        .def(py::init<>())
        .def_readwrite("overall", &EvaluationReport::overall)
        .def_readwrite("per_frame", &EvaluationReport::per_frame)
        .def_readwrite("per_class", &EvaluationReport::per_class)
        .def_readwrite("per_context", &EvaluationReport::per_context);

    m.def("evaluate_agent", &evaluate_agent, py::arg("prediction"), py::arg("ground_truth"));
    m.def("classify_context", &classify_context, py::arg("ground_truth"), py::arg("map"),
          py::arg("intersection_distance") = 10.0, py::arg("curve_threshold_deg") = 15.0,
          py::arg("stationary_threshold") = 1.0);
    m.def("aggregate", &aggregate, py::arg("agents"));

    m.def("aggregate_csv", &aggregate_csv);
    m.def("per_class_csv", &per_class_csv);
    m.def("per_context_csv", &per_context_csv);
    m.def("per_frame_csv", &per_frame_csv, py::arg("report"), py::arg("timestep"));

    // --- pipeline -------------------------------------------------------------
    py::enum_<PredictorKind>(m, "PredictorKind")
        .value("ConstantVelocity", PredictorKind::ConstantVelocity)
        .value("ConstantTurn", PredictorKind::ConstantTurn)
        .value("MapFollowing", PredictorKind::MapFollowing);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("scenarios", &RunConfig::scenarios)
        .def_readwrite("map_dir", &RunConfig::map_dir)
        .def_readwrite("cache_dir", &RunConfig::cache_dir)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("predictions", &RunConfig::predictions)
        .def_readwrite("tables", &RunConfig::tables)
        .def_readwrite("endpoint", &RunConfig::endpoint)
        .def_readwrite("predictor", &RunConfig::predictor)
        .def_readwrite("receptive_field", &RunConfig::receptive_field)
        .def_readwrite("spacing", &RunConfig::spacing)
        .def_readwrite("intersection_radius", &RunConfig::intersection_radius)
        .def_readwrite("modes", &RunConfig::modes)
        .def_readwrite("jobs", &RunConfig::jobs);

    m.def("bbox_cache_key", &bbox_cache_key, py::arg("endpoint"), py::arg("bbox"));
    m.def("overpass_query_url", &overpass_query_url, py::arg("endpoint"), py::arg("bbox"));

    m.def(
        "run_preprocess",
        [](const RunConfig& cfg) { return run_command(cmd_preprocess, cfg); },
        py::arg("config"), "Run the preprocess stage; returns (exit_code, log_text).");
    m.def(
        "run_predict", [](const RunConfig& cfg) { return run_command(cmd_predict, cfg); },
        py::arg("config"), "Run the predict stage; returns (exit_code, log_text).");
    m.def(
        "run_evaluate", [](const RunConfig& cfg) { return run_command(cmd_evaluate, cfg); },
        py::arg("config"), "Run the evaluate stage; returns (exit_code, log_text).");
    m.def(
        "run_report", [](const RunConfig& cfg) { return run_command(cmd_report, cfg); },
        py::arg("config"), "Run the report stage; returns (exit_code, log_text).");
}
