#include "coarsemap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "coarsemap/errors.hpp"
#include "coarsemap/metrics.hpp"
#include "coarsemap/predictors.hpp"
#include "coarsemap/report.hpp"
#include "coarsemap/scenario.hpp"
#include "coarsemap/vector_map.hpp"

namespace coarsemap {

std::string_view to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::ConstantVelocity: return "cv";
        case PredictorKind::ConstantTurn: return "ctrv";
        case PredictorKind::MapFollowing: return "map_follow";
    }
    return "cv";
}

std::optional<PredictorKind> predictor_from_string(std::string_view name) {
    if (name == "cv") return PredictorKind::ConstantVelocity;
    if (name == "ctrv") return PredictorKind::ConstantTurn;
    if (name == "map_follow") return PredictorKind::MapFollowing;
    return std::nullopt;
}

void validate(const RunConfig& config) {
    if (config.modes < 1 || config.modes > 6)
        throw Error("config: modes must lie in [1, 6], got " + std::to_string(config.modes));
    if (!(config.spacing > 0.0))
        throw Error("config: spacing must be positive");
    if (!(config.receptive_field > 0.0))
        throw Error("config: receptive_field must be positive");
    if (!(config.intersection_radius > 0.0))
        throw Error("config: intersection_radius must be positive");
    if (config.jobs < 0)
        throw Error("config: jobs must not be negative");
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw Error("config: invalid JSON in " + path.string() + ": " + err.what());
    }
    if (!doc.is_object()) throw Error("config: expected a JSON object");

    const auto as_string = [&](const nlohmann::json& v, const char* key) {
        if (!v.is_string()) throw Error(std::string("config: ") + key + " must be a string");
        return v.get<std::string>();
    };
    const auto as_number = [&](const nlohmann::json& v, const char* key) {
        if (!v.is_number()) throw Error(std::string("config: ") + key + " must be a number");
        return v.get<double>();
    };
    const auto as_int = [&](const nlohmann::json& v, const char* key) {
        if (!v.is_number_integer()) throw Error(std::string("config: ") + key + " must be an integer");
        return v.get<int>();
    };

    for (const auto& [key, value] : doc.items()) {
        if (key == "scenarios") base.scenarios = as_string(value, "scenarios");
        else if (key == "map_dir") base.map_dir = as_string(value, "map_dir");
        else if (key == "cache_dir") base.cache_dir = as_string(value, "cache_dir");
        else if (key == "out_dir") base.out_dir = as_string(value, "out_dir");
        else if (key == "predictions") base.predictions = as_string(value, "predictions");
        else if (key == "tables") base.tables = as_string(value, "tables");
        else if (key == "endpoint") base.endpoint = as_string(value, "endpoint");
        else if (key == "predictor") {
            const std::string name = as_string(value, "predictor");
            const auto kind = predictor_from_string(name);
            if (!kind) throw Error("config: unknown predictor '" + name + "'");
            base.predictor = *kind;
        } else if (key == "receptive_field") base.receptive_field = as_number(value, "receptive_field");
        else if (key == "spacing") base.spacing = as_number(value, "spacing");
        else if (key == "intersection_radius") base.intersection_radius = as_number(value, "intersection_radius");
        else if (key == "modes") base.modes = as_int(value, "modes");
        else if (key == "jobs") base.jobs = as_int(value, "jobs");
        else throw Error("config: unknown key '" + key + "'");
    }
    return base;
}

namespace {

std::vector<std::filesystem::path> list_scenario_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error("scenario directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    if (files.empty()) throw Error("no scenario files (*.json) in " + dir.string());
    return files;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Runs fn(0..n-1) on a small worker pool. The first exception wins and
/// is rethrown on the calling thread after every worker stops.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    auto workers = static_cast<std::size_t>(
        jobs > 0 ? jobs : std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const auto body = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> guard(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

VectorMap load_map_for(const RunConfig& config, const Scenario& scenario, WarningLog* log) {
    const std::filesystem::path segments =
        config.map_dir / (scenario.scenario_id + ".segments");
    if (std::filesystem::exists(segments)) return load_segment_file(segments);
    const std::filesystem::path osm = config.map_dir / (scenario.scenario_id + ".osm");
    if (std::filesystem::exists(osm)) {
        const OsmGraph graph = filter_roads(parse_osm_file(osm, log));
        return build_vector_map(graph, scenario.frame, config.spacing,
                                config.intersection_radius, log);
    }
    throw Error("no map (" + scenario.scenario_id + ".segments or .osm) in " +
                config.map_dir.string());
}

/// Observed future positions, or nullopt when any future frame is missing.
std::optional<std::vector<PlanePoint>> future_of(const AgentTrack& track,
                                                 const ScenarioSpec& spec) {
    std::vector<PlanePoint> future;
    future.reserve(static_cast<std::size_t>(spec.future_len));
    for (int f = spec.history_len; f < spec.total_frames(); ++f) {
        const auto& st = track.states[static_cast<std::size_t>(f)];
        if (!st) return std::nullopt;
        future.push_back(st->position);
    }
    return future;
}

/// Runs the configured predictor on one track. For map-following, the
/// map is first cut down to the receptive field around the agent's last
/// observed position; `field_segments` accumulates how many segments
/// that field supplied (the map-budget debug counter).
PredictionSet predict_track(const RunConfig& config, const AgentTrack& track,
                            const ScenarioSpec& spec, const VectorMap* map,
                            std::size_t& field_segments) {
    switch (config.predictor) {
        case PredictorKind::ConstantVelocity: return predict_constant_velocity(track, spec);
        case PredictorKind::ConstantTurn: return predict_constant_turn(track, spec);
        case PredictorKind::MapFollowing: break;
    }
    const auto last = track.last_observed_before(spec.history_len);
    if (!last)
        throw InsufficientHistory("agent '" + track.agent_id + "' has no observed history");
    const PlanePoint center =
        track.states[static_cast<std::size_t>(*last)]->position;
    const std::vector<MapSegment> field =
        extract_receptive_field(*map, center, config.receptive_field);
    field_segments += field.size();
    const VectorMap sub = VectorMap::from_segments(field, map->origin(), map->spacing());
    return predict_map_following(track, sub, spec, config.modes);
}

struct ScenarioEvaluation {
    std::string scenario_id;
    std::string line;
    std::vector<EvaluatedAgent> agents;
    std::size_t field_segments = 0;
};

/// Scenario results are produced by the worker pool in slot order but
/// reported in scenario_id order.
struct ScenarioLine {
    std::string scenario_id;
    std::string text;
};

void print_sorted(std::vector<ScenarioLine>& lines, std::ostream& out) {
    std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) {
        return a.scenario_id < b.scenario_id;
    });
    for (const ScenarioLine& line : lines) out << line.text;
}

void append_fixed(std::string& out, double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    out += buf;
}

// --- CSV table parsing (report stage) -----------------------------------

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string::size_type start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto end = line.find(',', start);
        if (end == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
}

double parse_double_field(const std::string& field, const std::string& where) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw Error("malformed number '" + field + "' in " + where);
    return value;
}

std::size_t parse_count_field(const std::string& field, const std::string& where) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw Error("malformed count '" + field + "' in " + where);
    return value;
}

GroupStats parse_stats_fields(const std::vector<std::string>& fields, std::size_t offset,
                              const std::string& where) {
    GroupStats stats;
    stats.count = parse_count_field(fields[offset], where);
    stats.min_ade = parse_double_field(fields[offset + 1], where);
    stats.min_fde = parse_double_field(fields[offset + 2], where);
    stats.miss_rate = parse_double_field(fields[offset + 3], where);
    return stats;
}

std::vector<std::vector<std::string>> parse_table(const std::filesystem::path& path,
                                                  const std::string& expected_header,
                                                  std::size_t columns) {
    const std::vector<std::string> lines = split_lines(read_text_file(path));
    if (lines.empty() || lines.front() != expected_header)
        throw Error("unexpected header in " + path.string() + " (want '" + expected_header +
                    "')");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_fields(lines[i]);
        if (fields.size() != columns)
            throw Error("row " + std::to_string(i) + " of " + path.string() + " has " +
                        std::to_string(fields.size()) + " fields, want " +
                        std::to_string(columns));
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

int cmd_fetch_map(const RunConfig& config, std::ostream& out, HttpTransport* transport) {
    validate(config);
    const auto files = list_scenario_files(config.scenarios);
    FetchOptions options;
    options.transport = transport;

    std::size_t total_bytes = 0;
    std::vector<ScenarioLine> lines;
    lines.reserve(files.size());
    for (const auto& path : files) {
        const Scenario scenario = load_scenario_file(path);
        std::vector<std::vector<PlanePoint>> tracks;
        for (const AgentTrack& track : scenario.tracks) {
            std::vector<PlanePoint> points;
            for (const auto& st : track.states)
                if (st) points.push_back(st->position);
            if (!points.empty()) tracks.push_back(std::move(points));
        }
        const GeoBBox bbox = track_bbox(scenario.frame, tracks, config.receptive_field);

        WarningLog log;
        const std::string xml =
            fetch_map_xml(bbox, config.endpoint, config.cache_dir, options, &log);
        write_text_files({{scenario.scenario_id + ".osm", xml}}, config.out_dir);
        total_bytes += xml.size();
        std::string text;
        for (const Warning& w : log.records())
            text += "warning: " + w.element_kind + " " + std::to_string(w.element_id) + ": " +
                    w.reason + "\n";
        text += "fetch-map " + scenario.scenario_id + ": " + std::to_string(xml.size()) +
                " bytes (key " + bbox_cache_key(config.endpoint, bbox) + ")\n";
        lines.push_back({scenario.scenario_id, std::move(text)});
    }
    print_sorted(lines, out);
    out << "fetched " << files.size() << " scenario maps, " << total_bytes << " bytes\n";
    return 0;
}

int cmd_preprocess(const RunConfig& config, std::ostream& out) {
    validate(config);
    const auto files = list_scenario_files(config.scenarios);

    std::vector<ScenarioLine> lines(files.size());
    parallel_for(files.size(), config.jobs, [&](std::size_t i) {
        const Scenario scenario = load_scenario_file(files[i]);
        const std::filesystem::path osm = config.map_dir / (scenario.scenario_id + ".osm");
        WarningLog log;
        const OsmGraph graph = filter_roads(parse_osm_file(osm, &log));
        const VectorMap map = build_vector_map(graph, scenario.frame, config.spacing,
                                               config.intersection_radius, &log);
        write_text_files({{scenario.scenario_id + ".segments", to_segment_text(map)}},
                         config.out_dir);

        std::size_t flagged = 0;
        for (const MapSegment& seg : map.segments())
            if (seg.is_intersection) ++flagged;
        std::string line = "preprocess " + scenario.scenario_id + ": " +
                           std::to_string(map.segments().size()) + " segments, " +
                           std::to_string(flagged) + " flagged, " + std::to_string(log.size()) +
                           " warnings\n";
        lines[i] = {scenario.scenario_id, std::move(line)};
    });
    print_sorted(lines, out);
    out << "preprocessed " << files.size() << " scenarios\n";
    return 0;
}

int cmd_predict(const RunConfig& config, std::ostream& out) {
    validate(config);
    const auto files = list_scenario_files(config.scenarios);
    const bool needs_map = config.predictor == PredictorKind::MapFollowing;

    std::vector<ScenarioLine> lines(files.size());
    std::atomic<std::size_t> total_agents{0};
    std::atomic<std::size_t> total_skipped{0};
    std::atomic<std::size_t> total_field_segments{0};
    parallel_for(files.size(), config.jobs, [&](std::size_t i) {
        const Scenario scenario = load_scenario_file(files[i]);
        WarningLog log;
        VectorMap map;
        if (needs_map) map = load_map_for(config, scenario, &log);

        ScenarioPredictions predictions;
        predictions.scenario_id = scenario.scenario_id;
        predictions.predictor = std::string(to_string(config.predictor));
        std::size_t field_segments = 0;
        std::size_t skipped = 0;
        for (const AgentTrack& track : scenario.tracks) {
            try {
                predictions.sets.push_back(
                    predict_track(config, track, scenario.spec, &map, field_segments));
            } catch (const InsufficientHistory&) {
                ++skipped;
            }
        }
        write_text_files(
            {{scenario.scenario_id + ".predictions.json", to_prediction_json(predictions)}},
            config.out_dir);

        total_agents += predictions.sets.size();
        total_skipped += skipped;
        total_field_segments += field_segments;
        std::string line = "predict " + scenario.scenario_id + ": " +
                           std::to_string(predictions.sets.size()) + " agents, " +
                           std::to_string(skipped) + " skipped";
        if (needs_map) line += ", " + std::to_string(field_segments) + " field segments";
        lines[i] = {scenario.scenario_id, line + "\n"};
    });
    print_sorted(lines, out);
    out << "predicted " << total_agents.load() << " agents across " << files.size()
        << " scenarios (" << total_skipped.load() << " skipped)";
    if (needs_map) out << ", receptive_field_segments=" << total_field_segments.load();
    out << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
    validate(config);
    const auto files = list_scenario_files(config.scenarios);
    const bool from_files = !config.predictions.empty();

    std::vector<ScenarioEvaluation> evals(files.size());
    parallel_for(files.size(), config.jobs, [&](std::size_t i) {
        const Scenario scenario = load_scenario_file(files[i]);
        WarningLog log;
        const VectorMap map = load_map_for(config, scenario, &log);
        const AgentTrack& focal = scenario.focal_track();

        // The focal agent is the scored one (it always carries a full
        // future); other tracks only provide scene context.
        PredictionSet set;
        std::size_t field_segments = 0;
        if (from_files) {
            const std::filesystem::path path =
                config.predictions / (scenario.scenario_id + ".predictions.json");
            const ScenarioPredictions stored = from_prediction_json(read_text_file(path));
            const auto it = std::find_if(
                stored.sets.begin(), stored.sets.end(),
                [&](const PredictionSet& s) { return s.agent_id == focal.agent_id; });
            if (it == stored.sets.end())
                throw Error("scenario '" + scenario.scenario_id +
                            "': no stored prediction for focal agent '" + focal.agent_id + "'");
            set = *it;
        } else {
            set = predict_track(config, focal, scenario.spec, &map, field_segments);
        }

        const auto gt = future_of(focal, scenario.spec);
        if (!gt)
            throw Error("scenario '" + scenario.scenario_id +
                        "': focal agent is missing future frames");

        ScenarioEvaluation eval;
        eval.scenario_id = scenario.scenario_id;
        eval.field_segments = field_segments;
        EvaluatedAgent agent;
        agent.cls = focal.cls;
        agent.context = classify_context(*gt, map, config.intersection_radius);
        agent.result = evaluate_agent(set, *gt);
        eval.agents.push_back(std::move(agent));
        eval.line = "evaluate " + scenario.scenario_id + ": minFDE=";
        append_fixed(eval.line, eval.agents.front().result.min_fde, 3);
        eval.line += eval.agents.front().result.missed ? " (miss)\n" : "\n";
        evals[i] = std::move(eval);
    });

    std::stable_sort(evals.begin(), evals.end(), [](const auto& a, const auto& b) {
        return a.scenario_id < b.scenario_id;
    });
    std::vector<EvaluatedAgent> all;
    std::size_t total_field_segments = 0;
    for (ScenarioEvaluation& eval : evals) {
        for (EvaluatedAgent& agent : eval.agents) all.push_back(std::move(agent));
        total_field_segments += eval.field_segments;
        out << eval.line;
    }
    const EvaluationReport report = aggregate(all);

    // All scenarios share one sampling rate; take it from the first file.
    const double timestep = load_scenario_file(files.front()).spec.timestep;
    write_report_files(report, timestep, config.out_dir);

    std::string summary = "evaluated " + std::to_string(report.overall.count) +
                          " agents across " + std::to_string(files.size()) +
                          " scenarios: minADE=";
    append_fixed(summary, report.overall.min_ade, 6);
    summary += " minFDE=";
    append_fixed(summary, report.overall.min_fde, 6);
    summary += " MR=";
    append_fixed(summary, report.overall.miss_rate, 6);
    summary += "\nreceptive_field_segments=" + std::to_string(total_field_segments) + "\n";
    out << summary;
    return 0;
}

int cmd_report(const RunConfig& config, std::ostream& out) {
    validate(config);
    if (config.tables.empty()) throw Error("report: no tables directory configured");

    EvaluationReport report;

    {
        const auto rows = parse_table(config.tables / "aggregate.csv",
                                      "count,min_ade,min_fde,miss_rate", 4);
        if (rows.size() != 1)
            throw Error("aggregate.csv must hold exactly one row, got " +
                        std::to_string(rows.size()));
        report.overall = parse_stats_fields(rows[0], 0, "aggregate.csv");
    }
    {
        const auto rows = parse_table(config.tables / "per_class.csv",
                                      "class,count,min_ade,min_fde,miss_rate", 5);
        for (const auto& row : rows) {
            const auto cls = agent_class_from_string(row[0]);
            if (!cls) throw Error("per_class.csv: unknown class '" + row[0] + "'");
            report.per_class.emplace(*cls, parse_stats_fields(row, 1, "per_class.csv"));
        }
    }
    {
        const auto rows = parse_table(config.tables / "per_context.csv",
                                      "context,count,min_ade,min_fde,miss_rate", 5);
        for (const auto& row : rows) {
            const auto ctx = road_context_from_string(row[0]);
            if (!ctx) throw Error("per_context.csv: unknown context '" + row[0] + "'");
            report.per_context.emplace(*ctx, parse_stats_fields(row, 1, "per_context.csv"));
        }
    }
    double timestep = 0.1;
    {
        const auto rows =
            parse_table(config.tables / "per_frame.csv", "frame,horizon_s,mean_de", 3);
        if (rows.empty()) throw Error("per_frame.csv has no rows");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto frame = parse_count_field(rows[i][0], "per_frame.csv");
            if (frame != i + 1)
                throw Error("per_frame.csv rows out of order at row " + std::to_string(i + 1));
            report.per_frame.push_back(parse_double_field(rows[i][2], "per_frame.csv"));
        }
        timestep = parse_double_field(rows[0][1], "per_frame.csv");
    }

    write_text_files({{"per_frame.svg", per_frame_svg(report, timestep)},
                      {"per_class.svg", per_class_svg(report)},
                      {"per_context.svg", per_context_svg(report)}},
                     config.out_dir);
    out << "report: 3 figures written to " << config.out_dir.string() << "\n";
    return 0;
}

}  // namespace coarsemap
