#ifndef COARSEMAP_PIPELINE_HPP
#define COARSEMAP_PIPELINE_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "coarsemap/fetch.hpp"

namespace coarsemap {

enum class PredictorKind { ConstantVelocity, ConstantTurn, MapFollowing };

/// Command-line names: "cv", "ctrv", "map_follow".
std::string_view to_string(PredictorKind kind);
std::optional<PredictorKind> predictor_from_string(std::string_view name);

/// Settings shared by the pipeline stages. Every field maps to one CLI
/// flag; a JSON config file may supply the same keys, with explicit
/// flags taking precedence.
struct RunConfig {
    std::filesystem::path scenarios;    // directory of <id>.json scenes
    std::filesystem::path map_dir;      // directory of <id>.segments or <id>.osm
    std::filesystem::path cache_dir;    // raw download cache
    std::filesystem::path out_dir;      // stage output directory
    std::filesystem::path predictions;  // directory of <id>.predictions.json
    std::filesystem::path tables;       // directory of evaluation CSVs
    std::string endpoint = "https://overpass-api.de/api/interpreter";
    PredictorKind predictor = PredictorKind::ConstantVelocity;
    double receptive_field = 100.0;     // map radius around each agent (m)
    double spacing = 1.5;               // interpolation gap (m)
    double intersection_radius = 10.0;  // marker flagging radius (m)
    int modes = 6;                      // prediction modes cap
    int jobs = 0;                       // worker threads; 0 = hardware default
};

/// Throws Error when a field is out of range (modes outside [1, 6],
/// non-positive distances, negative jobs).
void validate(const RunConfig& config);

/// Reads a JSON config file holding any subset of RunConfig's fields
/// and overlays it onto `base`. Unknown keys are rejected.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Pipeline stages. Each processes every scenario in
/// config.scenarios (files matching *.json, in name order), writes its
/// artifacts under config.out_dir, and logs one line per scenario plus
/// a summary to `out`. Errors are thrown; no partial CSVs remain.
///
/// fetch-map: bounding box of each scene's tracks (padded by
/// receptive_field) -> raw OSM XML via config.endpoint, cached in
/// config.cache_dir, copied to <out>/<id>.osm. `transport` overrides
/// the real HTTP client.
int cmd_fetch_map(const RunConfig& config, std::ostream& out, HttpTransport* transport = nullptr);

/// preprocess: <map_dir>/<id>.osm -> vectorized <out>/<id>.segments.
int cmd_preprocess(const RunConfig& config, std::ostream& out);

/// predict: scenes + maps -> <out>/<id>.predictions.json for every
/// agent with enough observed history.
int cmd_predict(const RunConfig& config, std::ostream& out);

/// evaluate: scores predictions (from config.predictions if set,
/// otherwise computed in-process) against observed futures and writes
/// the full report set (aggregate/per_class/per_context/per_frame CSVs
/// plus the three SVG figures) to config.out_dir.
int cmd_evaluate(const RunConfig& config, std::ostream& out);

/// report: renders the CSVs in config.tables into SVG figures in
/// config.out_dir.
int cmd_report(const RunConfig& config, std::ostream& out);

}  // namespace coarsemap

#endif
