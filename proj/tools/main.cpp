#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coarsemap/errors.hpp"
#include "coarsemap/pipeline.hpp"

namespace {

using coarsemap::RunConfig;

/// Values captured from flags (or the environment). Only fields the
/// user actually provided are set, so they can override a config file.
struct CliOverrides {
    std::optional<std::string> config;
    std::optional<std::string> scenarios;
    std::optional<std::string> map;
    std::optional<std::string> cache_dir;
    std::optional<std::string> out;
    std::optional<std::string> predictions;
    std::optional<std::string> tables;
    std::optional<std::string> endpoint;
    std::optional<std::string> predictor;
    std::optional<double> receptive_field;
    std::optional<double> spacing;
    std::optional<double> intersection_radius;
    std::optional<int> modes;
    std::optional<int> jobs;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config, "JSON file supplying any of the other settings");
    cmd->add_option("--scenarios", o.scenarios, "directory of scenario *.json files");
    cmd->add_option("--map", o.map, "directory of <id>.segments or <id>.osm maps");
    cmd->add_option("--cache-dir", o.cache_dir, "download cache directory");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--predictions", o.predictions,
                    "directory of <id>.predictions.json (evaluate input)");
    cmd->add_option("--tables", o.tables, "directory of evaluation CSVs (report input)");
    cmd->add_option("--endpoint", o.endpoint, "Overpass interpreter URL")
        ->envname("COARSEMAP_OVERPASS_ENDPOINT");
    cmd->add_option("--predictor", o.predictor, "cv | ctrv | map_follow");
    cmd->add_option("--receptive-field", o.receptive_field,
                    "map radius around each agent, meters");
    cmd->add_option("--spacing", o.spacing, "interpolation gap, meters");
    cmd->add_option("--intersection-radius", o.intersection_radius,
                    "marker flagging radius, meters");
    cmd->add_option("--modes", o.modes, "prediction modes cap (1-6)");
    cmd->add_option("--jobs", o.jobs, "worker threads (0 = one per core)");
}

RunConfig build_config(const CliOverrides& o) {
    RunConfig cfg;
    if (o.config) cfg = coarsemap::load_config_file(*o.config, cfg);
    if (o.scenarios) cfg.scenarios = *o.scenarios;
    if (o.map) cfg.map_dir = *o.map;
    if (o.cache_dir) cfg.cache_dir = *o.cache_dir;
    if (o.out) cfg.out_dir = *o.out;
    if (o.predictions) cfg.predictions = *o.predictions;
    if (o.tables) cfg.tables = *o.tables;
    if (o.endpoint) cfg.endpoint = *o.endpoint;
    if (o.predictor) {
        const auto kind = coarsemap::predictor_from_string(*o.predictor);
        if (!kind) throw coarsemap::Error("unknown predictor '" + *o.predictor + "'");
        cfg.predictor = *kind;
    }
    if (o.receptive_field) cfg.receptive_field = *o.receptive_field;
    if (o.spacing) cfg.spacing = *o.spacing;
    if (o.intersection_radius) cfg.intersection_radius = *o.intersection_radius;
    if (o.modes) cfg.modes = *o.modes;
    if (o.jobs) cfg.jobs = *o.jobs;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarsemap: vectorized road scenes and trajectory predictor evaluation"};
    app.require_subcommand(1);

    CliOverrides o;
    CLI::App* fetch =
        app.add_subcommand("fetch-map", "download the road network around each scenario");
    CLI::App* preprocess =
        app.add_subcommand("preprocess", "vectorize downloaded maps into segment files");
    CLI::App* predict =
        app.add_subcommand("predict", "run a predictor over every scenario");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score predictions and write metric tables");
    CLI::App* report = app.add_subcommand("report", "render metric tables into figures");
    for (CLI::App* cmd : {fetch, preprocess, predict, evaluate, report})
        add_common_options(cmd, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = build_config(o);
        if (fetch->parsed()) return coarsemap::cmd_fetch_map(cfg, std::cout);
        if (preprocess->parsed()) return coarsemap::cmd_preprocess(cfg, std::cout);
        if (predict->parsed()) return coarsemap::cmd_predict(cfg, std::cout);
        if (evaluate->parsed()) return coarsemap::cmd_evaluate(cfg, std::cout);
        if (report->parsed()) return coarsemap::cmd_report(cfg, std::cout);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << std::endl;
        return 1;
    }
    return 0;
}
