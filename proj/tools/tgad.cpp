#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tgad/errors.hpp"
#include "tgad/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kNumericError = 3 };

int dispatch(const std::string& command, const std::string& config_path) {
    tgad::RunConfig cfg = tgad::load_run_config(config_path);
    if (command == "simulate") tgad::stage_simulate(cfg);
    else if (command == "ingest") tgad::stage_ingest(cfg);
    else if (command == "inject") tgad::stage_inject(cfg);
    else if (command == "split") tgad::stage_split(cfg);
    else if (command == "train") tgad::stage_train(cfg);
    else if (command == "detect") tgad::stage_detect(cfg);
    else if (command == "eval") tgad::stage_eval(cfg);
    else if (command == "plot") tgad::stage_plot(cfg);
    else if (command == "pipeline") tgad::stage_pipeline(cfg);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch anomaly detection for multi-ship AIS trajectories"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> names = {"simulate", "ingest", "inject", "split", "train",
                                      "detect",   "eval",   "plot",   "pipeline"};
    std::vector<std::string> descriptions = {
        "generate a toy AIS corpus as delimited text at the configured input path",
        "parse, segment and interpolate raw AIS text into the canonical track file",
        "designate tracks and perturb speed/course rates, writing labels",
        "partition tracks into train/val/test (anomalous tracks go to test)",
        "fit the sparsified graph model with early stopping",
        "score the test partition and threshold reasoning scores",
        "compare detections against the injected ground truth",
        "emit a GeoJSON view of tracks, clusters and detections",
        "run every stage end to end"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("-c,--config", config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, config_path);
    } catch (const tgad::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const tgad::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const tgad::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
}
