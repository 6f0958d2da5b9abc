#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgad/clustering.hpp"
#include "tgad/detect.hpp"
#include "tgad/graphbuild.hpp"
#include "tgad/ingest.hpp"
#include "tgad/model.hpp"
#include "tgad/optim.hpp"
#include "tgad/sim.hpp"
#include "tgad/synth.hpp"

namespace tgad {

struct SplitConfig {
    double train_frac = 0.9;      // of the clean tracks kept out of test
    double clean_test_share = 0.5; // clean tracks mixed into test as negatives
};

struct SplitManifest {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

// Every track with an injected label goes to test; a configurable share of
// clean tracks joins it as negatives; the rest splits train/val. Throws
// DataError when no clean track remains to train on.
SplitManifest split_tracks(const std::vector<Track>& tracks, const SplitConfig& cfg,
                           std::uint64_t seed);

struct TrainConfig {
    AdamConfig adam;
    int max_epochs = 100;
    int patience = 10;
    double clip_norm = 5.0;
};

struct EpochLog {
    int epoch = 0;
    double forecast = 0.0;
    double reconstruct = 0.0;
    double l0 = 0.0;
    double total = 0.0;
    double val_objective = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_val = 0.0;
    // Active-edge count per training graph at the last trained epoch,
    // before the best-validation restore (the state the L0 pressure left).
    std::vector<int> active_edges_end;
};

// Per-window temporal graphs for a corpus: for every window start, tracks
// covering the window are clustered at its first timestamp (frozen for the
// window) and merged per cluster; noise tracks get solo graphs. Graphs come
// back standardized, with deterministic ids.
std::vector<TemporalGraph> build_corpus_graphs(const std::vector<Track>& tracks,
                                               const WindowConfig& wcfg,
                                               const OpticsParams& ocfg);

// Minimizes the combined loss over training graphs with per-graph Adam
// steps; early-stops on the validation forecast+reconstruct objective and
// restores the best-validation parameters.
TrainResult train_model(ParamStore& store, const std::vector<TemporalGraph>& train_graphs,
                        const std::vector<TemporalGraph>& val_graphs, const ModelConfig& mcfg,
                        const TrainConfig& tcfg, std::uint64_t seed);

// Deterministic eval pass over the graphs; E and P are aggregated per
// (ship, t) as means over the windows covering the point. Points nothing
// ever targets (each track's first point) get E = 0.
std::vector<PointScore> score_graphs(const ParamStore& store,
                                     const std::vector<TemporalGraph>& graphs,
                                     const ModelConfig& mcfg);

struct EvalSummary {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    double auc = 0.5;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t n_points = 0;
    std::size_t n_positive = 0;
    double threshold = 0.0;
    double gamma = 1.0;
    bool zero_positive = false;
};

// Tie-aware rank AUC; 0.5 when either class is empty.
double roc_auc(const std::vector<double>& scores, const std::vector<char>& labels);

EvalSummary evaluate_report(const AnomalyReport& report,
                            const std::map<std::pair<std::string, long long>, bool>& truth);

// Point-level ground truth keyed by (ship_id, microhour).
std::map<std::pair<std::string, long long>, bool> truth_from_tracks(
    const std::vector<Track>& tracks);

inline long long microhour(double t) { return std::llround(t * 1e6); }

// GeoJSON feature collection: one LineString per track plus one Point per
// position; cluster label (null for noise/unclustered) and anomaly flag as
// properties.
std::string plot_geojson(const std::vector<Track>& tracks, const OpticsParams& ocfg,
                         const AnomalyReport* report);

struct RunConfig {
    std::string input;   // delimited AIS text; empty when tracks are supplied in-process
    std::string workdir = "out";
    ColumnMap columns;
    SimConfig sim;       // used by the simulate stage / in-process runs
    WindowConfig window;
    OpticsParams optics;
    ModelConfig model;
    TrainConfig train;
    InjectionConfig inject;
    SplitConfig split;
    DetectConfig detect;
    std::uint64_t seed = 42;
};

RunConfig load_run_config(const std::string& path);
void validate(const RunConfig& cfg);

struct PipelineResult {
    EvalSummary eval;
    SplitManifest manifest;
    TrainResult training;
    AnomalyReport report;
    std::vector<int> active_edges_per_graph; // training graphs, build order
};

// Full batch run over already-interpolated tracks: inject, split, train,
// score, threshold, evaluate, and write every artifact under cfg.workdir.
PipelineResult run_pipeline(std::vector<Track> tracks, const RunConfig& cfg);

// File-based stages used by the CLI; each reads its inputs from and writes
// its outputs into cfg.workdir.
void stage_simulate(const RunConfig& cfg);
void stage_ingest(const RunConfig& cfg);
void stage_inject(const RunConfig& cfg);
void stage_split(const RunConfig& cfg);
void stage_train(const RunConfig& cfg);
void stage_detect(const RunConfig& cfg);
void stage_eval(const RunConfig& cfg);
void stage_plot(const RunConfig& cfg);
void stage_pipeline(const RunConfig& cfg);

} // namespace tgad
