#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "tgad/errors.hpp"
#include "tgad/io.hpp"
#include "tgad/pipeline.hpp"
#include "tgad/rng.hpp"

using namespace tgad;
namespace fs = std::filesystem;

namespace {

std::vector<Track> corpus_with_labels(int n_tracks, int n_injected, int len = 15) {
    std::vector<Track> tracks;
    for (int s = 0; s < n_tracks; ++s) {
        Track tr;
        tr.ship_id = "S" + std::to_string(s);
        tr.track_id = tr.ship_id + "#0";
        for (int i = 0; i < len; ++i)
            tr.points.push_back({tr.ship_id, static_cast<double>(i), -31.0 + 0.02 * s,
                                 115.0 + 0.01 * i, 10.0, 45.0});
        if (s < n_injected) {
            tr.labels.assign(len, 0);
            tr.labels[len / 2] = 1;
        }
        tracks.push_back(std::move(tr));
    }
    return tracks;
}

std::string temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("split: ninety-ten rule on the clean remainder") {
    const auto tracks = corpus_with_labels(100, 10);
    SplitConfig cfg;
    cfg.clean_test_share = 0.0;
    const SplitManifest m = split_tracks(tracks, cfg, 7);
    CHECK(m.test.size() == 10);
    CHECK(m.train.size() == 81);
    CHECK(m.val.size() == 9);
    for (int s = 0; s < 10; ++s) {
        const std::string id = "S" + std::to_string(s) + "#0";
        CHECK(std::count(m.test.begin(), m.test.end(), id) == 1);
    }
}

TEST_CASE("split: zero injected tracks leaves a clean holdout in test") {
    const auto tracks = corpus_with_labels(20, 0);
    SplitConfig cfg; // default half of the clean tracks join test
    const SplitManifest m = split_tracks(tracks, cfg, 7);
    CHECK(m.test.size() == 10);
    CHECK(m.train.size() + m.val.size() == 10);
}

TEST_CASE("split: deterministic under a fixed seed") {
    const auto tracks = corpus_with_labels(37, 4);
    const SplitManifest a = split_tracks(tracks, SplitConfig{}, 99);
    const SplitManifest b = split_tracks(tracks, SplitConfig{}, 99);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
}

TEST_CASE("split: invariants hold for every seed") {
    const auto tracks = corpus_with_labels(23, 3);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const SplitManifest m = split_tracks(tracks, SplitConfig{}, seed);
        std::set<std::string> all;
        for (const auto& id : m.train) all.insert(id);
        for (const auto& id : m.val) all.insert(id);
        for (const auto& id : m.test) all.insert(id);
        // disjoint and exhaustive
        CHECK(all.size() == m.train.size() + m.val.size() + m.test.size());
        CHECK(all.size() == tracks.size());
        // injected tracks always in test
        for (int s = 0; s < 3; ++s)
            CHECK(std::count(m.test.begin(), m.test.end(),
                             "S" + std::to_string(s) + "#0") == 1);
        CHECK(!m.train.empty());
    }
}

TEST_CASE("split: all-anomalous corpus is fatal") {
    const auto tracks = corpus_with_labels(5, 5);
    CHECK_THROWS_AS(split_tracks(tracks, SplitConfig{}, 1), DataError);
}

TEST_CASE("early stopping: patience one stops after the second epoch") {
    // frozen optimizer: validation can never improve past the first epoch
    SimConfig sim;
    sim.n_tracks = 3;
    sim.seed = 5;
    sim.min_len_h = 12;
    sim.max_len_h = 14;
    const auto tracks = simulate_tracks(sim);
    ModelConfig mcfg;
    mcfg.hidden = 8;
    mcfg.latent = 6;
    mcfg.mlp_hidden = 8;
    mcfg.vgae_latent = 4;
    const auto graphs = build_corpus_graphs({tracks[0]}, WindowConfig{}, OpticsParams{});
    const auto val = build_corpus_graphs({tracks[1]}, WindowConfig{}, OpticsParams{});
    REQUIRE(!graphs.empty());
    REQUIRE(!val.empty());

    TrainConfig tcfg;
    tcfg.max_epochs = 50;
    tcfg.patience = 1;
    tcfg.adam.lr = 0.0; // parameters never move, so epoch 2 cannot improve
    ParamStore store;
    Rng rng(2);
    init_model_params(store, mcfg, rng);
    const TrainResult r = train_model(store, graphs, val, mcfg, tcfg, 11);
    CHECK(r.log.size() == 2);
    CHECK(r.best_epoch == 1);
}

TEST_CASE("early stopping: max_epochs one runs exactly one epoch") {
    SimConfig sim;
    sim.n_tracks = 2;
    sim.seed = 6;
    sim.min_len_h = 12;
    sim.max_len_h = 13;
    const auto tracks = simulate_tracks(sim);
    ModelConfig mcfg;
    mcfg.hidden = 8;
    mcfg.latent = 6;
    mcfg.mlp_hidden = 8;
    mcfg.vgae_latent = 4;
    const auto graphs = build_corpus_graphs({tracks[0]}, WindowConfig{}, OpticsParams{});
    const auto val = build_corpus_graphs({tracks[1]}, WindowConfig{}, OpticsParams{});
    TrainConfig tcfg;
    tcfg.max_epochs = 1;
    tcfg.patience = 10;
    ParamStore store;
    Rng rng(3);
    init_model_params(store, mcfg, rng);
    const TrainResult r = train_model(store, graphs, val, mcfg, tcfg, 12);
    CHECK(r.log.size() == 1);
}

TEST_CASE("training log: epochs monotone, all components recorded") {
    SimConfig sim;
    sim.n_tracks = 2;
    sim.seed = 8;
    sim.min_len_h = 12;
    sim.max_len_h = 13;
    const auto tracks = simulate_tracks(sim);
    ModelConfig mcfg;
    mcfg.hidden = 8;
    mcfg.latent = 6;
    mcfg.mlp_hidden = 8;
    mcfg.vgae_latent = 4;
    const auto graphs = build_corpus_graphs({tracks[0]}, WindowConfig{}, OpticsParams{});
    const auto val = build_corpus_graphs({tracks[1]}, WindowConfig{}, OpticsParams{});
    TrainConfig tcfg;
    tcfg.max_epochs = 3;
    ParamStore store;
    Rng rng(4);
    init_model_params(store, mcfg, rng);
    const TrainResult r = train_model(store, graphs, val, mcfg, tcfg, 13);
    int prev = 0;
    for (const EpochLog& e : r.log) {
        CHECK(e.epoch == prev + 1);
        prev = e.epoch;
        CHECK(std::isfinite(e.forecast));
        CHECK(std::isfinite(e.reconstruct));
        CHECK(std::isfinite(e.l0));
        CHECK(std::isfinite(e.val_objective));
    }
}

TEST_CASE("evaluate: degenerate conventions") {
    AnomalyReport report;
    report.fit.z_q = 1.0;
    std::map<std::pair<std::string, long long>, bool> truth;
    for (int i = 0; i < 10; ++i) {
        PointScore p;
        p.ship_id = "S";
        p.t = i;
        p.RS = 0.1;
        p.label = false;
        report.points.push_back(p);
        truth[{"S", microhour(static_cast<double>(i))}] = false;
    }
    const EvalSummary s = evaluate_report(report, truth);
    CHECK(s.zero_positive);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.auc == 0.5);

    // perfect detection
    AnomalyReport perfect = report;
    std::map<std::pair<std::string, long long>, bool> truth2 = truth;
    perfect.points[3].RS = 2.0;
    perfect.points[3].label = true;
    truth2[{"S", microhour(3.0)}] = true;
    const EvalSummary s2 = evaluate_report(perfect, truth2);
    CHECK(s2.f1 == doctest::Approx(1.0));
    CHECK(s2.auc == doctest::Approx(1.0));
}

TEST_CASE("plot: one line plus one point per position, flags carried") {
    auto tracks = corpus_with_labels(1, 1, 3);
    const std::string geo = plot_geojson(tracks, OpticsParams{}, nullptr);
    // cheap structural checks without a geojson parser
    auto count = [&](const std::string& needle) {
        std::size_t n = 0, pos = 0;
        while ((pos = geo.find(needle, pos)) != std::string::npos) {
            ++n;
            pos += needle.size();
        }
        return n;
    };
    CHECK(count("\"LineString\"") == 1);
    CHECK(count("\"Point\"") == 3);
    CHECK(count("\"anomaly\":true") == 1);
    // single ship at the snapshot cannot form a cluster: null property
    CHECK(count("\"cluster\":null") >= 1);
}

TEST_CASE("track file round trip preserves points and labels") {
    const std::string dir = temp_dir("tgad_io_test");
    auto tracks = corpus_with_labels(3, 1, 12);
    const std::string path = dir + "/tracks.jsonl";
    write_tracks_jsonl(path, tracks);
    const auto loaded = read_tracks_jsonl(path);
    REQUIRE(loaded.size() == tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        CHECK(loaded[i].track_id == tracks[i].track_id);
        REQUIRE(loaded[i].points.size() == tracks[i].points.size());
        for (std::size_t k = 0; k < tracks[i].points.size(); ++k) {
            CHECK(loaded[i].points[k].lat == tracks[i].points[k].lat);
            CHECK(loaded[i].points[k].sog == tracks[i].points[k].sog);
        }
        CHECK(loaded[i].has_labels() == tracks[i].has_labels());
    }
    fs::remove_all(dir);
}

TEST_CASE("end-to-end smoke run stays inside the workdir") {
    SimConfig sim;
    sim.n_tracks = 12;
    sim.seed = 99;
    sim.min_len_h = 14;
    sim.max_len_h = 18;
    RunConfig cfg;
    cfg.workdir = temp_dir("tgad_smoke");
    cfg.sim = sim;
    cfg.model.hidden = 8;
    cfg.model.latent = 6;
    cfg.model.mlp_hidden = 8;
    cfg.model.vgae_latent = 4;
    cfg.train.max_epochs = 2;
    cfg.detect.q = 0.05;
    cfg.detect.min_excesses = 5;
    cfg.inject.track_ratio = 0.2;
    cfg.seed = 5;

    const PipelineResult result = run_pipeline(simulate_tracks(sim), cfg);
    CHECK(result.eval.n_points > 0);
    CHECK(!result.report.points.empty());
    CHECK(result.report.fit.z_q >= 0.0);

    const std::set<std::string> expected = {
        "labeled.jsonl",   "inject_manifest.json", "split_manifest.json",
        "train_log.jsonl", "model.json",           "checkpoint.bin",
        "report.jsonl",    "eval.json",            "plot.geojson"};
    std::set<std::string> seen;
    for (const auto& entry : fs::directory_iterator(cfg.workdir))
        seen.insert(entry.path().filename().string());
    CHECK(seen == expected);

    // the report round-trips
    const AnomalyReport reread = read_report_jsonl(cfg.workdir + "/report.jsonl");
    CHECK(reread.points.size() == result.report.points.size());
    CHECK(reread.gamma == result.report.gamma);
    fs::remove_all(cfg.workdir);
}

TEST_SUITE_END();
