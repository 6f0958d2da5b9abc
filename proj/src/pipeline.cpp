#include "tgad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "tgad/errors.hpp"
#include "tgad/io.hpp"
#include "tgad/rng.hpp"

namespace tgad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// One master seed in the config; stages derive fixed sub-streams so that
// chained CLI stages and the in-process pipeline agree bit-for-bit.
std::uint64_t seed_inject(const RunConfig& cfg) { return hash_mix(cfg.seed, 101); }
std::uint64_t seed_split(const RunConfig& cfg) { return hash_mix(cfg.seed, 202); }
std::uint64_t seed_init(const RunConfig& cfg) { return hash_mix(cfg.seed, 303); }
std::uint64_t seed_train(const RunConfig& cfg) { return hash_mix(cfg.seed, 404); }

std::string path_in_workdir(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.workdir) / name).string();
}

template <typename T>
void shuffle_with(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.uniform_int(0, static_cast<int>(i - 1))]);
}

} // namespace

SplitManifest split_tracks(const std::vector<Track>& tracks, const SplitConfig& cfg,
                           std::uint64_t seed) {
    SplitManifest manifest;
    std::vector<std::string> clean;
    for (const Track& tr : tracks) {
        bool anomalous = false;
        for (auto l : tr.labels) anomalous = anomalous || l != 0;
        if (anomalous)
            manifest.test.push_back(tr.track_id);
        else
            clean.push_back(tr.track_id);
    }
    if (clean.empty()) throw DataError("split: no clean tracks, cannot train");

    Rng rng(seed);
    shuffle_with(clean, rng);
    const std::size_t to_test =
        static_cast<std::size_t>(std::llround(cfg.clean_test_share * clean.size()));
    for (std::size_t i = 0; i < to_test && clean.size() - i > 1; ++i)
        manifest.test.push_back(clean[clean.size() - 1 - i]);
    const std::size_t kept = clean.size() - std::min(clean.size() - 1, to_test);

    std::size_t n_train = static_cast<std::size_t>(std::llround(cfg.train_frac * kept));
    if (kept >= 2) n_train = std::clamp<std::size_t>(n_train, 1, kept - 1);
    else n_train = kept;
    for (std::size_t i = 0; i < kept; ++i) {
        if (i < n_train)
            manifest.train.push_back(clean[i]);
        else
            manifest.val.push_back(clean[i]);
    }
    std::sort(manifest.train.begin(), manifest.train.end());
    std::sort(manifest.val.begin(), manifest.val.end());
    std::sort(manifest.test.begin(), manifest.test.end());
    return manifest;
}

std::vector<TemporalGraph> build_corpus_graphs(const std::vector<Track>& tracks,
                                               const WindowConfig& wcfg,
                                               const OpticsParams& ocfg) {
    // window start -> member tracks with their point offsets
    std::map<long long, std::vector<std::pair<const Track*, int>>> starts;
    for (const Track& tr : tracks)
        for (int off : window_offsets(tr, wcfg))
            starts[microhour(tr.points[off].t)].push_back({&tr, off});

    auto hour_tag = [](long long key) {
        if (key % 1000000 == 0) return std::to_string(key / 1000000);
        return std::to_string(key) + "u";
    };

    std::vector<TemporalGraph> graphs;
    for (const auto& [key, members] : starts) {
        const std::string tag = hour_tag(key);
        if (members.size() == 1) {
            TemporalGraph g = init_graph(*members[0].first, members[0].second, wcfg);
            g.id = "w" + tag + "_s" + members[0].first->track_id;
            standardize(g);
            graphs.push_back(std::move(g));
            continue;
        }
        std::vector<ShipPosition> positions;
        std::map<std::string, std::pair<const Track*, int>> by_id;
        for (const auto& [track, off] : members) {
            const AisPoint& p = track->points[off];
            positions.push_back({track->track_id, p.lat, p.lon});
            by_id[track->track_id] = {track, off};
        }
        const ClusterAssignment assignment = cluster_ships(positions, ocfg);
        for (TemporalGraph& g : build_multiship(by_id, wcfg, assignment)) {
            const std::string& first_track = g.nodes.front().track_id;
            const int label = assignment.of(first_track);
            g.id = label == kNoise ? "w" + tag + "_s" + first_track
                                   : "w" + tag + "_c" + std::to_string(label);
            standardize(g);
            graphs.push_back(std::move(g));
        }
    }
    return graphs;
}

TrainResult train_model(ParamStore& store, const std::vector<TemporalGraph>& train_graphs,
                        const std::vector<TemporalGraph>& val_graphs, const ModelConfig& mcfg,
                        const TrainConfig& tcfg, std::uint64_t seed) {
    if (train_graphs.empty()) throw DataError("train: no training graphs");
    for (const TemporalGraph& g : train_graphs) ensure_gate_params(store, g, mcfg);
    for (const TemporalGraph& g : val_graphs) ensure_gate_params(store, g, mcfg);

    auto validation_objective = [&]() {
        if (val_graphs.empty()) return std::numeric_limits<double>::quiet_NaN();
        double acc = 0.0;
        for (const TemporalGraph& g : val_graphs) {
            const ForwardResult fwd = model_forward(g, store, mcfg, false, 0);
            acc += fwd.loss_forecast + fwd.loss_reconstruct;
        }
        return acc / static_cast<double>(val_graphs.size());
    };

    TrainResult result;
    double best = std::numeric_limits<double>::infinity();
    std::map<std::string, Tensor> best_values;
    int bad_epochs = 0;

    std::vector<int> order(train_graphs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        Rng shuffle_rng(hash_mix(seed, static_cast<std::uint64_t>(epoch)));
        shuffle_with(order, shuffle_rng);

        EpochLog log;
        log.epoch = epoch;
        for (int idx : order) {
            const TemporalGraph& g = train_graphs[idx];
            const std::uint64_t noise_seed =
                hash_mix(hash_mix(seed, static_cast<std::uint64_t>(epoch)),
                         static_cast<std::uint64_t>(idx) + 1);
            ForwardResult fwd = model_forward(g, store, mcfg, true, noise_seed);
            if (!std::isfinite(fwd.total_value))
                throw NumericError("train: non-finite loss at graph " + g.id + " (epoch " +
                                   std::to_string(epoch) + ")");
            backward(fwd.total);
            std::map<std::string, Tensor> grads;
            for (const auto& [name, leaf] : fwd.leaves) grads.emplace(name, leaf.grad());
            clip_global_norm(grads, tcfg.clip_norm);
            adam_step(store, grads, tcfg.adam);
            for (const auto& [name, gten] : grads) {
                if (!store.at(name).value.all_finite())
                    throw NumericError("train: non-finite parameter " + name +
                                       " after update on graph " + g.id);
            }
            log.forecast += fwd.loss_forecast;
            log.reconstruct += fwd.loss_reconstruct;
            log.l0 += fwd.l0;
            log.total += fwd.total_value;
        }
        const double inv = 1.0 / static_cast<double>(train_graphs.size());
        log.forecast *= inv;
        log.reconstruct *= inv;
        log.l0 *= inv;
        log.total *= inv;
        log.val_objective = validation_objective();
        result.log.push_back(log);

        if (!val_graphs.empty()) {
            if (log.val_objective < best) {
                best = log.val_objective;
                best_values = store.values();
                result.best_epoch = epoch;
                bad_epochs = 0;
            } else if (++bad_epochs >= tcfg.patience) {
                break;
            }
        } else {
            result.best_epoch = epoch;
        }
    }
    for (const TemporalGraph& g : train_graphs)
        result.active_edges_end.push_back(active_edge_count(store, g, mcfg));
    if (!val_graphs.empty() && result.best_epoch > 0) {
        store.set_values(best_values);
        result.best_val = best;
    } else if (!result.log.empty()) {
        result.best_val = result.log.back().total;
    }
    return result;
}

std::vector<PointScore> score_graphs(const ParamStore& store,
                                     const std::vector<TemporalGraph>& graphs,
                                     const ModelConfig& mcfg) {
    struct Accum {
        double t = 0.0;
        double sum_e = 0.0;
        int cnt_e = 0;
        double sum_p = 0.0;
        int cnt_p = 0;
    };
    std::map<std::pair<std::string, long long>, Accum> acc;
    for (const TemporalGraph& g : graphs) {
        const ForwardResult fwd = model_forward(g, store, mcfg, false, 0);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const NodeId& node = g.nodes[i];
            Accum& a = acc[{node.ship_id, microhour(node.t)}];
            a.t = node.t;
            a.sum_p += fwd.node_P[i];
            a.cnt_p += 1;
            if (fwd.node_E[i] >= 0.0) {
                a.sum_e += fwd.node_E[i];
                a.cnt_e += 1;
            }
        }
    }
    std::vector<PointScore> points;
    points.reserve(acc.size());
    for (const auto& [key, a] : acc) {
        PointScore p;
        p.ship_id = key.first;
        p.t = a.t;
        p.E = a.cnt_e > 0 ? a.sum_e / a.cnt_e : 0.0;
        p.P = a.cnt_p > 0 ? a.sum_p / a.cnt_p : 1.0;
        points.push_back(std::move(p));
    }
    return points;
}

double roc_auc(const std::vector<double>& scores, const std::vector<char>& labels) {
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (char l : labels)
        if (l) ++n_pos;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // 1-based ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (labels[idx[k]]) rank_sum_pos += avg_rank;
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::map<std::pair<std::string, long long>, bool> truth_from_tracks(
    const std::vector<Track>& tracks) {
    std::map<std::pair<std::string, long long>, bool> truth;
    for (const Track& tr : tracks) {
        for (std::size_t i = 0; i < tr.points.size(); ++i) {
            const auto key = std::make_pair(tr.points[i].ship_id, microhour(tr.points[i].t));
            const bool lab = tr.has_labels() && tr.labels[i] != 0;
            truth[key] = truth.count(key) ? (truth[key] || lab) : lab;
        }
    }
    return truth;
}

EvalSummary evaluate_report(const AnomalyReport& report,
                            const std::map<std::pair<std::string, long long>, bool>& truth) {
    if (report.points.empty()) throw DataError("evaluate: empty report");
    EvalSummary s;
    s.threshold = report.fit.z_q;
    s.gamma = report.gamma;
    s.n_points = report.points.size();

    std::vector<double> scores;
    std::vector<char> labels;
    scores.reserve(report.points.size());
    labels.reserve(report.points.size());
    for (const PointScore& p : report.points) {
        const auto it = truth.find({p.ship_id, microhour(p.t)});
        const bool y = it != truth.end() && it->second;
        scores.push_back(p.RS);
        labels.push_back(y ? 1 : 0);
        if (y && p.label) ++s.tp;
        else if (!y && p.label) ++s.fp;
        else if (y && !p.label) ++s.fn;
        else ++s.tn;
    }
    s.n_positive = s.tp + s.fn;
    if (s.n_positive == 0) {
        s.zero_positive = true;
        s.precision = 1.0;
        s.recall = 1.0;
        s.f1 = 1.0;
    } else {
        s.precision = (s.tp + s.fp) > 0
                          ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp)
                          : 0.0;
        s.recall = static_cast<double>(s.tp) / static_cast<double>(s.n_positive);
        s.f1 = (s.precision + s.recall) > 0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
    }
    s.auc = roc_auc(scores, labels);
    return s;
}

std::string plot_geojson(const std::vector<Track>& tracks, const OpticsParams& ocfg,
                         const AnomalyReport* report) {
    // reference snapshot: the hour covered by the most tracks (earliest wins ties)
    std::map<long long, int> coverage;
    for (const Track& tr : tracks)
        for (const AisPoint& p : tr.points) coverage[microhour(p.t)] += 1;
    long long snapshot = 0;
    int best_cov = -1;
    for (const auto& [key, cnt] : coverage) {
        if (cnt > best_cov) {
            best_cov = cnt;
            snapshot = key;
        }
    }

    std::vector<ShipPosition> positions;
    for (const Track& tr : tracks)
        for (const AisPoint& p : tr.points)
            if (microhour(p.t) == snapshot)
                positions.push_back({tr.track_id, p.lat, p.lon});
    const ClusterAssignment assignment =
        positions.empty() ? ClusterAssignment{} : cluster_ships(positions, ocfg);

    std::map<std::pair<std::string, long long>, const PointScore*> scored;
    if (report)
        for (const PointScore& p : report->points)
            scored[{p.ship_id, microhour(p.t)}] = &p;

    json features = json::array();
    for (const Track& tr : tracks) {
        const int cluster = assignment.of(tr.track_id);
        json cluster_prop = cluster == kNoise ? json(nullptr) : json(cluster);
        json line = json::array();
        for (const AisPoint& p : tr.points) line.push_back(json::array({p.lon, p.lat}));
        features.push_back(json{
            {"type", "Feature"},
            {"geometry", json{{"type", "LineString"}, {"coordinates", std::move(line)}}},
            {"properties",
             json{{"kind", "track"}, {"ship_id", tr.ship_id}, {"track_id", tr.track_id},
                  {"cluster", cluster_prop}}}});
        for (std::size_t i = 0; i < tr.points.size(); ++i) {
            const AisPoint& p = tr.points[i];
            bool anomaly = tr.has_labels() && tr.labels[i] != 0;
            json props{{"kind", "position"}, {"ship_id", tr.ship_id},
                       {"track_id", tr.track_id}, {"t", p.t}, {"cluster", cluster_prop}};
            const auto it = scored.find({p.ship_id, microhour(p.t)});
            if (it != scored.end()) {
                anomaly = it->second->label;
                props["rs"] = it->second->RS;
            }
            props["anomaly"] = anomaly;
            features.push_back(json{
                {"type", "Feature"},
                {"geometry",
                 json{{"type", "Point"}, {"coordinates", json::array({p.lon, p.lat})}}},
                {"properties", std::move(props)}});
        }
    }
    return json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump();
}

// ---------------------------------------------------------------------------
// configuration

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

} // namespace

void validate(const RunConfig& cfg) {
    require(cfg.window.w >= 2, "window.w must be >= 2");
    require(cfg.window.step >= 1, "window.step must be >= 1");
    require(cfg.optics.min_pts >= 2, "optics.min_pts must be >= 2");
    require(cfg.optics.max_eps_km > 0, "optics.max_eps_km must be positive");
    require(cfg.optics.xi > 0 && cfg.optics.xi < 1, "optics.xi must be in (0,1)");
    require(cfg.model.hidden > 0 && cfg.model.latent > 0 && cfg.model.vgae_latent > 0,
            "model widths must be positive");
    require(cfg.model.lambda_l0 >= 0, "model.lambda_l0 must be >= 0");
    require(cfg.model.beta_kl >= 0, "model.beta_kl must be >= 0");
    require(cfg.model.gate_lr_scale > 0, "model.gate_lr_scale must be positive");
    require(cfg.train.adam.lr > 0, "optim.lr must be positive");
    require(cfg.train.max_epochs >= 1, "optim.max_epochs must be >= 1");
    require(cfg.train.patience >= 1, "optim.patience must be >= 1");
    require(cfg.inject.k > 0, "inject.k must be positive");
    require(cfg.inject.track_ratio > 0 && cfg.inject.track_ratio <= 1,
            "inject.track_ratio must be in (0,1]");
    require(cfg.inject.point_ratio > 0 && cfg.inject.point_ratio <= 1,
            "inject.point_ratio must be in (0,1]");
    require(cfg.split.train_frac > 0 && cfg.split.train_frac < 1,
            "split.train_frac must be in (0,1)");
    require(cfg.split.clean_test_share >= 0 && cfg.split.clean_test_share < 1,
            "split.clean_test_share must be in [0,1)");
    require(cfg.detect.q > 0 && cfg.detect.q < 1, "detect.q must be in (0,1)");
    require(cfg.detect.init_quantile > 0 && cfg.detect.init_quantile < 1,
            "detect.init_quantile must be in (0,1)");
    require(!cfg.detect.gamma_grid.empty(), "detect.gamma_grid must not be empty");
    for (double g : cfg.detect.gamma_grid)
        require(g >= 0, "detect.gamma_grid entries must be >= 0");
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    RunConfig cfg;
    try {
        cfg.input = j.value("input", cfg.input);
        cfg.workdir = j.value("workdir", cfg.workdir);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("columns")) {
            const json& c = j["columns"];
            cfg.columns.ship_id = c.value("ship_id", cfg.columns.ship_id);
            cfg.columns.t = c.value("t", cfg.columns.t);
            cfg.columns.lat = c.value("lat", cfg.columns.lat);
            cfg.columns.lon = c.value("lon", cfg.columns.lon);
            cfg.columns.sog = c.value("sog", cfg.columns.sog);
            cfg.columns.cog = c.value("cog", cfg.columns.cog);
            if (c.contains("delimiter")) {
                const auto d = c["delimiter"].get<std::string>();
                require(d.size() == 1, "columns.delimiter must be one character");
                cfg.columns.delimiter = d[0];
            }
        }
        if (j.contains("sim")) {
            const json& s = j["sim"];
            cfg.sim.n_tracks = s.value("n_tracks", cfg.sim.n_tracks);
            cfg.sim.seed = s.value("seed", cfg.sim.seed);
            cfg.sim.min_len_h = s.value("min_len_h", cfg.sim.min_len_h);
            cfg.sim.max_len_h = s.value("max_len_h", cfg.sim.max_len_h);
            cfg.sim.convoy_prob = s.value("convoy_prob", cfg.sim.convoy_prob);
        }
        if (j.contains("window")) {
            cfg.window.w = j["window"].value("w", cfg.window.w);
            cfg.window.step = j["window"].value("step", cfg.window.step);
        }
        if (j.contains("optics")) {
            const json& o = j["optics"];
            cfg.optics.min_pts = o.value("min_pts", cfg.optics.min_pts);
            cfg.optics.max_eps_km = o.value("max_eps_km", cfg.optics.max_eps_km);
            cfg.optics.xi = o.value("xi", cfg.optics.xi);
        }
        if (j.contains("model")) {
            const json& m = j["model"];
            cfg.model.hidden = m.value("hidden", cfg.model.hidden);
            cfg.model.latent = m.value("latent", cfg.model.latent);
            cfg.model.mlp_hidden = m.value("mlp_hidden", cfg.model.mlp_hidden);
            cfg.model.vgae_latent = m.value("vgae_latent", cfg.model.vgae_latent);
            cfg.model.lambda_l0 = m.value("lambda_l0", cfg.model.lambda_l0);
            cfg.model.beta_kl = m.value("beta_kl", cfg.model.beta_kl);
            cfg.model.gate_init_log_alpha =
                m.value("gate_init_log_alpha", cfg.model.gate_init_log_alpha);
            cfg.model.gate_lr_scale = m.value("gate_lr_scale", cfg.model.gate_lr_scale);
        }
        if (j.contains("optim")) {
            const json& o = j["optim"];
            cfg.train.adam.lr = o.value("lr", cfg.train.adam.lr);
            cfg.train.adam.weight_decay = o.value("weight_decay", cfg.train.adam.weight_decay);
            cfg.train.max_epochs = o.value("max_epochs", cfg.train.max_epochs);
            cfg.train.patience = o.value("patience", cfg.train.patience);
            cfg.train.clip_norm = o.value("clip_norm", cfg.train.clip_norm);
        }
        if (j.contains("inject")) {
            const json& i = j["inject"];
            cfg.inject.k = i.value("k", cfg.inject.k);
            cfg.inject.track_ratio = i.value("track_ratio", cfg.inject.track_ratio);
            cfg.inject.point_ratio = i.value("point_ratio", cfg.inject.point_ratio);
        }
        if (j.contains("split")) {
            const json& s = j["split"];
            cfg.split.train_frac = s.value("train_frac", cfg.split.train_frac);
            cfg.split.clean_test_share = s.value("clean_test_share", cfg.split.clean_test_share);
        }
        if (j.contains("detect")) {
            const json& d = j["detect"];
            cfg.detect.q = d.value("q", cfg.detect.q);
            cfg.detect.init_quantile = d.value("init_quantile", cfg.detect.init_quantile);
            if (d.contains("gamma_grid"))
                cfg.detect.gamma_grid = d["gamma_grid"].get<std::vector<double>>();
            cfg.detect.min_excesses = d.value("min_excesses", cfg.detect.min_excesses);
        }
    } catch (const json::exception& e) {
        throw ConfigError("config field error in " + path + ": " + e.what());
    }
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// orchestration

namespace {

std::vector<Track> select_by_ids(const std::vector<Track>& tracks,
                                 const std::vector<std::string>& ids) {
    std::vector<Track> out;
    for (const std::string& id : ids)
        for (const Track& tr : tracks)
            if (tr.track_id == id) out.push_back(tr);
    return out;
}

void write_inject_manifest(const RunConfig& cfg, const InjectionOutcome& outcome) {
    json injected = json::object();
    for (std::size_t i = 0; i < outcome.designated.size(); ++i)
        injected[outcome.designated[i]] = outcome.injected_index[i];
    json j{{"seed", seed_inject(cfg)},
           {"config", json{{"k", cfg.inject.k},
                           {"track_ratio", cfg.inject.track_ratio},
                           {"point_ratio", cfg.inject.point_ratio}}},
           {"designated", outcome.designated},
           {"skipped", outcome.skipped},
           {"injected", std::move(injected)}};
    std::ofstream os(path_in_workdir(cfg, "inject_manifest.json"));
    os << j.dump(2) << '\n';
}

void write_split_manifest(const RunConfig& cfg, const SplitManifest& m) {
    json j{{"train", m.train}, {"val", m.val}, {"test", m.test}};
    std::ofstream os(path_in_workdir(cfg, "split_manifest.json"));
    os << j.dump(2) << '\n';
}

SplitManifest read_split_manifest(const RunConfig& cfg) {
    std::ifstream is(path_in_workdir(cfg, "split_manifest.json"));
    if (!is) throw DataError("missing split manifest; run the split stage first");
    json j;
    is >> j;
    SplitManifest m;
    m.train = j.at("train").get<std::vector<std::string>>();
    m.val = j.at("val").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
    return m;
}

void write_train_log(const RunConfig& cfg, const TrainResult& result) {
    std::ofstream os(path_in_workdir(cfg, "train_log.jsonl"));
    for (const EpochLog& e : result.log) {
        json j{{"epoch", e.epoch},   {"forecast", e.forecast}, {"reconstruct", e.reconstruct},
               {"l0", e.l0},         {"total", e.total},       {"val", e.val_objective}};
        os << j.dump() << '\n';
    }
}

void write_model_json(const RunConfig& cfg) {
    const ModelConfig& m = cfg.model;
    json j{{"in_dim", m.in_dim},
           {"hidden", m.hidden},
           {"latent", m.latent},
           {"mlp_hidden", m.mlp_hidden},
           {"vgae_latent", m.vgae_latent},
           {"lambda_l0", m.lambda_l0},
           {"beta_kl", m.beta_kl},
           {"gate_init_log_alpha", m.gate_init_log_alpha},
           {"hard_concrete",
            json{{"beta", m.hc.beta}, {"gamma", m.hc.gamma}, {"zeta", m.hc.zeta}}}};
    std::ofstream os(path_in_workdir(cfg, "model.json"));
    os << j.dump(2) << '\n';
}

void write_eval_json(const RunConfig& cfg, const EvalSummary& s) {
    json j{{"precision", s.precision},
           {"recall", s.recall},
           {"f1", s.f1},
           {"auc", s.auc},
           {"tp", s.tp},
           {"fp", s.fp},
           {"tn", s.tn},
           {"fn", s.fn},
           {"n_points", s.n_points},
           {"n_positive", s.n_positive},
           {"threshold", s.threshold},
           {"gamma", s.gamma},
           {"zero_positive", s.zero_positive}};
    std::ofstream os(path_in_workdir(cfg, "eval.json"));
    os << j.dump(2) << '\n';
}

double tune_gamma_on_val(const ParamStore& store, const std::vector<TemporalGraph>& val_graphs,
                         const RunConfig& cfg) {
    if (val_graphs.empty()) return 1.0;
    const auto val_points = score_graphs(store, val_graphs, cfg.model);
    std::vector<double> e_val;
    std::vector<double> p_val;
    for (const PointScore& p : val_points) {
        e_val.push_back(p.E);
        p_val.push_back(p.P);
    }
    return tune_gamma(e_val, p_val, cfg.detect);
}

AnomalyReport detect_on_test(const ParamStore& store,
                             const std::vector<TemporalGraph>& test_graphs, double gamma,
                             const RunConfig& cfg) {
    auto points = score_graphs(store, test_graphs, cfg.model);
    if (points.empty()) throw DataError("detect: empty test set");
    std::vector<double> rs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i].RS = reasoning_score(points[i].E, points[i].P, gamma);
        rs[i] = points[i].RS;
    }
    const GpdFit fit =
        pot_threshold(rs, cfg.detect.q, cfg.detect.init_quantile, cfg.detect.min_excesses);
    return classify(std::move(points), fit, gamma);
}

} // namespace

PipelineResult run_pipeline(std::vector<Track> tracks, const RunConfig& cfg) {
    validate(cfg);
    fs::create_directories(cfg.workdir);

    // inject
    InjectionConfig icfg = cfg.inject;
    icfg.seed = seed_inject(cfg);
    const InjectionOutcome outcome = inject_corpus(tracks, icfg);
    write_tracks_jsonl(path_in_workdir(cfg, "labeled.jsonl"), tracks);
    write_inject_manifest(cfg, outcome);

    // split
    PipelineResult result;
    result.manifest = split_tracks(tracks, cfg.split, seed_split(cfg));
    write_split_manifest(cfg, result.manifest);

    const auto train_tracks = select_by_ids(tracks, result.manifest.train);
    const auto val_tracks = select_by_ids(tracks, result.manifest.val);
    const auto test_tracks = select_by_ids(tracks, result.manifest.test);
    if (test_tracks.empty()) throw DataError("pipeline: empty test partition");

    auto train_graphs = build_corpus_graphs(train_tracks, cfg.window, cfg.optics);
    auto val_graphs = build_corpus_graphs(val_tracks, cfg.window, cfg.optics);
    auto test_graphs = build_corpus_graphs(test_tracks, cfg.window, cfg.optics);
    if (train_graphs.empty()) throw DataError("pipeline: no training windows");

    // train
    ParamStore store;
    Rng init_rng(seed_init(cfg));
    init_model_params(store, cfg.model, init_rng);
    result.training =
        train_model(store, train_graphs, val_graphs, cfg.model, cfg.train, seed_train(cfg));
    write_train_log(cfg, result.training);
    write_model_json(cfg);
    save_checkpoint(path_in_workdir(cfg, "checkpoint.bin"), store.values());

    for (const TemporalGraph& g : train_graphs)
        result.active_edges_per_graph.push_back(active_edge_count(store, g, cfg.model));

    // gamma on clean validation, threshold + labels on test
    const double gamma = tune_gamma_on_val(store, val_graphs, cfg);
    for (const TemporalGraph& g : test_graphs) ensure_gate_params(store, g, cfg.model);
    result.report = detect_on_test(store, test_graphs, gamma, cfg);
    write_report_jsonl(path_in_workdir(cfg, "report.jsonl"), result.report);

    // evaluate against injected ground truth
    result.eval = evaluate_report(result.report, truth_from_tracks(test_tracks));
    write_eval_json(cfg, result.eval);

    // geographic dump
    std::ofstream plot(path_in_workdir(cfg, "plot.geojson"));
    plot << plot_geojson(test_tracks, cfg.optics, &result.report) << '\n';
    return result;
}

// ---------------------------------------------------------------------------
// file-based CLI stages

void stage_simulate(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("simulate: config must name an input path");
    const auto tracks = simulate_tracks(cfg.sim);
    if (const auto parent = fs::path(cfg.input).parent_path(); !parent.empty())
        fs::create_directories(parent);
    write_tracks_csv(cfg.input, tracks, cfg.columns);
}

void stage_ingest(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("ingest: config must name an input path");
    std::ifstream is(cfg.input);
    if (!is) throw DataError("ingest: cannot open " + cfg.input);
    fs::create_directories(cfg.workdir);
    const ParseResult parsed = parse_ais(is, cfg.columns);
    write_rejects_jsonl(path_in_workdir(cfg, "rejects.jsonl"), parsed.rejects);
    std::vector<Track> tracks;
    for (const Track& tr : segment_tracks(parsed.points)) tracks.push_back(interpolate(tr));
    write_tracks_jsonl(path_in_workdir(cfg, "tracks.jsonl"), tracks);
}

void stage_inject(const RunConfig& cfg) {
    auto tracks = read_tracks_jsonl(path_in_workdir(cfg, "tracks.jsonl"));
    InjectionConfig icfg = cfg.inject;
    icfg.seed = seed_inject(cfg);
    const InjectionOutcome outcome = inject_corpus(tracks, icfg);
    write_tracks_jsonl(path_in_workdir(cfg, "labeled.jsonl"), tracks);
    write_inject_manifest(cfg, outcome);
}

void stage_split(const RunConfig& cfg) {
    const auto tracks = read_tracks_jsonl(path_in_workdir(cfg, "labeled.jsonl"));
    write_split_manifest(cfg, split_tracks(tracks, cfg.split, seed_split(cfg)));
}

void stage_train(const RunConfig& cfg) {
    const auto tracks = read_tracks_jsonl(path_in_workdir(cfg, "labeled.jsonl"));
    const SplitManifest manifest = read_split_manifest(cfg);
    const auto train_graphs =
        build_corpus_graphs(select_by_ids(tracks, manifest.train), cfg.window, cfg.optics);
    const auto val_graphs =
        build_corpus_graphs(select_by_ids(tracks, manifest.val), cfg.window, cfg.optics);
    ParamStore store;
    Rng init_rng(seed_init(cfg));
    init_model_params(store, cfg.model, init_rng);
    const TrainResult result =
        train_model(store, train_graphs, val_graphs, cfg.model, cfg.train, seed_train(cfg));
    write_train_log(cfg, result);
    write_model_json(cfg);
    save_checkpoint(path_in_workdir(cfg, "checkpoint.bin"), store.values());
}

void stage_detect(const RunConfig& cfg) {
    const auto tracks = read_tracks_jsonl(path_in_workdir(cfg, "labeled.jsonl"));
    const SplitManifest manifest = read_split_manifest(cfg);
    ParamStore store;
    for (auto& [name, tensor] : load_checkpoint(path_in_workdir(cfg, "checkpoint.bin")))
        store.add(name, std::move(tensor));
    const auto val_graphs =
        build_corpus_graphs(select_by_ids(tracks, manifest.val), cfg.window, cfg.optics);
    auto test_graphs =
        build_corpus_graphs(select_by_ids(tracks, manifest.test), cfg.window, cfg.optics);
    for (const TemporalGraph& g : val_graphs) ensure_gate_params(store, g, cfg.model);
    for (const TemporalGraph& g : test_graphs) ensure_gate_params(store, g, cfg.model);
    const double gamma = tune_gamma_on_val(store, val_graphs, cfg);
    const AnomalyReport report = detect_on_test(store, test_graphs, gamma, cfg);
    write_report_jsonl(path_in_workdir(cfg, "report.jsonl"), report);
}

void stage_eval(const RunConfig& cfg) {
    const auto tracks = read_tracks_jsonl(path_in_workdir(cfg, "labeled.jsonl"));
    const SplitManifest manifest = read_split_manifest(cfg);
    const AnomalyReport report = read_report_jsonl(path_in_workdir(cfg, "report.jsonl"));
    const EvalSummary s =
        evaluate_report(report, truth_from_tracks(select_by_ids(tracks, manifest.test)));
    write_eval_json(cfg, s);
}

void stage_plot(const RunConfig& cfg) {
    std::vector<Track> tracks;
    AnomalyReport report;
    const AnomalyReport* report_ptr = nullptr;
    const std::string labeled = path_in_workdir(cfg, "labeled.jsonl");
    tracks = fs::exists(labeled) ? read_tracks_jsonl(labeled)
                                 : read_tracks_jsonl(path_in_workdir(cfg, "tracks.jsonl"));
    if (fs::exists(path_in_workdir(cfg, "split_manifest.json"))) {
        const SplitManifest manifest = read_split_manifest(cfg);
        tracks = select_by_ids(tracks, manifest.test);
    }
    if (fs::exists(path_in_workdir(cfg, "report.jsonl"))) {
        report = read_report_jsonl(path_in_workdir(cfg, "report.jsonl"));
        report_ptr = &report;
    }
    std::ofstream os(path_in_workdir(cfg, "plot.geojson"));
    os << plot_geojson(tracks, cfg.optics, report_ptr) << '\n';
}

void stage_pipeline(const RunConfig& cfg) {
    if (!fs::exists(path_in_workdir(cfg, "tracks.jsonl"))) stage_ingest(cfg);
    run_pipeline(read_tracks_jsonl(path_in_workdir(cfg, "tracks.jsonl")), cfg);
}

} // namespace tgad
