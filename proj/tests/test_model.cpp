#include <doctest.h>

#include <cmath>

#include "tgad/model.hpp"
#include "tgad/rng.hpp"

using namespace tgad;

namespace {

Track straight_track(const std::string& ship, int n, double lat0 = -31.0, double lon0 = 115.0) {
    Track tr;
    tr.ship_id = ship;
    tr.track_id = ship + "#0";
    for (int i = 0; i < n; ++i)
        tr.points.push_back({ship, static_cast<double>(i), lat0 + 0.01 * i, lon0 + 0.015 * i,
                             10.0 + 0.3 * i, 40.0 + 2.0 * i});
    return tr;
}

TemporalGraph two_ship_graph(int w) {
    const Track a = straight_track("A", w);
    const Track b = straight_track("B", w, -31.02, 115.03);
    ClusterAssignment clusters;
    clusters.label["A#0"] = 0;
    clusters.label["B#0"] = 0;
    std::map<std::string, std::pair<const Track*, int>> members{{"A#0", {&a, 0}},
                                                                {"B#0", {&b, 0}}};
    auto graphs = build_multiship(members, WindowConfig{w, 1}, clusters);
    TemporalGraph g = std::move(graphs[0]);
    g.id = "toy";
    standardize(g);
    return g;
}

TemporalGraph solo_graph(int w, const std::string& id = "solo") {
    TemporalGraph g = init_graph(straight_track("A", w), 0, WindowConfig{w, 1});
    g.id = id;
    standardize(g);
    return g;
}

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.hidden = 8;
    cfg.latent = 6;
    cfg.mlp_hidden = 8;
    cfg.vgae_latent = 4;
    return cfg;
}

} // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("gates saturate at extreme log-alpha in both modes") {
    const HardConcrete hc;
    CHECK(hc.eval_value(40.0) == 1.0);
    CHECK(hc.eval_value(-40.0) == 0.0);
    Var la_hi = Var::leaf(Tensor::full(2, 1, 40.0), true);
    Var la_lo = Var::leaf(Tensor::full(2, 1, -40.0), true);
    Tensor noise = Tensor::from(2, 1, {0.3, 0.7});
    CHECK(sample_gates_train(la_hi, noise, hc).value()[0] == 1.0);
    CHECK(sample_gates_train(la_lo, noise, hc).value()[0] == 0.0);
}

TEST_CASE("expected gate-open probability at log_alpha = 0") {
    const HardConcrete hc;
    // closed form evaluated independently
    const double expected =
        1.0 / (1.0 + std::exp(-(0.0 - hc.beta * std::log(-hc.gamma / hc.zeta))));
    CHECK(hc.expected_open(0.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(hc.expected_open(0.0) == doctest::Approx(0.8319).epsilon(1e-3));
}

TEST_CASE("mask: identity, annihilation, half-open message") {
    TemporalGraph g = solo_graph(3);
    const Tensor a = g.adjacency();
    const Tensor all_on = masked_adjacency(g, {1.0, 1.0, 1.0});
    for (int i = 0; i < a.size(); ++i) CHECK(all_on.data[i] == a.data[i]);
    const Tensor all_off = masked_adjacency(g, {0.0, 0.0, 0.0});
    for (int i = 0; i < a.size(); ++i) CHECK(all_off.data[i] == 0.0);
    const Tensor half = masked_adjacency(g, {0.5, 1.0, 1.0});
    CHECK(half(g.edges[0].first, g.edges[0].second) == 0.5);
}

TEST_CASE("propagation: two-node chain matches the hand-computed average") {
    // u -> v with self loops: row v = (x_u + x_v)/2, row u = x_u
    const std::vector<std::pair<int, int>> edges = {{0, 1}};
    Var z = Var::constant(Tensor::full(1, 1, 1.0));
    Var p = propagation_matrix(z, edges, 2);
    Tensor x = Tensor::from(2, 3, {1.0, 2.0, 3.0, 10.0, 20.0, 30.0});
    const Tensor h = matmul_raw(p.value(), x);
    CHECK(h(0, 0) == doctest::Approx(1.0));
    CHECK(h(0, 2) == doctest::Approx(3.0));
    CHECK(h(1, 0) == doctest::Approx((1.0 + 10.0) / 2.0));
    CHECK(h(1, 1) == doctest::Approx((2.0 + 20.0) / 2.0));
}

TEST_CASE("propagation: half-open gate scales the message and the degree") {
    const std::vector<std::pair<int, int>> edges = {{0, 1}};
    Var z = Var::constant(Tensor::full(1, 1, 0.5));
    Var p = propagation_matrix(z, edges, 2);
    CHECK(p.value()(1, 0) == doctest::Approx(0.5 / 1.5));
    CHECK(p.value()(1, 1) == doctest::Approx(1.0 / 1.5));
    CHECK(p.value()(0, 0) == doctest::Approx(1.0));
    CHECK(p.value()(0, 1) == 0.0);
}

TEST_CASE("forecast loss: exact prediction scores zero, single error is 0.2") {
    // one eligible node with prediction-target difference (1,0,0,0,0)
    Var diff = Var::constant(Tensor::from(1, 5, {1.0, 0.0, 0.0, 0.0, 0.0}));
    Var loss = mean(mul(diff, diff));
    CHECK(loss.scalar() == doctest::Approx(0.2));
    Var zero = Var::constant(Tensor::zeros(1, 5));
    CHECK(mean(mul(zero, zero)).scalar() == 0.0);
}

TEST_CASE("kl closed forms") {
    // mu = 0, logvar = 0 -> 0 ; scalar mu = 1, logvar = 0 -> 0.5
    auto kl_scalar = [](double mu, double logvar) {
        return 0.5 * (mu * mu + std::exp(logvar) - logvar - 1.0);
    };
    CHECK(kl_scalar(0.0, 0.0) == 0.0);
    CHECK(kl_scalar(1.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("w=10 ship subgraph target has 45 positives out of 100") {
    TemporalGraph g = solo_graph(10);
    int positives = 0;
    const Tensor a = g.adjacency();
    for (double v : a.data) positives += v > 0.5 ? 1 : 0;
    CHECK(a.size() == 100);
    CHECK(positives == 45);
}

TEST_CASE("degenerate latent: zero rows decode to a flat 0.5 adjacency") {
    Tensor z = Tensor::zeros(4, 3);
    const Tensor s = matmul_raw(z, z, false, true);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(1.0 / (1.0 + std::exp(-s(i, j))) == doctest::Approx(0.5));
}

TEST_CASE("total loss: lambda scaling and eval active-edge count") {
    const ModelConfig cfg = small_config();
    TemporalGraph g = solo_graph(4);
    ParamStore store;
    Rng rng(3);
    init_model_params(store, cfg, rng);
    ensure_gate_params(store, g, cfg);

    ModelConfig zero = cfg;
    zero.lambda_l0 = 0.0;
    const ForwardResult base = model_forward(g, store, zero, false, 0);
    CHECK(base.total_value ==
          doctest::Approx(base.loss_forecast + base.loss_reconstruct).epsilon(1e-12));

    // gates start open: eval term counts every edge
    const ForwardResult open = model_forward(g, store, cfg, false, 0);
    CHECK(open.active_edges == g.edge_count());
    CHECK(open.total_value == doctest::Approx(base.total_value +
                                              cfg.lambda_l0 * g.edge_count()));

    ModelConfig doubled = cfg;
    doubled.lambda_l0 = 2.0 * cfg.lambda_l0;
    const ForwardResult twice = model_forward(g, store, doubled, true, 77);
    const ForwardResult once = model_forward(g, store, cfg, true, 77);
    const double penalty_once = once.total_value - once.loss_forecast - once.loss_reconstruct;
    const double penalty_twice =
        twice.total_value - twice.loss_forecast - twice.loss_reconstruct;
    CHECK(penalty_twice == doctest::Approx(2.0 * penalty_once).epsilon(1e-9));
}

TEST_CASE("full loss on a 2-ship w=3 graph matches finite differences") {
    const TemporalGraph g = two_ship_graph(3);
    const ModelConfig cfg = small_config();
    ParamStore store;
    Rng rng(1234);
    init_model_params(store, cfg, rng);
    ensure_gate_params(store, g, cfg);
    // spread the gate logits so no hard-concrete sample sits on a clamp edge
    Tensor& la = store.at(gate_param_name(g.id)).value;
    for (int i = 0; i < la.size(); ++i) la[i] = 0.4 * std::sin(1.0 + 2.1 * i);

    const std::uint64_t noise_seed = 2024;
    auto fragment = [&](const std::map<std::string, Var>& params) {
        return model_forward(g, store, cfg, true, noise_seed, &params).total;
    };
    const double err = grad_check(fragment, store.values(), 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("node permutation: per-node outputs permute, total loss invariant") {
    const ModelConfig cfg = small_config();
    TemporalGraph g = two_ship_graph(3);
    ParamStore store;
    Rng rng(9);
    init_model_params(store, cfg, rng);
    ensure_gate_params(store, g, cfg);
    const ForwardResult base = model_forward(g, store, cfg, false, 0);

    // reverse the node ordering
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = n - 1 - i;
    TemporalGraph p;
    p.id = g.id;
    p.window_start = g.window_start;
    p.window_len = g.window_len;
    p.standardized = g.standardized;
    p.feat_mean = g.feat_mean;
    p.feat_std = g.feat_std;
    p.nodes.resize(n);
    p.X = Tensor({n, 5});
    p.forecast_next.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        p.nodes[perm[i]] = g.nodes[i];
        for (int j = 0; j < 5; ++j) p.X(perm[i], j) = g.X(i, j);
    }
    for (const auto& [u, v] : g.edges) p.edges.emplace_back(perm[u], perm[v]);
    for (const auto& [tid, idxs] : g.ship_index) {
        auto& dst = p.ship_index[tid];
        for (int i : idxs) dst.push_back(perm[i]);
    }
    for (int i = 0; i < n; ++i)
        if (g.forecast_next[i] >= 0) p.forecast_next[perm[i]] = perm[g.forecast_next[i]];

    const ForwardResult permuted = model_forward(p, store, cfg, false, 0);
    CHECK(permuted.total_value == doctest::Approx(base.total_value).epsilon(1e-9));
    for (int i = 0; i < n; ++i) {
        CHECK(permuted.node_P[perm[i]] == doctest::Approx(base.node_P[i]).epsilon(1e-9));
        if (base.node_E[i] >= 0)
            CHECK(permuted.node_E[perm[i]] == doctest::Approx(base.node_E[i]).epsilon(1e-9));
    }
}

TEST_SUITE_END();
