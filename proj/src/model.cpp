#include "tgad/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tgad/errors.hpp"

namespace tgad {

double HardConcrete::expected_open(double log_alpha) const {
    const double shift = beta * std::log(-gamma / zeta);
    const double x = log_alpha - shift;
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double HardConcrete::eval_value(double log_alpha) const {
    const double s = 1.0 / (1.0 + std::exp(-log_alpha));
    return std::clamp(s * (zeta - gamma) + gamma, 0.0, 1.0);
}

void init_model_params(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
    store.add("gcn.w1", glorot_uniform(cfg.in_dim, cfg.hidden, rng));
    store.add("gcn.ln1.g", Tensor::full(1, cfg.hidden, 1.0));
    store.add("gcn.ln1.b", Tensor::zeros(1, cfg.hidden));
    store.add("gcn.w2", glorot_uniform(cfg.hidden, cfg.latent, rng));
    store.add("gcn.ln2.g", Tensor::full(1, cfg.latent, 1.0));
    store.add("gcn.ln2.b", Tensor::zeros(1, cfg.latent));
    store.add("fore.w1", glorot_uniform(cfg.latent, cfg.mlp_hidden, rng));
    store.add("fore.b1", Tensor::zeros(1, cfg.mlp_hidden));
    store.add("fore.w2", glorot_uniform(cfg.mlp_hidden, cfg.in_dim, rng));
    store.add("fore.b2", Tensor::zeros(1, cfg.in_dim));
    store.add("vgae.wmu", glorot_uniform(cfg.latent, cfg.vgae_latent, rng));
    store.add("vgae.bmu", Tensor::zeros(1, cfg.vgae_latent));
    store.add("vgae.wlv", glorot_uniform(cfg.latent, cfg.vgae_latent, rng));
    store.add("vgae.blv", Tensor::zeros(1, cfg.vgae_latent));
}

void ensure_gate_params(ParamStore& store, const TemporalGraph& graph, const ModelConfig& cfg) {
    const std::string name = gate_param_name(graph.id);
    if (store.contains(name)) return;
    Param& p = store.add(name, Tensor::full(graph.edge_count(), 1, cfg.gate_init_log_alpha));
    p.lr_scale = cfg.gate_lr_scale;
}

Var sample_gates_train(const Var& log_alpha, const Tensor& uniform_noise,
                       const HardConcrete& hc) {
    if (!log_alpha.value().same_shape(uniform_noise))
        throw NumericError("sample_gates_train: noise shape mismatch");
    Tensor logit_u(uniform_noise.shape);
    for (int i = 0; i < uniform_noise.size(); ++i) {
        const double u = uniform_noise[i];
        logit_u[i] = std::log(u) - std::log1p(-u);
    }
    Var pre = smul(add(log_alpha, Var::constant(std::move(logit_u))), 1.0 / hc.beta);
    Var stretched = add_scalar(smul(sigmoid(pre), hc.zeta - hc.gamma), hc.gamma);
    return clamp_unit(stretched);
}

std::vector<double> sample_gates_eval(const Tensor& log_alpha, const HardConcrete& hc) {
    std::vector<double> out(log_alpha.size());
    for (int i = 0; i < log_alpha.size(); ++i)
        out[i] = hc.eval_open(log_alpha[i]) ? 1.0 : 0.0;
    return out;
}

Tensor masked_adjacency(const TemporalGraph& graph, const std::vector<double>& gates) {
    if (gates.size() != graph.edges.size())
        throw NumericError("masked_adjacency: gate count does not match edge count");
    const int n = static_cast<int>(graph.nodes.size());
    Tensor a({n, n});
    for (std::size_t e = 0; e < graph.edges.size(); ++e)
        a(graph.edges[e].first, graph.edges[e].second) = gates[e];
    return a;
}

Var propagation_matrix(const Var& gates, const std::vector<std::pair<int, int>>& edges, int n) {
    Var agg;
    if (edges.empty()) {
        agg = Var::constant(Tensor::identity(n));
    } else {
        agg = add(scatter_edges(gates, edges, n, /*transposed=*/true),
                  Var::constant(Tensor::identity(n)));
    }
    return div_rowwise(agg, row_sum(agg));
}

namespace {

Var add_all(const std::vector<Var>& terms) {
    Var acc = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
    return acc;
}

} // namespace

ForwardResult model_forward(const TemporalGraph& graph, const ParamStore& store,
                            const ModelConfig& cfg, bool train_mode, std::uint64_t noise_seed,
                            const std::map<std::string, Var>* bound) {
    if (graph.id.empty()) throw NumericError("model_forward: graph has no id");
    const int n = static_cast<int>(graph.nodes.size());
    const int m_edges = graph.edge_count();

    ForwardResult r;
    auto leaf = [&](const std::string& name) {
        if (bound && bound->count(name)) {
            Var v = bound->at(name);
            if (train_mode) r.leaves.emplace(name, v);
            return v;
        }
        Var v = Var::leaf(store.at(name).value, train_mode);
        if (train_mode) r.leaves.emplace(name, v);
        return v;
    };

    Rng rng(hash_mix(noise_seed, hash_str(graph.id)));

    // --- edge gates ---
    Var gates;
    if (train_mode) {
        Var log_alpha = leaf(gate_param_name(graph.id));
        Tensor u({m_edges, 1});
        for (int i = 0; i < m_edges; ++i) u[i] = rng.uniform01();
        gates = sample_gates_train(log_alpha, u, cfg.hc);
        const Tensor& la = log_alpha.value();
        double expected = 0.0;
        for (int i = 0; i < la.size(); ++i) expected += cfg.hc.expected_open(la[i]);
        r.l0 = expected;
    } else {
        const auto zv = sample_gates_eval(store.at(gate_param_name(graph.id)).value, cfg.hc);
        Tensor zt({m_edges, 1});
        int open = 0;
        for (int i = 0; i < m_edges; ++i) {
            zt[i] = zv[i];
            open += zv[i] >= 0.5 ? 1 : 0;
        }
        gates = Var::constant(std::move(zt));
        r.active_edges = open;
        r.l0 = open;
    }

    // --- GCN encoder ---
    Var prop = propagation_matrix(gates, graph.edges, n);
    Var x = Var::constant(graph.X);
    Var a1 = matmul(prop, matmul(x, leaf("gcn.w1")));
    Var h1 = relu(layer_norm(a1, leaf("gcn.ln1.g"), leaf("gcn.ln1.b"), cfg.ln_eps));
    Var a2 = matmul(prop, matmul(h1, leaf("gcn.w2")));
    Var h = layer_norm(a2, leaf("gcn.ln2.g"), leaf("gcn.ln2.b"), cfg.ln_eps);

    if (!train_mode) {
        r.node_E.assign(n, -1.0);
        r.node_P.assign(n, 1.0);
    }

    // --- forecast head: predict the same ship's next-step features ---
    std::vector<int> eligible;
    std::vector<int> targets;
    for (int i = 0; i < n; ++i) {
        if (graph.forecast_next[i] >= 0) {
            eligible.push_back(i);
            targets.push_back(graph.forecast_next[i]);
        }
    }
    Var loss_forecast;
    if (!eligible.empty()) {
        Tensor target(
            {static_cast<int>(targets.size()), cfg.in_dim});
        for (std::size_t k = 0; k < targets.size(); ++k)
            for (int j = 0; j < cfg.in_dim; ++j) target(static_cast<int>(k), j) =
                graph.X(targets[k], j);
        Var he = gather_rows(h, eligible);
        Var f1 = relu(add_rowvec(matmul(he, leaf("fore.w1")), leaf("fore.b1")));
        Var pred = add_rowvec(matmul(f1, leaf("fore.w2")), leaf("fore.b2"));
        Var diff = sub(pred, Var::constant(target));
        Var sq = mul(diff, diff);
        loss_forecast = mean(sq);
        if (!train_mode) {
            for (std::size_t k = 0; k < targets.size(); ++k) {
                double e = 0.0;
                for (int j = 0; j < cfg.in_dim; ++j) e += sq.value()(static_cast<int>(k), j);
                r.node_E[targets[k]] = e / cfg.in_dim;
            }
        }
    } else {
        loss_forecast = Var::constant(Tensor::zeros(1, 1));
    }

    // --- per-ship VGAE over intra-ship adjacency ---
    Var wmu = leaf("vgae.wmu");
    Var bmu = leaf("vgae.bmu");
    Var wlv = leaf("vgae.wlv");
    Var blv = leaf("vgae.blv");
    std::vector<Var> ship_losses;
    for (const auto& [track_id, idxs] : graph.ship_index) {
        const int m = static_cast<int>(idxs.size());
        Var hs = gather_rows(h, idxs);
        Var mu = add_rowvec(matmul(hs, wmu), bmu);
        Var logvar = add_rowvec(matmul(hs, wlv), blv);
        Var z_lat;
        if (train_mode) {
            Tensor noise({m, cfg.vgae_latent});
            for (double& v : noise.data) v = rng.normal();
            z_lat = add(mu, mul(exp(smul(logvar, 0.5)), Var::constant(std::move(noise))));
        } else {
            z_lat = mu;
        }
        // KL(N(mu, sigma^2) || N(0, I)), summed then averaged per node
        Var kl = smul(sum(add_scalar(sub(add(mul(mu, mu), exp(logvar)), logvar), -1.0)),
                      0.5 / m);

        std::unordered_map<int, int> local;
        for (int k = 0; k < m; ++k) local[idxs[k]] = k;
        Tensor target({m, m});
        int positives = 0;
        for (const auto& [u, v] : graph.edges) {
            auto iu = local.find(u);
            auto iv = local.find(v);
            if (iu != local.end() && iv != local.end()) {
                target(iu->second, iv->second) = 1.0;
                ++positives;
            }
        }
        Var ship_loss;
        if (m >= 2 && positives > 0) {
            Var logits = matmul(z_lat, transpose(z_lat));
            const double w_pos =
                static_cast<double>(m * m - positives) / static_cast<double>(positives);
            Tensor pos_w({m, m});
            Tensor neg_w({m, m});
            for (int i = 0; i < m * m; ++i) {
                pos_w[i] = target[i] * w_pos;
                neg_w[i] = 1.0 - target[i];
            }
            Var bce = mean(add(mul(Var::constant(std::move(pos_w)), softplus(neg(logits))),
                               mul(Var::constant(std::move(neg_w)), softplus(logits))));
            ship_loss = add(bce, smul(kl, cfg.beta_kl));
            if (!train_mode) {
                // geometric-mean Bernoulli likelihood across the node's row
                const Tensor& s = logits.value();
                for (int a = 0; a < m; ++a) {
                    double log_lik = 0.0;
                    for (int b = 0; b < m; ++b) {
                        double p = 1.0 / (1.0 + std::exp(-s(a, b)));
                        p = std::clamp(p, 1e-6, 1.0 - 1e-6);
                        log_lik += target(a, b) > 0.5 ? std::log(p) : std::log1p(-p);
                    }
                    r.node_P[idxs[a]] = std::exp(log_lik / m);
                }
            }
        } else {
            ship_loss = smul(kl, cfg.beta_kl); // no pairs to reconstruct
        }
        ship_losses.push_back(ship_loss);
    }
    Var loss_reconstruct = smul(add_all(ship_losses), 1.0 / ship_losses.size());

    // --- combined objective ---
    Var total = add(loss_forecast, loss_reconstruct);
    if (train_mode && m_edges > 0) {
        const double shift = cfg.hc.beta * std::log(-cfg.hc.gamma / cfg.hc.zeta);
        Var expected_open =
            sum(sigmoid(add_scalar(r.leaves.at(gate_param_name(graph.id)), -shift)));
        total = add(total, smul(expected_open, cfg.lambda_l0));
    } else {
        total = add_scalar(total, cfg.lambda_l0 * r.l0);
    }

    r.loss_forecast = loss_forecast.scalar();
    r.loss_reconstruct = loss_reconstruct.scalar();
    r.total = total;
    r.total_value = total.scalar();
    return r;
}

int active_edge_count(const ParamStore& store, const TemporalGraph& graph,
                      const ModelConfig& cfg) {
    const Tensor& la = store.at(gate_param_name(graph.id)).value;
    int open = 0;
    for (int i = 0; i < la.size(); ++i)
        if (cfg.hc.eval_open(la[i])) ++open;
    return open;
}

} // namespace tgad
