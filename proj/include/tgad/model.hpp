#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tgad/autodiff.hpp"
#include "tgad/graphbuild.hpp"
#include "tgad/optim.hpp"
#include "tgad/rng.hpp"

namespace tgad {

// Stretched, clamped sigmoid relaxation of a Bernoulli edge gate.
struct HardConcrete {
    double beta = 2.0 / 3.0;
    double gamma = -0.1;
    double zeta = 1.1;

    // P(gate > 0) under the relaxation: sigmoid(log_alpha - beta*log(-gamma/zeta)).
    double expected_open(double log_alpha) const;
    // Deterministic gate value before binarization.
    double eval_value(double log_alpha) const;
    // eval_value >= 0.5, reported as the exact active-edge count.
    bool eval_open(double log_alpha) const { return eval_value(log_alpha) >= 0.5; }
};

struct ModelConfig {
    int in_dim = 5;
    int hidden = 64;       // GCN hidden width
    int latent = 32;       // GCN output width
    int mlp_hidden = 64;   // forecast head hidden width
    int vgae_latent = 16;  // width of the VGAE mean / log-variance heads
    double lambda_l0 = 1e-3;
    double beta_kl = 1.0;
    double gate_init_log_alpha = 2.0; // gates start near-open
    // A gate tensor is stepped once per epoch (when its graph is the batch),
    // so its effective rate is scaled to let gates actually open or close
    // within the epoch budget.
    double gate_lr_scale = 25.0;
    double ln_eps = 1e-5;
    HardConcrete hc;
};

// Glorot-initialized shared weights: GCN (5->64->32 with layer norm),
// forecast MLP (32->64->5), VGAE heads (32->16 twice).
void init_model_params(ParamStore& store, const ModelConfig& cfg, Rng& rng);

inline std::string gate_param_name(const std::string& graph_id) { return "gate." + graph_id; }

// Adds the per-edge log_alpha tensor for this graph if absent.
void ensure_gate_params(ParamStore& store, const TemporalGraph& graph, const ModelConfig& cfg);

// Train-mode hard-concrete sample given per-edge uniform noise:
// z = clamp(sigmoid((logit(u) + log_alpha)/beta) * (zeta-gamma) + gamma, 0, 1)
Var sample_gates_train(const Var& log_alpha, const Tensor& uniform_noise, const HardConcrete& hc);

// Deterministic eval gates, binarized at 0.5.
std::vector<double> sample_gates_eval(const Tensor& log_alpha, const HardConcrete& hc);

// Dense masked adjacency A .* z over the graph's node ordering.
Tensor masked_adjacency(const TemporalGraph& graph, const std::vector<double>& gates);

// Row-normalized aggregation operator D_in^{-1}(A_masked + I): row v holds
// gate(u->v)/deg for in-neighbors u and 1/deg for the self loop, with
// deg = 1 + sum of v's gated in-edges.
Var propagation_matrix(const Var& gates, const std::vector<std::pair<int, int>>& edges, int n);

struct ForwardResult {
    Var total;                        // Eq-style combined loss, 1x1
    std::map<std::string, Var> leaves; // trainable leaves, for gradient readout
    double loss_forecast = 0.0;
    double loss_reconstruct = 0.0;
    double l0 = 0.0;        // expected-open sum (train) or active count (eval)
    double total_value = 0.0;
    int active_edges = -1;  // eval mode only
    // Per-node diagnostics (eval mode): E is the squared forecast error of
    // the prediction targeting the node, -1 when nothing targets it; P is
    // the node reconstruction probability.
    std::vector<double> node_E;
    std::vector<double> node_P;
};

// Builds the full loss over one graph. Train mode samples gates and latents
// with noise derived from `noise_seed`; eval mode is deterministic (binary
// gates, latent mean) and also fills the per-node diagnostics. `bound`, when
// given, supplies the trainable leaves by name (the finite-difference
// harness differentiates through them).
ForwardResult model_forward(const TemporalGraph& graph, const ParamStore& store,
                            const ModelConfig& cfg, bool train_mode, std::uint64_t noise_seed,
                            const std::map<std::string, Var>* bound = nullptr);

// Exact active-edge count of one graph's trained gates.
int active_edge_count(const ParamStore& store, const TemporalGraph& graph,
                      const ModelConfig& cfg);

} // namespace tgad
