#pragma once

#include <string>
#include <vector>

#include "tgad/pot.hpp"
#include "tgad/tensor.hpp"

namespace tgad {

// Per-point anomaly evidence: forecast error E, node reconstruction
// probability P, and the combined reasoning score RS.
struct PointScore {
    std::string ship_id;
    double t = 0.0;
    double E = 0.0;
    double P = 1.0;
    double RS = 0.0;
    bool label = false;
};

struct DetectConfig {
    double q = 1e-2;
    double init_quantile = 0.98;
    std::vector<double> gamma_grid = {0.1, 0.5, 1.0, 2.0, 5.0};
    std::size_t min_excesses = 20;
};

// RS = (E + gamma * (1 - P)) / (1 + gamma)
double reasoning_score(double E, double P, double gamma);

// Geometric mean of the Bernoulli likelihoods along the node's row of the
// decoded adjacency; probabilities are clipped to [1e-6, 1 - 1e-6]. A
// single-node subgraph scores 1 by convention.
double node_recon_prob(const Tensor& adj_prob, const Tensor& adj_true, int node);

// Picks the gamma whose POT threshold yields the smallest false-alarm rate
// on clean validation scores; ties break toward the smaller gamma. If every
// candidate produces a constant score vector, returns 1.0.
double tune_gamma(const std::vector<double>& E, const std::vector<double>& P,
                  const DetectConfig& cfg);

struct AnomalyReport {
    std::vector<PointScore> points;
    GpdFit fit;
    double gamma = 1.0;
};

// Labels each point anomalous iff RS > z_q (strict).
AnomalyReport classify(std::vector<PointScore> points, const GpdFit& fit, double gamma);

} // namespace tgad
