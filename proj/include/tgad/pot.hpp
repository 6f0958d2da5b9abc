#pragma once

#include <cstddef>
#include <vector>

namespace tgad {

// Generalized Pareto fit of score excesses over an initial high threshold,
// and the risk-q anomaly threshold derived from it.
struct GpdFit {
    double u = 0.0;        // initial threshold (score units)
    double xi = 0.0;       // shape
    double sigma = 0.0;    // scale (> 0 unless fallback)
    std::size_t n = 0;     // total scores
    std::size_t n_exceed = 0;
    double z_q = 0.0;      // final threshold
    double q = 0.0;        // risk level
    bool fallback = false; // too few excesses: empirical (1-q) quantile used
};

// Type-7 empirical quantile of an unsorted sample.
double empirical_quantile(std::vector<double> values, double p);

// Method-of-moments start refined by a one-dimensional profile-likelihood
// search (Grimshaw-style reparameterization theta = xi/sigma). Returns
// (xi, sigma).
std::pair<double, double> fit_gpd(const std::vector<double>& excesses);

// Fits excesses above the init_quantile threshold and computes
//   z_q = u + sigma/xi * ((q*n/N_u)^(-xi) - 1)
// with the xi -> 0 limit z_q = u + sigma * log(N_u/(q*n)). Falls back to the
// empirical (1-q) quantile when fewer than min_excesses scores exceed u.
GpdFit pot_threshold(const std::vector<double>& scores, double q = 1e-2,
                     double init_quantile = 0.98, std::size_t min_excesses = 20);

} // namespace tgad
