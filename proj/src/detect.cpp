#include "tgad/detect.hpp"

#include <algorithm>
#include <cmath>

#include "tgad/errors.hpp"

namespace tgad {

double reasoning_score(double E, double P, double gamma) {
    return (E + gamma * (1.0 - P)) / (1.0 + gamma);
}

double node_recon_prob(const Tensor& adj_prob, const Tensor& adj_true, int node) {
    const int m = adj_prob.rows();
    if (!adj_prob.same_shape(adj_true))
        throw NumericError("node_recon_prob: probability/target shape mismatch");
    if (node < 0 || node >= m) throw NumericError("node_recon_prob: node out of range");
    if (m == 1) return 1.0;
    double log_lik = 0.0;
    for (int b = 0; b < m; ++b) {
        const double p = std::clamp(adj_prob(node, b), 1e-6, 1.0 - 1e-6);
        log_lik += adj_true(node, b) > 0.5 ? std::log(p) : std::log1p(-p);
    }
    return std::exp(log_lik / m);
}

double tune_gamma(const std::vector<double>& E, const std::vector<double>& P,
                  const DetectConfig& cfg) {
    if (E.size() != P.size() || E.empty())
        throw DataError("tune_gamma: need aligned non-empty validation scores");

    std::vector<double> grid = cfg.gamma_grid;
    std::sort(grid.begin(), grid.end());

    bool any_varying = false;
    double best_gamma = 1.0;
    double best_rate = std::numeric_limits<double>::infinity();
    for (double gamma : grid) {
        std::vector<double> rs(E.size());
        for (std::size_t i = 0; i < E.size(); ++i) rs[i] = reasoning_score(E[i], P[i], gamma);
        const auto [mn, mx] = std::minmax_element(rs.begin(), rs.end());
        if (*mx - *mn > 1e-15) any_varying = true;
        const GpdFit fit = pot_threshold(rs, cfg.q, cfg.init_quantile, cfg.min_excesses);
        std::size_t alarms = 0;
        for (double s : rs)
            if (s > fit.z_q) ++alarms;
        const double rate = static_cast<double>(alarms) / static_cast<double>(rs.size());
        if (rate < best_rate) { // strict: ties keep the smaller gamma
            best_rate = rate;
            best_gamma = gamma;
        }
    }
    if (!any_varying) return 1.0;
    return best_gamma;
}

AnomalyReport classify(std::vector<PointScore> points, const GpdFit& fit, double gamma) {
    AnomalyReport report;
    for (auto& p : points) p.label = p.RS > fit.z_q;
    report.points = std::move(points);
    report.fit = fit;
    report.gamma = gamma;
    return report;
}

} // namespace tgad
