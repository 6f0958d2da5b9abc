#include "tgad/pot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgad/errors.hpp"

namespace tgad {

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw DataError("empirical_quantile: empty sample");
    std::sort(values.begin(), values.end());
    p = std::clamp(p, 0.0, 1.0);
    const double h = p * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

// Profile log-likelihood in theta = xi/sigma. For theta != 0 the inner
// maximization gives xi(theta) = mean(log1p(theta*y)), sigma = xi/theta, so
//   l(theta) = N * (-log(xi/theta) - xi - 1).
double profile_loglik(double theta, const std::vector<double>& y, double y_mean) {
    const double n = static_cast<double>(y.size());
    if (theta == 0.0) return -n * (std::log(y_mean) + 1.0);
    double xi = 0.0;
    for (double v : y) {
        const double arg = theta * v;
        if (arg <= -1.0) return -std::numeric_limits<double>::infinity();
        xi += std::log1p(arg);
    }
    xi /= n;
    const double sigma = xi / theta;
    if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
    return n * (-std::log(sigma) - xi - 1.0);
}

} // namespace

std::pair<double, double> fit_gpd(const std::vector<double>& excesses) {
    if (excesses.size() < 2) throw DataError("fit_gpd: need at least 2 excesses");
    const double n = static_cast<double>(excesses.size());
    double mean = 0.0;
    double y_max = 0.0;
    for (double v : excesses) {
        mean += v;
        y_max = std::max(y_max, v);
    }
    mean /= n;
    double var = 0.0;
    for (double v : excesses) var += (v - mean) * (v - mean);
    var /= (n - 1.0);

    if (var < 1e-300 || mean <= 0.0) return {0.0, std::max(mean, 1e-12)};

    // method-of-moments start
    const double ratio = mean * mean / var;
    const double xi_mom = 0.5 * (1.0 - ratio);
    const double sigma_mom = 0.5 * mean * (1.0 + ratio);
    double theta0 = xi_mom / std::max(sigma_mom, 1e-12);

    const double theta_lo = -(1.0 - 1e-9) / y_max;
    const double theta_hi = 16.0 / mean;
    theta0 = std::clamp(theta0, theta_lo, theta_hi);

    // coarse grid over the admissible interval plus the MOM start, then a
    // golden-section refinement of the best bracket
    const int grid_n = 400;
    double best_theta = 0.0;
    double best_ll = profile_loglik(0.0, excesses, mean);
    auto consider = [&](double theta) {
        const double ll = profile_loglik(theta, excesses, mean);
        if (ll > best_ll) {
            best_ll = ll;
            best_theta = theta;
        }
    };
    const double step = (theta_hi - theta_lo) / grid_n;
    for (int i = 0; i <= grid_n; ++i) consider(theta_lo + i * step);
    consider(theta0);

    double a = std::max(theta_lo, best_theta - step);
    double b = std::min(theta_hi, best_theta + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = profile_loglik(c, excesses, mean);
    double fd = profile_loglik(d, excesses, mean);
    for (int it = 0; it < 80; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = profile_loglik(c, excesses, mean);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = profile_loglik(d, excesses, mean);
        }
    }
    consider(0.5 * (a + b));

    if (best_theta == 0.0) return {0.0, mean};
    double xi = 0.0;
    for (double v : excesses) xi += std::log1p(best_theta * v);
    xi /= n;
    return {xi, xi / best_theta};
}

GpdFit pot_threshold(const std::vector<double>& scores, double q, double init_quantile,
                     std::size_t min_excesses) {
    if (scores.empty()) throw DataError("pot_threshold: empty score vector");
    GpdFit fit;
    fit.q = q;
    fit.n = scores.size();
    fit.u = empirical_quantile(scores, init_quantile);

    std::vector<double> excesses;
    for (double s : scores)
        if (s > fit.u) excesses.push_back(s - fit.u);
    fit.n_exceed = excesses.size();

    // The GPD extrapolates the tail above u; if the requested risk level sits
    // below u (q*n > N_u), the empirical quantile is the right answer.
    const bool risk_below_u = q * static_cast<double>(fit.n) >= static_cast<double>(fit.n_exceed);
    if (excesses.size() < std::max<std::size_t>(min_excesses, 2) || risk_below_u) {
        fit.fallback = true;
        fit.z_q = empirical_quantile(scores, 1.0 - q);
        return fit;
    }

    const auto [xi, sigma] = fit_gpd(excesses);
    fit.xi = xi;
    fit.sigma = sigma;
    const double rate = q * static_cast<double>(fit.n) / static_cast<double>(fit.n_exceed);
    if (std::fabs(xi) < 1e-6) {
        fit.z_q = fit.u + sigma * std::log(1.0 / rate);
    } else {
        fit.z_q = fit.u + sigma / xi * (std::pow(rate, -xi) - 1.0);
    }
    return fit;
}

} // namespace tgad
