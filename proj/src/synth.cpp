#include "tgad/synth.hpp"

#include <algorithm>
#include <cmath>

#include "tgad/errors.hpp"
#include "tgad/geo.hpp"
#include "tgad/rng.hpp"

namespace tgad {

RateStats fit_rate_stats(const Track& track) {
    if (track.points.size() < 3) throw DataError("fit_rate_stats: need at least 3 points");
    std::vector<double> a;
    std::vector<double> w;
    for (std::size_t i = 1; i < track.points.size(); ++i) {
        const AisPoint& prev = track.points[i - 1];
        const AisPoint& cur = track.points[i];
        const double dt = cur.t - prev.t;
        a.push_back((cur.sog - prev.sog) / dt);
        w.push_back(angle_diff_deg(prev.cog, cur.cog) / dt);
    }
    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= xs.size();
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var = xs.size() > 1 ? var / (xs.size() - 1) : 0.0;
        return std::pair<double, double>{mean, std::sqrt(var)};
    };
    RateStats s;
    std::tie(s.mu_a, s.sigma_a) = mean_std(a);
    std::tie(s.mu_omega, s.sigma_omega) = mean_std(w);
    return s;
}

std::vector<int> inject(Track& track, const RateStats& stats, const InjectionConfig& cfg,
                        std::uint64_t track_seed, bool& skipped) {
    skipped = false;
    const int n = static_cast<int>(track.points.size());
    if (n < 2) {
        skipped = true;
        return {};
    }
    if (stats.sigma_a == 0.0 && stats.sigma_omega == 0.0) {
        // no deviation would be detectable against a zero-variance baseline
        skipped = true;
        return {};
    }
    int count = static_cast<int>(std::llround(cfg.point_ratio * n));
    count = std::clamp(count, 1, n - 1);

    Rng rng(track_seed);
    std::vector<int> candidates(n - 1);
    for (int i = 0; i < n - 1; ++i) candidates[i] = i + 1; // index 0 excluded
    for (int i = n - 2; i > 0; --i) std::swap(candidates[i], candidates[rng.uniform_int(0, i)]);
    std::vector<int> chosen(candidates.begin(), candidates.begin() + count);
    std::sort(chosen.begin(), chosen.end());

    track.labels.assign(n, 0);
    std::size_t next = 0;
    for (int i = 1; i < n; ++i) {
        if (next >= chosen.size() || chosen[next] != i) continue;
        ++next;
        const AisPoint& prev = track.points[i - 1]; // possibly already perturbed
        AisPoint& cur = track.points[i];
        const double dt = cur.t - prev.t;
        const double sign = rng.coin() ? 1.0 : -1.0; // shared by both rates
        const double a_star = stats.mu_a + sign * cfg.k * stats.sigma_a;
        const double w_star = stats.mu_omega + sign * cfg.k * stats.sigma_omega;
        cur.sog = std::max(0.0, prev.sog + a_star * dt);
        cur.cog = wrap360(prev.cog + w_star * dt);
        track.labels[i] = 1;
    }
    return chosen;
}

std::vector<std::size_t> select_tracks(std::size_t n_tracks, const InjectionConfig& cfg) {
    if (n_tracks == 0) throw DataError("select_tracks: empty corpus");
    const std::size_t count = std::min(
        n_tracks, static_cast<std::size_t>(std::ceil(cfg.track_ratio * n_tracks)));
    Rng rng(hash_mix(cfg.seed, 0x5e1ec7ULL));
    std::vector<std::size_t> ids(n_tracks);
    for (std::size_t i = 0; i < n_tracks; ++i) ids[i] = i;
    for (std::size_t i = n_tracks - 1; i > 0; --i)
        std::swap(ids[i], ids[rng.uniform_int(0, static_cast<int>(i))]);
    std::vector<std::size_t> chosen(ids.begin(), ids.begin() + count);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

InjectionOutcome inject_corpus(std::vector<Track>& tracks, const InjectionConfig& cfg) {
    InjectionOutcome out;
    const auto designated = select_tracks(tracks.size(), cfg);
    for (std::size_t idx : designated) {
        Track& tr = tracks[idx];
        const RateStats stats = fit_rate_stats(tr);
        bool skipped = false;
        const auto injected =
            inject(tr, stats, cfg, hash_mix(cfg.seed, hash_str(tr.track_id)), skipped);
        if (skipped) {
            out.skipped.push_back(tr.track_id);
            continue;
        }
        out.designated.push_back(tr.track_id);
        out.injected_index.push_back(injected);
    }
    return out;
}

std::pair<double, double> position_delta(double sog_kn, double cog_deg, double lat_deg,
                                         double dt_h) {
    if (std::fabs(lat_deg) >= 89.9)
        throw DataError("position_delta: latitude too close to a pole");
    const double cog = deg2rad(cog_deg);
    const double d_phi = sog_kn * std::cos(cog) / kEarthRadiusNm * dt_h;
    const double d_lam =
        sog_kn * std::sin(cog) / (kEarthRadiusNm * std::cos(deg2rad(lat_deg))) * dt_h;
    return {d_phi, d_lam};
}

BoundCheck theorem1_check(double sog_kn, double cog_deg, double lat_deg, double a_star,
                          double w_star_deg, double eps, double dt_h) {
    BoundCheck check;
    check.eps = eps;
    check.bound = eps * dt_h;

    const double cog_rad = deg2rad(cog_deg);
    const double w_star_rad = deg2rad(w_star_deg);
    // preconditions, with the course terms taken in radians
    if (std::fabs(a_star) > eps * sog_kn || std::fabs(w_star_rad) > eps * cog_rad) {
        check.applicable = false;
        return check;
    }
    check.applicable = true;

    const auto [d_phi, d_lam] = position_delta(sog_kn, cog_deg, lat_deg, dt_h);
    const double sog_p = sog_kn + a_star * dt_h;
    const double cog_p = cog_deg + w_star_deg * dt_h;
    const auto [d_phi_p, d_lam_p] = position_delta(sog_p, cog_p, lat_deg, dt_h);

    check.d_lat = d_phi_p - d_phi;
    check.d_lon = d_lam_p - d_lam;
    check.pass =
        std::fabs(check.d_lat) <= check.bound && std::fabs(check.d_lon) <= check.bound;
    return check;
}

} // namespace tgad
